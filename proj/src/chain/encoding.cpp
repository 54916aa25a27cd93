#include "repchain/chain/encoding.hpp"

namespace repchain::chain {
namespace {

std::uint8_t get_u8(Reader& r) {
  std::uint8_t v = 0;
  r.raw(&v, 1);
  return v;
}

std::uint32_t get_u32(Reader& r) {
  std::uint8_t b[4];
  r.raw(b, 4);
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

std::uint64_t get_u64(Reader& r) {
  std::uint8_t b[8];
  r.raw(b, 8);
  std::uint64_t v = 0;
  for (auto x : b) v = (v << 8) | x;
  return v;
}

// Guards allocation: every element occupies at least one byte.
std::size_t get_count(Reader& r) {
  const std::size_t n = get_u32(r);
  if (n > r.remaining()) throw DecodeError("element count exceeds input");
  return n;
}

template <std::size_t N>
void get(Reader& r, std::array<std::uint8_t, N>& a) {
  r.raw(a.data(), N);
}

void get(Reader& r, ValidatorId& v) { v.value = get_u32(r); }
void get(Reader& r, Score& s) { s = Score::from_micros(static_cast<std::int64_t>(get_u64(r))); }

void get(Reader& r, Decision& d) {
  const auto tag = get_u8(r);
  if (tag > 2) throw DecodeError("bad decision tag");
  d = static_cast<Decision>(tag);
}

void get(Reader& r, SpentState& s) {
  const auto tag = get_u8(r);
  if (tag > 2) throw DecodeError("bad spent-state tag");
  s = static_cast<SpentState>(tag);
}

void get(Reader& r, Utxo& u) { decode(r, u); }
void get(Reader& r, Transaction& t) { decode(r, t); }
void get(Reader& r, TxDec& t) { decode(r, t); }

void get(Reader& r, TxInput& in) {
  get(r, in.utxo);
  get(r, in.origin_tx);
  in.value = get_u64(r);
  get(r, in.owner_sig);
}

void get(Reader& r, TxOutput& out) {
  get(r, out.owner);
  out.value = get_u64(r);
}

void get(Reader& r, SubsetSignature& s) {
  s.destination = get_u32(r);
  get(r, s.sig);
}

void get(Reader& r, ExcerptVote& v) {
  get(r, v.voter);
  const auto n = get_count(r);
  v.decisions.resize(n);
  for (auto& d : v.decisions) get(r, d);
  get(r, v.subset_sig);
}

template <class T>
void get(Reader& r, std::vector<T>& v) {
  const auto n = get_count(r);
  v.clear();
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    T x{};
    get(r, x);
    v.push_back(std::move(x));
  }
}

template <class K, class V>
void get(Reader& r, std::map<K, V>& m) {
  const auto n = get_count(r);
  m.clear();
  for (std::size_t i = 0; i < n; ++i) {
    K k{};
    V v{};
    get(r, k);
    get(r, v);
    if (!m.empty() && !(m.rbegin()->first < k)) throw DecodeError("map keys not strictly ascending");
    m.emplace_hint(m.end(), k, v);
  }
}

void get_bitmap(Reader& r, crypto::SignerBitmap& bits) {
  const std::size_t n = get_u32(r);
  const std::size_t nbytes = (n + 7) / 8;
  if (nbytes > r.remaining()) throw DecodeError("bitmap exceeds input");
  Bytes packed(nbytes);
  r.raw(packed.data(), nbytes);
  bits.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (packed[i / 8] >> (7 - i % 8)) & 1;
  if (n % 8 != 0 && (packed.back() & ((1u << (8 - n % 8)) - 1)) != 0) {
    throw DecodeError("non-zero bitmap padding");
  }
}

void get_header(Reader& r, Epoch& e, Iteration& i, ShardId& s) {
  e = get_u64(r);
  i = get_u64(r);
  s = get_u32(r);
}

}  // namespace

void decode(Reader& r, CollectiveSignature& v) {
  get_bitmap(r, v.signers);
  const auto n = get_count(r);
  v.aggregate.resize(n);
  r.raw(v.aggregate.data(), n);
}

void decode(Reader& r, Utxo& u) {
  get(r, u.address);
  get(r, u.owner);
  u.value = get_u64(r);
  get(r, u.origin_tx);
  get(r, u.spent_state);
}

void decode(Reader& r, Transaction& v) {
  get(r, v.id);
  get(r, v.inputs);
  get(r, v.outputs);
  v.fee = get_u64(r);
  v.submit_time = get_u64(r);
}

void decode(Reader& r, TxList& v) {
  get_header(r, v.epoch, v.iteration, v.shard);
  get(r, v.tx_hashes);
  get(r, v.leader_sig);
}

void decode(Reader& r, TxDec& v) {
  get_header(r, v.epoch, v.iteration, v.shard);
  get(r, v.voter);
  get(r, v.decisions);
  get(r, v.subset_sigs);
  get(r, v.sig);
}

void decode(Reader& r, TxDecSet& v) {
  get_header(r, v.epoch, v.iteration, v.shard);
  get(r, v.decs);
  get(r, v.leader_sig);
}

void decode(Reader& r, TransactionBlock& v) {
  get_header(r, v.epoch, v.iteration, v.shard);
  get(r, v.prev_tb_hash);
  get(r, v.txs);
  get(r, v.leader_sig);
}

void decode(Reader& r, ReputationBlock& v) {
  v.epoch = get_u64(r);
  v.shard = get_u32(r);
  get(r, v.prev_rb_hash);
  get(r, v.confirmed_tb_hashes);
  get(r, v.score_deltas);
  const auto flag = get_u8(r);
  if (flag > 1) throw DecodeError("bad optional flag");
  if (flag == 1) {
    v.prev_state_block_hashes.emplace();
    get(r, *v.prev_state_block_hashes);
  } else {
    v.prev_state_block_hashes.reset();
  }
  decode(r, v.cosig);
}

void decode(Reader& r, StateBlock& v) {
  v.epoch = get_u64(r);
  v.shard = get_u32(r);
  get(r, v.cumulative_scores);
  get(r, v.utxo_set);
  decode(r, v.cosig);
  v.pow_nonce = get_u64(r);
}

void decode(Reader& r, Warning& v) {
  get_header(r, v.epoch, v.iteration, v.shard);
  get(r, v.sender);
  v.reason = get_u8(r);
  get(r, v.sig);
}

void decode(Reader& r, ProofExcerpt& v) {
  get_header(r, v.epoch, v.iteration, v.source);
  v.destination = get_u32(r);
  get(r, v.tx_hashes);
  get(r, v.votes);
}

}  // namespace repchain::chain
