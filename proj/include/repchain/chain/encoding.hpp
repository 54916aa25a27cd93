#pragma once

#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "repchain/chain/types.hpp"

namespace repchain::chain {

// Canonical encoding: big-endian fixed-width integers, fixed-size arrays as
// raw bytes, every variable-length field prefixed by its u32 element count.
// Encoders are templated on the sink so the simulator can measure message
// sizes with a SizeCounter without materializing bytes.

class ByteWriter {
 public:
  void raw(const std::uint8_t* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class SizeCounter {
 public:
  void raw(const std::uint8_t*, std::size_t n) { size_ += n; }
  std::size_t size() const { return size_; }

 private:
  std::size_t size_ = 0;
};

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Reader {
 public:
  explicit Reader(ByteView in) : in_(in) {}
  void raw(std::uint8_t* p, std::size_t n) {
    if (n > in_.size() - pos_) throw DecodeError("truncated input");
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  ByteView in_;
  std::size_t pos_ = 0;
};

namespace enc {

template <class W>
void u8(W& w, std::uint8_t v) {
  w.raw(&v, 1);
}

template <class W>
void u32(W& w, std::uint32_t v) {
  const std::uint8_t b[4] = {std::uint8_t(v >> 24), std::uint8_t(v >> 16), std::uint8_t(v >> 8), std::uint8_t(v)};
  w.raw(b, 4);
}

template <class W>
void u64(W& w, std::uint64_t v) {
  std::uint8_t b[8];
  for (int i = 7; i >= 0; --i, v >>= 8) b[i] = std::uint8_t(v);
  w.raw(b, 8);
}

template <class W, std::size_t N>
void fixed(W& w, const std::array<std::uint8_t, N>& a) {
  w.raw(a.data(), N);
}

template <class W>
void count(W& w, std::size_t n) {
  if (n > UINT32_MAX) throw std::length_error("sequence too long to encode");
  u32(w, static_cast<std::uint32_t>(n));
}

template <class W>
void bytes(W& w, ByteView b) {
  count(w, b.size());
  w.raw(b.data(), b.size());
}

}  // namespace enc

// Element encoders. Each `encode` writes the full value; `encode_body`
// writes the fields covered by the value's signature.

template <class W>
void encode(W& w, const Hash& h) {
  enc::fixed(w, h);
}

template <class W>
void encode(W& w, const Signature& s) {
  enc::fixed(w, s);
}

template <class W>
void encode(W& w, ValidatorId v) {
  enc::u32(w, v.value);
}

template <class W>
void encode(W& w, Score s) {
  enc::u64(w, static_cast<std::uint64_t>(s.micros()));
}

template <class W>
void encode(W& w, Decision d) {
  enc::u8(w, static_cast<std::uint8_t>(d));
}

template <class W, class T>
void encode(W& w, const std::vector<T>& v) {
  enc::count(w, v.size());
  for (const auto& x : v) encode(w, x);
}

template <class W, class K, class V>
void encode(W& w, const std::map<K, V>& m) {
  enc::count(w, m.size());
  for (const auto& [k, v] : m) {
    encode(w, k);
    encode(w, v);
  }
}

template <class W, class T>
void encode(W& w, const std::optional<T>& o) {
  enc::u8(w, o ? 1 : 0);
  if (o) encode(w, *o);
}

template <class W>
void encode(W& w, const crypto::SignerBitmap& bits) {
  const Bytes packed = crypto::pack_bitmap(bits);
  w.raw(packed.data(), packed.size());
}

template <class W>
void encode(W& w, const CollectiveSignature& c) {
  encode(w, c.signers);
  enc::bytes(w, c.aggregate);
}

template <class W>
void encode(W& w, const Utxo& u) {
  encode(w, u.address);
  enc::fixed(w, u.owner);
  enc::u64(w, u.value);
  encode(w, u.origin_tx);
  enc::u8(w, static_cast<std::uint8_t>(u.spent_state));
}

template <class W>
void encode_ref(W& w, const TxInput& in) {
  encode(w, in.utxo);
  encode(w, in.origin_tx);
  enc::u64(w, in.value);
}

template <class W>
void encode(W& w, const TxInput& in) {
  encode_ref(w, in);
  encode(w, in.owner_sig);
}

template <class W>
void encode(W& w, const TxOutput& out) {
  enc::fixed(w, out.owner);
  enc::u64(w, out.value);
}

template <class W>
void encode_body(W& w, const Transaction& tx) {
  enc::count(w, tx.inputs.size());
  for (const auto& in : tx.inputs) encode_ref(w, in);
  encode(w, tx.outputs);
  enc::u64(w, tx.fee);
}

template <class W>
void encode(W& w, const Transaction& tx) {
  encode(w, tx.id);
  encode(w, tx.inputs);
  encode(w, tx.outputs);
  enc::u64(w, tx.fee);
  enc::u64(w, tx.submit_time);
}

template <class W>
void encode_header(W& w, Epoch e, Iteration i, ShardId s) {
  enc::u64(w, e);
  enc::u64(w, i);
  enc::u32(w, s);
}

template <class W>
void encode_body(W& w, const TxList& v) {
  encode_header(w, v.epoch, v.iteration, v.shard);
  encode(w, v.tx_hashes);
}

template <class W>
void encode(W& w, const TxList& v) {
  encode_body(w, v);
  encode(w, v.leader_sig);
}

template <class W>
void encode(W& w, const SubsetSignature& s) {
  enc::u32(w, s.destination);
  encode(w, s.sig);
}

template <class W>
void encode_body(W& w, const TxDec& v) {
  encode_header(w, v.epoch, v.iteration, v.shard);
  encode(w, v.voter);
  encode(w, v.decisions);
  encode(w, v.subset_sigs);
}

template <class W>
void encode(W& w, const TxDec& v) {
  encode_body(w, v);
  encode(w, v.sig);
}

template <class W>
void encode_body(W& w, const TxDecSet& v) {
  encode_header(w, v.epoch, v.iteration, v.shard);
  encode(w, v.decs);
}

template <class W>
void encode(W& w, const TxDecSet& v) {
  encode_body(w, v);
  encode(w, v.leader_sig);
}

template <class W>
void encode_body(W& w, const TransactionBlock& v) {
  encode_header(w, v.epoch, v.iteration, v.shard);
  encode(w, v.prev_tb_hash);
  encode(w, v.txs);
}

template <class W>
void encode(W& w, const TransactionBlock& v) {
  encode_body(w, v);
  encode(w, v.leader_sig);
}

template <class W>
void encode_body(W& w, const ReputationBlock& v) {
  enc::u64(w, v.epoch);
  enc::u32(w, v.shard);
  encode(w, v.prev_rb_hash);
  encode(w, v.confirmed_tb_hashes);
  encode(w, v.score_deltas);
  encode(w, v.prev_state_block_hashes);
}

template <class W>
void encode(W& w, const ReputationBlock& v) {
  encode_body(w, v);
  encode(w, v.cosig);
}

template <class W>
void encode_body(W& w, const StateBlock& v) {
  enc::u64(w, v.epoch);
  enc::u32(w, v.shard);
  encode(w, v.cumulative_scores);
  encode(w, v.utxo_set);
}

template <class W>
void encode(W& w, const StateBlock& v) {
  encode_body(w, v);
  encode(w, v.cosig);
  enc::u64(w, v.pow_nonce);
}

template <class W>
void encode_body(W& w, const Warning& v) {
  encode_header(w, v.epoch, v.iteration, v.shard);
  encode(w, v.sender);
  enc::u8(w, v.reason);
}

template <class W>
void encode(W& w, const Warning& v) {
  encode_body(w, v);
  encode(w, v.sig);
}

template <class W>
void encode(W& w, const ExcerptVote& v) {
  encode(w, v.voter);
  encode(w, v.decisions);
  encode(w, v.subset_sig);
}

template <class W>
void encode(W& w, const ProofExcerpt& v) {
  encode_header(w, v.epoch, v.iteration, v.source);
  enc::u32(w, v.destination);
  encode(w, v.tx_hashes);
  encode(w, v.votes);
}

template <class T>
Bytes canonical_encode(const T& v) {
  ByteWriter w;
  encode(w, v);
  return w.take();
}

template <class T>
std::size_t encoded_size(const T& v) {
  SizeCounter c;
  encode(c, v);
  return c.size();
}

// Decoders reject truncated input, trailing bytes, out-of-range enum tags and
// non-canonical forms (unsorted map keys, non-zero bitmap padding).
void decode(Reader& r, Utxo& v);
void decode(Reader& r, Transaction& v);
void decode(Reader& r, TxList& v);
void decode(Reader& r, TxDec& v);
void decode(Reader& r, TxDecSet& v);
void decode(Reader& r, TransactionBlock& v);
void decode(Reader& r, ReputationBlock& v);
void decode(Reader& r, StateBlock& v);
void decode(Reader& r, Warning& v);
void decode(Reader& r, ProofExcerpt& v);
void decode(Reader& r, CollectiveSignature& v);

template <class T>
T canonical_decode(ByteView bytes) {
  Reader r(bytes);
  T v{};
  decode(r, v);
  if (r.remaining() != 0) throw DecodeError("trailing bytes after value");
  return v;
}

}  // namespace repchain::chain
