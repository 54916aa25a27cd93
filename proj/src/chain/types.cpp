#include "repchain/chain/types.hpp"

#include "repchain/chain/encoding.hpp"
#include "repchain/crypto/hash.hpp"

namespace repchain::chain {

bool can_transition(SpentState from, SpentState to) {
  switch (from) {
    case SpentState::unspent:
      return to == SpentState::locked || to == SpentState::spent;
    case SpentState::locked:
      return to == SpentState::unspent || to == SpentState::spent;
    case SpentState::spent:
      return false;
  }
  return false;
}

std::string_view to_string(SpentState s) {
  switch (s) {
    case SpentState::unspent:
      return "unspent";
    case SpentState::locked:
      return "locked";
    case SpentState::spent:
      return "spent";
  }
  return "?";
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::no:
      return "No";
    case Decision::yes:
      return "Yes";
    case Decision::unknown:
      return "Unknown";
  }
  return "?";
}

Bytes tx_body_bytes(const Transaction& tx) {
  ByteWriter w;
  encode_body(w, tx);
  return w.take();
}

TxId tx_id(const Transaction& tx) { return crypto::sha256(tx_body_bytes(tx)); }

Address output_address(const TxId& id, std::uint32_t index) {
  ByteWriter w;
  encode(w, id);
  enc::u32(w, index);
  return crypto::sha256(w.take());
}

std::optional<std::uint64_t> input_total(const Transaction& tx) {
  std::uint64_t sum = 0;
  for (const auto& in : tx.inputs)
    if (__builtin_add_overflow(sum, in.value, &sum)) return std::nullopt;
  return sum;
}

std::optional<std::uint64_t> output_total(const Transaction& tx) {
  std::uint64_t sum = 0;
  for (const auto& out : tx.outputs)
    if (__builtin_add_overflow(sum, out.value, &sum)) return std::nullopt;
  return sum;
}

namespace {
template <class T>
Bytes body_of(const T& v) {
  ByteWriter w;
  encode_body(w, v);
  return w.take();
}
}  // namespace

Bytes signing_bytes(const TxList& v) { return body_of(v); }
Bytes signing_bytes(const TxDec& v) { return body_of(v); }
Bytes signing_bytes(const TxDecSet& v) { return body_of(v); }
Bytes signing_bytes(const TransactionBlock& v) { return body_of(v); }
Bytes signing_bytes(const ReputationBlock& v) { return body_of(v); }
Bytes signing_bytes(const StateBlock& v) { return body_of(v); }
Bytes signing_bytes(const Warning& v) { return body_of(v); }

Bytes subset_signing_bytes(Epoch epoch, Iteration iteration, ShardId source, ShardId destination,
                           ValidatorId voter, std::span<const TxId> cell_hashes,
                           std::span<const Decision> cell_decisions) {
  ByteWriter w;
  static constexpr std::string_view kDomain = "subset";
  w.raw(reinterpret_cast<const std::uint8_t*>(kDomain.data()), kDomain.size());
  encode_header(w, epoch, iteration, source);
  enc::u32(w, destination);
  encode(w, voter);
  enc::count(w, cell_hashes.size());
  for (const auto& h : cell_hashes) encode(w, h);
  enc::count(w, cell_decisions.size());
  for (auto d : cell_decisions) encode(w, d);
  return w.take();
}

Hash block_hash(const TransactionBlock& b) { return crypto::sha256(canonical_encode(b)); }
Hash block_hash(const ReputationBlock& b) { return crypto::sha256(canonical_encode(b)); }
Hash block_hash(const StateBlock& b) { return crypto::sha256(canonical_encode(b)); }

Hash sealed_body_hash(const StateBlock& b) {
  ByteWriter w;
  encode_body(w, b);
  encode(w, b.cosig);
  return crypto::sha256(w.take());
}

}  // namespace repchain::chain
