#include "repchain/chain/validation.hpp"

#include <algorithm>
#include <stdexcept>

namespace repchain::chain {

bool well_formed(const Transaction& tx) {
  if (tx.inputs.empty() || tx.outputs.empty()) return false;
  if (tx.id != tx_id(tx)) return false;
  std::vector<Address> seen;
  seen.reserve(tx.inputs.size());
  for (const auto& in : tx.inputs) seen.push_back(in.utxo);
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) return false;
  const auto in_total = input_total(tx);
  const auto out_total = output_total(tx);
  if (!in_total || !out_total) return false;
  std::uint64_t spend = 0;
  if (__builtin_add_overflow(*out_total, tx.fee, &spend)) return false;
  return *in_total == spend;
}

Decision validate_tx_structure(const Transaction& tx, const UtxoView& view,
                               const crypto::SignatureScheme& scheme, ValidationBudget& budget,
                               StructureCheck structure) {
  if (!budget.consume()) return Decision::unknown;
  if (structure == StructureCheck::run && !well_formed(tx)) return Decision::no;
  for (const auto& in : tx.inputs) {
    if (!view.owns(in)) continue;
    const auto utxo = view.find(in.utxo);
    if (!utxo || utxo->spent_state != SpentState::unspent) return Decision::no;
    if (utxo->value != in.value || utxo->origin_tx != in.origin_tx) return Decision::no;
    if (!scheme.verify(utxo->owner, tx.id, in.owner_sig)) return Decision::no;
  }
  return Decision::yes;
}

void sign_transaction(Transaction& tx, std::span<const crypto::KeyPair* const> signers,
                      const crypto::SignatureScheme& scheme) {
  if (signers.size() != tx.inputs.size()) throw std::invalid_argument("one signer per input required");
  tx.id = tx_id(tx);
  for (std::size_t i = 0; i < tx.inputs.size(); ++i) tx.inputs[i].owner_sig = scheme.sign(*signers[i], tx.id);
}

}  // namespace repchain::chain
