#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "repchain/chain/types.hpp"
#include "repchain/crypto/signature.hpp"

namespace repchain::chain {

/// A validator's local picture of the UTXOs its shard is responsible for.
class UtxoView {
 public:
  virtual ~UtxoView() = default;
  /// True if the input's UTXO lives in this shard (so it must be checked here).
  virtual bool owns(const TxInput& input) const = 0;
  virtual std::optional<Utxo> find(const Address& address) const = 0;
};

/// Per-tick validation allowance. Each attempted validation consumes one unit.
struct ValidationBudget {
  std::uint64_t remaining = UINT64_MAX;

  bool consume() {
    if (remaining == 0) return false;
    if (remaining != UINT64_MAX) --remaining;
    return true;
  }
};

/// Checks that need no UTXO state: non-empty inputs and outputs, id matches
/// the body, no repeated input, totals balance (inputs = outputs + fee).
bool well_formed(const Transaction& tx);

/// Lets a caller that has already run well_formed on this exact transaction
/// skip repeating it.
enum class StructureCheck { run, already_passed };

/// Yes iff the transaction is well formed and every input this shard owns is
/// unspent, unlocked, matches the claimed origin and value, and carries a
/// valid owner signature over the id. No on any definite violation. Unknown
/// when the budget is exhausted (nothing else is checked then).
Decision validate_tx_structure(const Transaction& tx, const UtxoView& view,
                               const crypto::SignatureScheme& scheme, ValidationBudget& budget,
                               StructureCheck structure = StructureCheck::run);

/// Fills in the id and one owner signature per input. signers[i] signs input i.
void sign_transaction(Transaction& tx, std::span<const crypto::KeyPair* const> signers,
                      const crypto::SignatureScheme& scheme);

}  // namespace repchain::chain
