#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "repchain/chain/types.hpp"
#include "repchain/chain/validation.hpp"
#include "repchain/consensus/engine.hpp"
#include "repchain/reputation/ledger.hpp"

namespace repchain::cross {

using chain::Address;
using chain::ShardId;
using chain::Transaction;
using chain::TxId;
using chain::TxInput;
using chain::Utxo;

/// Shards a transaction touches. Inputs live where the transaction that
/// created them is routed; the transaction itself is routed by its own id.
struct Route {
  std::vector<ShardId> input_shards;  // ascending, unique
  ShardId output_shard = 0;

  bool cross() const { return input_shards.size() != 1 || input_shards.front() != output_shard; }
  /// Input shards other than the output shard.
  std::vector<ShardId> foreign_inputs() const;
};

ShardId input_shard_of(const TxInput& in, std::size_t k);
ShardId home_shard_of(const Utxo& u, std::size_t k);
Route route_tx(const Transaction& tx, std::size_t k);

enum class LockVerdict { accept, reject };

/// UTXO state held by one shard. Spent entries stay visible until the next
/// consolidation replaces the set.
class ShardLedger final : public chain::UtxoView {
 public:
  ShardLedger(ShardId shard, std::size_t k) : shard_(shard), k_(k) {}

  ShardId shard() const { return shard_; }

  /// Adds an unspent UTXO that belongs here.
  void insert(Utxo u);

  bool owns(const TxInput& in) const override;
  std::optional<Utxo> find(const Address& a) const override;

  /// Locks the local inputs for `tx`, all or nothing. Inputs already locked
  /// by the same transaction are fine, so repeating the call is harmless.
  LockVerdict lock_inputs(const Transaction& tx);
  /// Locked-by-tx local inputs back to unspent.
  void release(const Transaction& tx);
  /// Local inputs (unspent or locked by tx) to spent. False, with nothing
  /// changed, if any of them is in another state.
  bool spend(const Transaction& tx);
  /// Creates the outputs of a committed transaction routed here.
  void add_outputs(const Transaction& tx);

  std::optional<TxId> locked_by(const Address& a) const;
  std::vector<Utxo> unspent() const;
  const std::map<Address, Utxo>& utxos() const { return utxos_; }
  /// Whole-set replacement after consolidation.
  void replace(std::vector<Utxo> utxos);
  std::uint64_t total_unspent_value() const;

 private:
  ShardId shard_;
  std::size_t k_;
  std::map<Address, Utxo> utxos_;
  std::map<Address, TxId> locks_;
};

/// The cell of a TxDecSet destined to `destination`, with every voter's
/// decisions on it and the matching subset signature. All transactions of
/// the cell travel together since the signatures cover the whole cell.
chain::ProofExcerpt make_excerpt(const chain::TxList& list, const chain::TxDecSet& decset, ShardId destination,
                                 std::size_t k);

/// Per-transaction verdict of the source shard, or nullopt if the excerpt
/// is malformed or any vote fails verification (the whole proof is then
/// ignored).
std::optional<std::vector<reputation::Outcome>> verify_excerpt(const chain::ProofExcerpt& excerpt,
                                                               const consensus::Roster& source, std::size_t k,
                                                               const crypto::SignatureScheme& scheme);

enum class Resolution : std::uint8_t { pending, committed, aborted };
enum class Action : std::uint8_t { wait, propose_commit, abort };

/// Output-shard bookkeeping for one cross-shard transaction.
struct CrossTxState {
  TxId id{};
  Route route;
  /// Accept (included) or Reject (rejected) per foreign input shard.
  std::map<ShardId, reputation::Outcome> proofs;
  Resolution resolution = Resolution::pending;
  chain::Tick opened = 0;

  /// Records a verdict; undecided verdicts carry no information.
  void record(ShardId source, reputation::Outcome verdict);
};

/// Any Reject aborts; Accept from every foreign input shard lets the output
/// shard propose the commit; otherwise keep waiting.
Action resolve(const CrossTxState& state);

}  // namespace repchain::cross
