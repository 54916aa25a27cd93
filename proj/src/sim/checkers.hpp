#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "repchain/chain/types.hpp"
#include "repchain/crypto/signature.hpp"

namespace repchain::sim {

/// Omniscient replay of every committed transaction against the true global
/// UTXO state, independent of the shard ledgers.
class SafetyChecker {
 public:
  SafetyChecker(const crypto::SignatureScheme& scheme, std::size_t k) : scheme_(&scheme), k_(k) {}

  void genesis(const chain::Utxo& u);
  /// Applies a commit; returns a description of the first rule it breaks.
  std::optional<std::string> commit(const chain::Transaction& tx);
  /// Same per-shard consolidation rule the epoch boundary applies.
  void consolidate();

  /// Unspent set per home shard.
  std::vector<std::vector<chain::Utxo>> by_shard() const;
  std::uint64_t total_value() const;
  std::uint64_t genesis_value() const { return genesis_value_; }
  std::uint64_t fees() const { return fees_; }

 private:
  const crypto::SignatureScheme* scheme_;
  std::size_t k_;
  std::map<chain::Address, chain::Utxo> unspent_;
  std::set<chain::TxId> committed_;
  std::uint64_t genesis_value_ = 0;
  std::uint64_t fees_ = 0;
};

/// Lock, release and spend transitions of cross-shard inputs, audited at
/// every epoch boundary: a resolved transaction must have all of its inputs
/// spent by it (committed) or none spent or locked by it (aborted).
class AtomicityChecker {
 public:
  void opened(const chain::Transaction& tx);
  void locked(const chain::TxId& tx, const chain::Address& a);
  void released(const chain::TxId& tx, const chain::Address& a);
  void spent(const chain::TxId& tx, const chain::Address& a);
  void resolved(const chain::TxId& tx, bool committed);

  /// Violations among the tracked transactions; clears the tracked set.
  std::vector<std::string> audit();

 private:
  enum class Fate { pending, committed, aborted };
  struct Entry {
    std::vector<chain::Address> inputs;
    std::set<chain::Address> locked;
    std::set<chain::Address> spent;
    Fate fate = Fate::pending;
  };
  std::map<chain::TxId, Entry> txs_;
  std::vector<std::string> flagged_;
};

}  // namespace repchain::sim
