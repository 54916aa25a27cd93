#include "checkers.hpp"

#include "repchain/chain/validation.hpp"
#include "repchain/cross/cross_shard.hpp"
#include "repchain/epoch/epoch_sync.hpp"

namespace repchain::sim {

void SafetyChecker::genesis(const chain::Utxo& u) {
  unspent_[u.address] = u;
  genesis_value_ += u.value;
}

std::optional<std::string> SafetyChecker::commit(const chain::Transaction& tx) {
  const std::string id = to_hex(tx.id).substr(0, 16);
  if (!committed_.insert(tx.id).second) return "transaction " + id + " committed twice";
  if (!chain::well_formed(tx)) return "transaction " + id + " is malformed or does not balance";
  for (const auto& in : tx.inputs) {
    auto it = unspent_.find(in.utxo);
    if (it == unspent_.end()) return "transaction " + id + " spends a missing or already spent UTXO";
    const chain::Utxo& u = it->second;
    if (u.value != in.value || u.origin_tx != in.origin_tx) return "transaction " + id + " misstates an input";
    if (!scheme_->verify(u.owner, tx.id, in.owner_sig)) return "transaction " + id + " carries a bad owner signature";
  }
  for (const auto& in : tx.inputs) unspent_.erase(in.utxo);
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    chain::Utxo u{chain::output_address(tx.id, static_cast<std::uint32_t>(i)), tx.outputs[i].owner,
                  tx.outputs[i].value, tx.id, chain::SpentState::unspent};
    unspent_[u.address] = u;
  }
  fees_ += tx.fee;
  return std::nullopt;
}

void SafetyChecker::consolidate() {
  std::map<chain::Address, chain::Utxo> next;
  for (auto& set : by_shard()) {
    for (auto& u : epoch::consolidate_utxos(std::move(set))) next[u.address] = u;
  }
  unspent_ = std::move(next);
}

std::vector<std::vector<chain::Utxo>> SafetyChecker::by_shard() const {
  std::vector<std::vector<chain::Utxo>> out(k_);
  for (const auto& [a, u] : unspent_) out[cross::home_shard_of(u, k_)].push_back(u);
  return out;
}

std::uint64_t SafetyChecker::total_value() const {
  std::uint64_t sum = 0;
  for (const auto& [a, u] : unspent_) sum += u.value;
  return sum;
}

void AtomicityChecker::opened(const chain::Transaction& tx) {
  if (txs_.contains(tx.id)) flagged_.push_back("cross-shard transaction " + to_hex(tx.id).substr(0, 16) + " opened twice");
  Entry e;
  for (const auto& in : tx.inputs) e.inputs.push_back(in.utxo);
  txs_[tx.id] = std::move(e);
}

void AtomicityChecker::locked(const chain::TxId& tx, const chain::Address& a) {
  auto it = txs_.find(tx);
  if (it != txs_.end()) it->second.locked.insert(a);
}

void AtomicityChecker::released(const chain::TxId& tx, const chain::Address& a) {
  auto it = txs_.find(tx);
  if (it != txs_.end()) it->second.locked.erase(a);
}

void AtomicityChecker::spent(const chain::TxId& tx, const chain::Address& a) {
  auto it = txs_.find(tx);
  if (it == txs_.end()) return;
  it->second.locked.erase(a);
  it->second.spent.insert(a);
}

void AtomicityChecker::resolved(const chain::TxId& tx, bool committed) {
  auto it = txs_.find(tx);
  if (it == txs_.end()) return;
  const Fate fate = committed ? Fate::committed : Fate::aborted;
  if (it->second.fate != Fate::pending && it->second.fate != fate) {
    flagged_.push_back("cross-shard transaction " + to_hex(tx).substr(0, 16) + " both committed and aborted");
  }
  it->second.fate = fate;
}

std::vector<std::string> AtomicityChecker::audit() {
  std::vector<std::string> out = std::move(flagged_);
  flagged_.clear();
  for (const auto& [id, e] : txs_) {
    const std::string name = to_hex(id).substr(0, 16);
    switch (e.fate) {
      case Fate::pending:
        out.push_back("cross-shard transaction " + name + " unresolved at epoch end");
        break;
      case Fate::committed:
        if (e.spent.size() != e.inputs.size()) {
          out.push_back("committed transaction " + name + " has " + std::to_string(e.inputs.size() - e.spent.size()) +
                        " unspent inputs");
        }
        break;
      case Fate::aborted:
        if (!e.spent.empty() || !e.locked.empty()) {
          out.push_back("aborted transaction " + name + " still holds or spent inputs");
        }
        break;
    }
  }
  txs_.clear();
  return out;
}

}  // namespace repchain::sim
