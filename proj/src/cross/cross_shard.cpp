#include "repchain/cross/cross_shard.hpp"

#include <algorithm>
#include <stdexcept>

namespace repchain::cross {

std::vector<ShardId> Route::foreign_inputs() const {
  std::vector<ShardId> out;
  for (auto s : input_shards) {
    if (s != output_shard) out.push_back(s);
  }
  return out;
}

ShardId input_shard_of(const TxInput& in, std::size_t k) { return consensus::output_shard_of(in.origin_tx, k); }

ShardId home_shard_of(const Utxo& u, std::size_t k) { return consensus::output_shard_of(u.origin_tx, k); }

Route route_tx(const Transaction& tx, std::size_t k) {
  Route r;
  r.output_shard = consensus::output_shard_of(tx.id, k);
  for (const auto& in : tx.inputs) r.input_shards.push_back(input_shard_of(in, k));
  std::sort(r.input_shards.begin(), r.input_shards.end());
  r.input_shards.erase(std::unique(r.input_shards.begin(), r.input_shards.end()), r.input_shards.end());
  return r;
}

void ShardLedger::insert(Utxo u) {
  if (home_shard_of(u, k_) != shard_) throw std::invalid_argument("UTXO belongs to another shard");
  u.spent_state = chain::SpentState::unspent;
  const Address a = u.address;
  utxos_[a] = std::move(u);
}

bool ShardLedger::owns(const TxInput& in) const { return input_shard_of(in, k_) == shard_; }

std::optional<Utxo> ShardLedger::find(const Address& a) const {
  auto it = utxos_.find(a);
  if (it == utxos_.end()) return std::nullopt;
  return it->second;
}

LockVerdict ShardLedger::lock_inputs(const Transaction& tx) {
  std::vector<Address> fresh;
  for (const auto& in : tx.inputs) {
    if (!owns(in)) continue;
    auto it = utxos_.find(in.utxo);
    if (it == utxos_.end() || it->second.value != in.value || it->second.origin_tx != in.origin_tx) {
      return LockVerdict::reject;
    }
    if (it->second.spent_state == chain::SpentState::unspent) {
      fresh.push_back(in.utxo);
    } else if (it->second.spent_state != chain::SpentState::locked || locks_.at(in.utxo) != tx.id) {
      return LockVerdict::reject;
    }
  }
  for (const auto& a : fresh) {
    utxos_[a].spent_state = chain::SpentState::locked;
    locks_[a] = tx.id;
  }
  return LockVerdict::accept;
}

void ShardLedger::release(const Transaction& tx) {
  for (const auto& in : tx.inputs) {
    auto l = locks_.find(in.utxo);
    if (l == locks_.end() || l->second != tx.id) continue;
    locks_.erase(l);
    utxos_[in.utxo].spent_state = chain::SpentState::unspent;
  }
}

bool ShardLedger::spend(const Transaction& tx) {
  for (const auto& in : tx.inputs) {
    if (!owns(in)) continue;
    auto it = utxos_.find(in.utxo);
    if (it == utxos_.end()) return false;
    const auto st = it->second.spent_state;
    if (st == chain::SpentState::spent) return false;
    if (st == chain::SpentState::locked && locks_.at(in.utxo) != tx.id) return false;
  }
  for (const auto& in : tx.inputs) {
    if (!owns(in)) continue;
    locks_.erase(in.utxo);
    utxos_[in.utxo].spent_state = chain::SpentState::spent;
  }
  return true;
}

void ShardLedger::add_outputs(const Transaction& tx) {
  for (std::size_t i = 0; i < tx.outputs.size(); ++i) {
    Utxo u;
    u.address = chain::output_address(tx.id, static_cast<std::uint32_t>(i));
    u.owner = tx.outputs[i].owner;
    u.value = tx.outputs[i].value;
    u.origin_tx = tx.id;
    insert(std::move(u));
  }
}

std::optional<TxId> ShardLedger::locked_by(const Address& a) const {
  auto it = locks_.find(a);
  if (it == locks_.end()) return std::nullopt;
  return it->second;
}

std::vector<Utxo> ShardLedger::unspent() const {
  std::vector<Utxo> out;
  for (const auto& [a, u] : utxos_) {
    if (u.spent_state == chain::SpentState::unspent) out.push_back(u);
  }
  return out;
}

void ShardLedger::replace(std::vector<Utxo> utxos) {
  utxos_.clear();
  locks_.clear();
  for (auto& u : utxos) insert(std::move(u));
}

std::uint64_t ShardLedger::total_unspent_value() const {
  std::uint64_t sum = 0;
  for (const auto& [a, u] : utxos_) {
    if (u.spent_state != chain::SpentState::spent) sum += u.value;
  }
  return sum;
}

chain::ProofExcerpt make_excerpt(const chain::TxList& list, const chain::TxDecSet& decset, ShardId destination,
                                 std::size_t k) {
  chain::ProofExcerpt ex{list.epoch, list.iteration, list.shard, destination, {}, {}};
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < list.tx_hashes.size(); ++i) {
    if (consensus::output_shard_of(list.tx_hashes[i], k) == destination) {
      positions.push_back(i);
      ex.tx_hashes.push_back(list.tx_hashes[i]);
    }
  }
  for (const auto& d : decset.decs) {
    auto ss = std::find_if(d.subset_sigs.begin(), d.subset_sigs.end(),
                           [&](const chain::SubsetSignature& s) { return s.destination == destination; });
    if (ss == d.subset_sigs.end() || d.decisions.size() != list.tx_hashes.size()) continue;
    chain::ExcerptVote v{d.voter, {}, ss->sig};
    for (auto p : positions) v.decisions.push_back(d.decisions[p]);
    ex.votes.push_back(std::move(v));
  }
  return ex;
}

std::optional<std::vector<reputation::Outcome>> verify_excerpt(const chain::ProofExcerpt& ex,
                                                               const consensus::Roster& source, std::size_t k,
                                                               const crypto::SignatureScheme& scheme) {
  if (ex.source != source.shard || ex.tx_hashes.empty()) return std::nullopt;
  for (std::size_t i = 0; i < ex.tx_hashes.size(); ++i) {
    if (consensus::output_shard_of(ex.tx_hashes[i], k) != ex.destination) return std::nullopt;
    if (i > 0 && !(ex.tx_hashes[i - 1] < ex.tx_hashes[i])) return std::nullopt;
  }
  std::vector<consensus::Tally> counts(ex.tx_hashes.size());
  for (std::size_t j = 0; j < ex.votes.size(); ++j) {
    const auto& v = ex.votes[j];
    if (j > 0 && !(ex.votes[j - 1].voter < v.voter)) return std::nullopt;
    const crypto::PublicKey* key = source.key_of(v.voter);
    if (!key || v.decisions.size() != ex.tx_hashes.size()) return std::nullopt;
    const Bytes msg = chain::subset_signing_bytes(ex.epoch, ex.iteration, ex.source, ex.destination, v.voter,
                                                  ex.tx_hashes, v.decisions);
    if (!scheme.verify(*key, msg, v.subset_sig)) return std::nullopt;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (v.decisions[i] == chain::Decision::yes) ++counts[i].yes;
      if (v.decisions[i] == chain::Decision::no) ++counts[i].no;
    }
  }
  std::vector<reputation::Outcome> out;
  for (const auto& c : counts) out.push_back(reputation::outcome_of(c.yes, c.no, source.size()));
  return out;
}

void CrossTxState::record(ShardId source, reputation::Outcome verdict) {
  if (verdict == reputation::Outcome::undecided) return;
  // A Reject is final; an Accept never overrides it.
  auto [it, fresh] = proofs.emplace(source, verdict);
  if (!fresh && verdict == reputation::Outcome::rejected) it->second = verdict;
}

Action resolve(const CrossTxState& state) {
  if (state.resolution != Resolution::pending) return Action::wait;
  const auto foreign = state.route.foreign_inputs();
  bool all = true;
  for (auto s : foreign) {
    auto it = state.proofs.find(s);
    if (it != state.proofs.end() && it->second == reputation::Outcome::rejected) return Action::abort;
    all = all && it != state.proofs.end() && it->second == reputation::Outcome::included;
  }
  return all ? Action::propose_commit : Action::wait;
}

}  // namespace repchain::cross
