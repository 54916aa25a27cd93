#include "repchain/consensus/engine.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "repchain/crypto/cosign.hpp"

namespace repchain::consensus {
namespace {

// Positions of each non-empty output cell, ascending destination.
std::map<ShardId, std::vector<std::size_t>> cells_of(const TxList& list, std::size_t k) {
  std::map<ShardId, std::vector<std::size_t>> cells;
  for (std::size_t i = 0; i < list.tx_hashes.size(); ++i) {
    cells[output_shard_of(list.tx_hashes[i], k)].push_back(i);
  }
  return cells;
}

Bytes cell_bytes(const TxList& list, ValidatorId voter, ShardId dest, const std::vector<std::size_t>& positions,
                 const std::vector<Decision>& decisions) {
  std::vector<TxId> hashes;
  std::vector<Decision> decs;
  for (auto p : positions) {
    hashes.push_back(list.tx_hashes[p]);
    decs.push_back(decisions[p]);
  }
  return chain::subset_signing_bytes(list.epoch, list.iteration, list.shard, dest, voter, hashes, decs);
}

bool same_header(const TxList& list, Epoch e, Iteration i, ShardId s) {
  return list.epoch == e && list.iteration == i && list.shard == s;
}

}  // namespace

std::optional<std::size_t> Roster::index_of(ValidatorId v) const {
  auto it = std::lower_bound(members.begin(), members.end(), v);
  if (it == members.end() || *it != v) return std::nullopt;
  return static_cast<std::size_t>(it - members.begin());
}

const PublicKey* Roster::key_of(ValidatorId v) const {
  auto i = index_of(v);
  return i ? &keys[*i] : nullptr;
}

ShardId output_shard_of(const TxId& id, std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  return static_cast<ShardId>(low64(id) % k);
}

TxList propose_txlist(Epoch epoch, Iteration iteration, ShardId shard, std::span<const TxId> candidates,
                      std::size_t capacity, const Signer& leader, const SignatureScheme& scheme) {
  TxList list{epoch, iteration, shard, {}, {}};
  const std::size_t take = std::min(capacity, candidates.size());
  list.tx_hashes.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
  std::sort(list.tx_hashes.begin(), list.tx_hashes.end());
  list.tx_hashes.erase(std::unique(list.tx_hashes.begin(), list.tx_hashes.end()), list.tx_hashes.end());
  list.leader_sig = scheme.sign(*leader.key, chain::signing_bytes(list));
  return list;
}

bool verify_txlist(const TxList& list, const PublicKey& leader, const SignatureScheme& scheme) {
  for (std::size_t i = 1; i < list.tx_hashes.size(); ++i) {
    if (!(list.tx_hashes[i - 1] < list.tx_hashes[i])) return false;
  }
  return scheme.verify(leader, chain::signing_bytes(list), list.leader_sig);
}

TxDec sign_decisions(const TxList& list, std::vector<Decision> decisions, std::size_t k, const Signer& voter,
                     const SignatureScheme& scheme) {
  if (decisions.size() != list.tx_hashes.size()) throw std::invalid_argument("one decision per listed transaction");
  TxDec dec{list.epoch, list.iteration, list.shard, voter.id, std::move(decisions), {}, {}};
  for (const auto& [dest, positions] : cells_of(list, k)) {
    dec.subset_sigs.push_back({dest, scheme.sign(*voter.key, cell_bytes(list, voter.id, dest, positions, dec.decisions))});
  }
  dec.sig = scheme.sign(*voter.key, chain::signing_bytes(dec));
  return dec;
}

TxDec vote(const TxList& list, std::span<const Transaction* const> txs, const TxCheck& check,
           chain::ValidationBudget& budget, std::span<const std::size_t> order, std::size_t k, const Signer& voter,
           const SignatureScheme& scheme) {
  const std::size_t n = list.tx_hashes.size();
  if (txs.size() != n) throw std::invalid_argument("transaction contents must align with the list");
  std::vector<Decision> decisions(n, Decision::unknown);

  std::vector<std::size_t> positional;
  if (order.empty()) {
    positional.resize(n);
    std::iota(positional.begin(), positional.end(), 0);
    order = positional;
  }
  for (auto p : order) {
    if (p >= n) throw std::invalid_argument("validation order names a position outside the list");
    const Transaction* tx = txs[p];
    if (!tx || tx->id != list.tx_hashes[p]) continue;
    decisions[p] = check(*tx, budget);
  }

  // Earlier position wins an in-list double spend.
  std::set<chain::Address> claimed;
  for (std::size_t p = 0; p < n; ++p) {
    if (decisions[p] != Decision::yes) continue;
    bool clash = false;
    for (const auto& in : txs[p]->inputs) clash = clash || claimed.count(in.utxo) != 0;
    if (clash) {
      decisions[p] = Decision::no;
      continue;
    }
    for (const auto& in : txs[p]->inputs) claimed.insert(in.utxo);
  }
  return sign_decisions(list, std::move(decisions), k, voter, scheme);
}

bool verify_txdec(const TxDec& dec, const TxList& list, const PublicKey& voter_key, std::size_t k,
                  const SignatureScheme& scheme) {
  if (!same_header(list, dec.epoch, dec.iteration, dec.shard)) return false;
  if (dec.decisions.size() != list.tx_hashes.size()) return false;
  const auto cells = cells_of(list, k);
  if (dec.subset_sigs.size() != cells.size()) return false;
  std::size_t i = 0;
  for (const auto& [dest, positions] : cells) {
    const auto& ss = dec.subset_sigs[i++];
    if (ss.destination != dest) return false;
    if (!scheme.verify(voter_key, cell_bytes(list, dec.voter, dest, positions, dec.decisions), ss.sig)) return false;
  }
  return scheme.verify(voter_key, chain::signing_bytes(dec), dec.sig);
}

std::vector<Tally> tally(const TxList& list, std::span<const TxDec> decs) {
  std::vector<Tally> out(list.tx_hashes.size());
  for (const auto& d : decs) {
    if (d.decisions.size() != out.size()) continue;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (d.decisions[i] == Decision::yes) ++out[i].yes;
      if (d.decisions[i] == Decision::no) ++out[i].no;
    }
  }
  return out;
}

BlockPair build_block(const TxList& list, std::span<const Transaction* const> txs, std::vector<TxDec> decs,
                      std::size_t m, const Hash& prev_tb_hash, const CommitsHere& commits_here,
                      const Signer& leader, const SignatureScheme& scheme) {
  if (txs.size() != list.tx_hashes.size()) throw std::invalid_argument("transaction contents must align with the list");
  std::sort(decs.begin(), decs.end(), [](const TxDec& a, const TxDec& b) { return a.voter < b.voter; });
  decs.erase(std::unique(decs.begin(), decs.end(), [](const TxDec& a, const TxDec& b) { return a.voter == b.voter; }),
             decs.end());

  BlockPair out;
  out.tb = {list.epoch, list.iteration, list.shard, prev_tb_hash, {}, {}};
  const auto counts = tally(list, decs);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (2 * counts[i].yes <= m) continue;
    if (commits_here && !commits_here(list.tx_hashes[i])) continue;
    if (!txs[i]) throw std::invalid_argument("leader lacks the contents of an included transaction");
    out.tb.txs.push_back(*txs[i]);
  }
  out.tb.leader_sig = scheme.sign(*leader.key, chain::signing_bytes(out.tb));
  out.decset = {list.epoch, list.iteration, list.shard, std::move(decs), {}};
  out.decset.leader_sig = scheme.sign(*leader.key, chain::signing_bytes(out.decset));
  return out;
}

std::string_view to_string(WarningReason r) {
  switch (r) {
    case WarningReason::none: return "none";
    case WarningReason::missing_txdec: return "missing_txdec";
    case WarningReason::altered_txdec: return "altered_txdec";
    case WarningReason::unsupported_tx: return "unsupported_tx";
    case WarningReason::omitted_tx: return "omitted_tx";
    case WarningReason::bad_signature: return "bad_signature";
    case WarningReason::leader_timeout: return "leader_timeout";
    case WarningReason::bad_chain_link: return "bad_chain_link";
  }
  return "unknown";
}

WarningReason verify_block(const VerifyContext& ctx, const chain::TransactionBlock& tb, const TxDecSet& decset,
                           const SignatureScheme& scheme) {
  const TxList& list = *ctx.list;
  const Roster& roster = *ctx.roster;
  if (!same_header(list, tb.epoch, tb.iteration, tb.shard) ||
      !same_header(list, decset.epoch, decset.iteration, decset.shard)) {
    return WarningReason::bad_signature;
  }
  const bool leader_ok =
      ctx.verify_leader ? ctx.verify_leader(tb, decset)
                        : scheme.verify(*ctx.leader_key, chain::signing_bytes(tb), tb.leader_sig) &&
                              scheme.verify(*ctx.leader_key, chain::signing_bytes(decset), decset.leader_sig);
  if (!leader_ok) return WarningReason::bad_signature;
  if (tb.prev_tb_hash != ctx.expected_prev) return WarningReason::bad_chain_link;

  for (std::size_t i = 0; i < decset.decs.size(); ++i) {
    const TxDec& d = decset.decs[i];
    if (i > 0 && !(decset.decs[i - 1].voter < d.voter)) return WarningReason::bad_signature;
    const PublicKey* key = roster.key_of(d.voter);
    if (!key) return WarningReason::bad_signature;
    const bool ok = ctx.verify_dec ? ctx.verify_dec(d, *key) : verify_txdec(d, list, *key, ctx.k, scheme);
    if (!ok) return d.voter == ctx.self ? WarningReason::altered_txdec : WarningReason::bad_signature;
  }

  if (ctx.own_dec) {
    auto it = std::find_if(decset.decs.begin(), decset.decs.end(),
                           [&](const TxDec& d) { return d.voter == ctx.self; });
    if (it == decset.decs.end()) return WarningReason::missing_txdec;
    if (!(*it == *ctx.own_dec)) return WarningReason::altered_txdec;
  }

  const auto counts = tally(list, decset.decs);
  const std::size_t m = roster.size();
  std::vector<std::size_t> expected;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (2 * counts[i].yes > m && (!ctx.commits_here || ctx.commits_here(list.tx_hashes[i]))) expected.push_back(i);
  }

  std::size_t next = 0;
  for (const auto& tx : tb.txs) {
    if (next < expected.size() && tx.id == list.tx_hashes[expected[next]]) {
      const std::size_t p = expected[next++];
      const Transaction* known = p < ctx.txs.size() ? ctx.txs[p] : nullptr;
      const bool genuine = known ? tx == *known : chain::tx_id(tx) == tx.id;
      if (!genuine) return WarningReason::unsupported_tx;
      continue;
    }
    const bool later = std::any_of(expected.begin() + static_cast<std::ptrdiff_t>(next), expected.end(),
                                   [&](std::size_t p) { return list.tx_hashes[p] == tx.id; });
    return later ? WarningReason::omitted_tx : WarningReason::unsupported_tx;
  }
  if (next != expected.size()) return WarningReason::omitted_tx;
  return WarningReason::none;
}

chain::Warning make_warning(Epoch epoch, Iteration iteration, ShardId shard, WarningReason reason,
                            const Signer& sender, const SignatureScheme& scheme) {
  chain::Warning w{epoch, iteration, shard, sender.id, static_cast<std::uint8_t>(reason), {}};
  w.sig = scheme.sign(*sender.key, chain::signing_bytes(w));
  return w;
}

TallyResult tally_warnings(std::span<const chain::Warning> warnings, const Roster& roster, Epoch epoch,
                           Iteration iteration, const SignatureScheme& scheme) {
  std::set<ValidatorId> senders;
  for (const auto& w : warnings) {
    if (w.epoch != epoch || w.iteration != iteration || w.shard != roster.shard) continue;
    const PublicKey* key = roster.key_of(w.sender);
    if (!key || !scheme.verify(*key, chain::signing_bytes(w), w.sig)) continue;
    senders.insert(w.sender);
  }
  const std::size_t need = (roster.size() + 1) / 2;
  return senders.size() >= need ? TallyResult::roll : TallyResult::proceed;
}

reputation::ScoreMap compute_score_deltas(const Roster& roster, std::span<const ScoredIteration> iterations,
                                          const reputation::ScoringPolicy& policy) {
  reputation::ScoreMap out;
  for (auto v : roster.members) out[v] = {};
  const std::size_t m = roster.size();
  for (const auto& it : iterations) {
    const auto& decs = it.decset->decs;
    std::vector<reputation::Outcome> outcomes(it.values.size(), reputation::Outcome::undecided);
    std::vector<Tally> counts(it.values.size());
    for (const auto& d : decs) {
      if (d.decisions.size() != counts.size()) continue;
      for (std::size_t i = 0; i < counts.size(); ++i) {
        if (d.decisions[i] == Decision::yes) ++counts[i].yes;
        if (d.decisions[i] == Decision::no) ++counts[i].no;
      }
    }
    for (std::size_t i = 0; i < counts.size(); ++i) outcomes[i] = reputation::outcome_of(counts[i].yes, counts[i].no, m);
    for (const auto& d : decs) {
      auto slot = out.find(d.voter);
      if (slot == out.end() || d.decisions.size() != counts.size()) continue;
      slot->second += reputation::score_delta(d.decisions, outcomes, it.values, policy);
    }
  }
  return out;
}

chain::ReputationBlock reputation_block_body(Epoch epoch, ShardId shard, const Hash& prev_rb_hash,
                                             std::vector<Hash> confirmed_tb_hashes, reputation::ScoreMap deltas,
                                             std::optional<std::vector<Hash>> prev_state_block_hashes) {
  chain::ReputationBlock rb;
  rb.epoch = epoch;
  rb.shard = shard;
  rb.prev_rb_hash = prev_rb_hash;
  rb.confirmed_tb_hashes = std::move(confirmed_tb_hashes);
  rb.score_deltas = std::move(deltas);
  rb.prev_state_block_hashes = std::move(prev_state_block_hashes);
  return rb;
}

chain::ReputationBlock build_reputation_block(chain::ReputationBlock body, const Roster& roster,
                                              std::span<const Signer> participants, const SignatureScheme& scheme) {
  std::vector<crypto::CosignParticipant> ps;
  for (const auto& s : participants) {
    auto i = roster.index_of(s.id);
    if (!i) throw std::invalid_argument("cosigner outside the roster");
    ps.push_back({*i, s.key});
  }
  body.cosig = crypto::cosign(scheme, roster.keys, ps, chain::signing_bytes(body));
  return body;
}

bool verify_reputation_block(const chain::ReputationBlock& rb, const Roster& roster, const SignatureScheme& scheme) {
  if (rb.shard != roster.shard || rb.score_deltas.size() != roster.size()) return false;
  for (auto v : roster.members) {
    if (!rb.score_deltas.count(v)) return false;
  }
  return crypto::cosign_verify(scheme, roster.keys, chain::signing_bytes(rb), rb.cosig);
}

}  // namespace repchain::consensus
