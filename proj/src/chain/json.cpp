#include "repchain/chain/json.hpp"

namespace repchain::chain {
namespace {

using nlohmann::json;

json hashes(const std::vector<Hash>& v) {
  json out = json::array();
  for (const auto& h : v) out.push_back(to_hex(h));
  return out;
}

json scores(const std::map<ValidatorId, Score>& m) {
  json out = json::object();
  for (const auto& [id, s] : m) out[std::to_string(id.value)] = s.to_string();
  return out;
}

json decisions(const std::vector<Decision>& v) {
  json out = json::array();
  for (auto d : v) out.push_back(std::string(to_string(d)));
  return out;
}

}  // namespace

json to_json(const CollectiveSignature& v) {
  std::string bits;
  for (bool b : v.signers) bits.push_back(b ? '1' : '0');
  return {{"signers", bits}, {"aggregate", to_hex(v.aggregate)}};
}

json to_json(const Utxo& v) {
  return {{"address", to_hex(v.address)},
          {"owner", to_hex(v.owner)},
          {"value", v.value},
          {"origin_tx", to_hex(v.origin_tx)},
          {"spent_state", std::string(to_string(v.spent_state))}};
}

json to_json(const Transaction& v) {
  json ins = json::array();
  for (const auto& in : v.inputs)
    ins.push_back({{"utxo", to_hex(in.utxo)},
                   {"origin_tx", to_hex(in.origin_tx)},
                   {"value", in.value},
                   {"owner_sig", to_hex(in.owner_sig)}});
  json outs = json::array();
  for (const auto& out : v.outputs) outs.push_back({{"owner", to_hex(out.owner)}, {"value", out.value}});
  return {{"id", to_hex(v.id)}, {"inputs", ins}, {"outputs", outs}, {"fee", v.fee}, {"submit_time", v.submit_time}};
}

json to_json(const TxList& v) {
  return {{"epoch", v.epoch},
          {"iteration", v.iteration},
          {"shard", v.shard},
          {"tx_hashes", hashes(v.tx_hashes)},
          {"leader_sig", to_hex(v.leader_sig)}};
}

json to_json(const TxDec& v) {
  json subsets = json::array();
  for (const auto& s : v.subset_sigs) subsets.push_back({{"destination", s.destination}, {"sig", to_hex(s.sig)}});
  return {{"epoch", v.epoch},       {"iteration", v.iteration},
          {"shard", v.shard},       {"voter", v.voter.value},
          {"decisions", decisions(v.decisions)},
          {"subset_sigs", subsets}, {"sig", to_hex(v.sig)}};
}

json to_json(const TxDecSet& v) {
  json decs = json::array();
  for (const auto& d : v.decs) decs.push_back(to_json(d));
  return {{"epoch", v.epoch},
          {"iteration", v.iteration},
          {"shard", v.shard},
          {"decs", decs},
          {"leader_sig", to_hex(v.leader_sig)}};
}

json to_json(const TransactionBlock& v) {
  json txs = json::array();
  for (const auto& t : v.txs) txs.push_back(to_json(t));
  return {{"epoch", v.epoch},
          {"iteration", v.iteration},
          {"shard", v.shard},
          {"prev_tb_hash", to_hex(v.prev_tb_hash)},
          {"txs", txs},
          {"leader_sig", to_hex(v.leader_sig)}};
}

json to_json(const ReputationBlock& v) {
  json out = {{"epoch", v.epoch},
              {"shard", v.shard},
              {"prev_rb_hash", to_hex(v.prev_rb_hash)},
              {"confirmed_tb_hashes", hashes(v.confirmed_tb_hashes)},
              {"score_deltas", scores(v.score_deltas)},
              {"cosig", to_json(v.cosig)}};
  if (v.prev_state_block_hashes) out["prev_state_block_hashes"] = hashes(*v.prev_state_block_hashes);
  return out;
}

json to_json(const StateBlock& v) {
  json utxos = json::array();
  for (const auto& u : v.utxo_set) utxos.push_back(to_json(u));
  return {{"epoch", v.epoch},
          {"shard", v.shard},
          {"cumulative_scores", scores(v.cumulative_scores)},
          {"utxo_set", utxos},
          {"pow_nonce", v.pow_nonce},
          {"cosig", to_json(v.cosig)}};
}

}  // namespace repchain::chain
