#include "repchain/epoch/epoch_sync.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>

#include "repchain/chain/encoding.hpp"
#include "repchain/crypto/cosign.hpp"
#include "repchain/crypto/pow.hpp"

namespace repchain::epoch {

std::vector<Utxo> consolidate_utxos(std::vector<Utxo> unspent) {
  std::sort(unspent.begin(), unspent.end(), [](const Utxo& a, const Utxo& b) { return a.address < b.address; });
  std::map<crypto::PublicKey, std::size_t> first;  // owner -> index into out
  std::vector<Utxo> out;
  for (auto& u : unspent) {
    if (u.spent_state != chain::SpentState::unspent) throw std::invalid_argument("only unspent UTXOs consolidate");
    auto [it, fresh] = first.emplace(u.owner, out.size());
    if (fresh) {
      out.push_back(std::move(u));
      continue;
    }
    Utxo& keep = out[it->second];
    if (keep.value > UINT64_MAX - u.value) throw std::overflow_error("consolidated value overflows");
    keep.value += u.value;
  }
  return out;
}

StateBlock state_block_body(chain::Epoch epoch, chain::ShardId shard, reputation::ScoreMap cumulative_scores,
                            std::vector<Utxo> consolidated) {
  StateBlock sb;
  sb.epoch = epoch;
  sb.shard = shard;
  sb.cumulative_scores = std::move(cumulative_scores);
  sb.utxo_set = std::move(consolidated);
  return sb;
}

StateBlock seal_state_block(StateBlock body, const consensus::Roster& roster,
                            std::span<const consensus::Signer> participants, int difficulty,
                            const crypto::SignatureScheme& scheme) {
  std::vector<crypto::CosignParticipant> ps;
  for (const auto& s : participants) {
    auto i = roster.index_of(s.id);
    if (!i) throw std::invalid_argument("cosigner outside the roster");
    ps.push_back({*i, s.key});
  }
  body.cosig = crypto::cosign(scheme, roster.keys, ps, chain::signing_bytes(body));
  body.pow_nonce = crypto::pow_solve(chain::sealed_body_hash(body), difficulty);
  return body;
}

bool verify_state_block(const StateBlock& sb, const consensus::Roster& roster, int difficulty,
                        const crypto::SignatureScheme& scheme) {
  if (sb.shard != roster.shard) return false;
  std::set<crypto::PublicKey> owners;
  for (std::size_t i = 0; i < sb.utxo_set.size(); ++i) {
    if (i > 0 && !(sb.utxo_set[i - 1].address < sb.utxo_set[i].address)) return false;
    if (!owners.insert(sb.utxo_set[i].owner).second) return false;
  }
  if (!crypto::cosign_verify(scheme, roster.keys, chain::signing_bytes(sb), sb.cosig)) return false;
  return crypto::pow_verify(chain::sealed_body_hash(sb), sb.pow_nonce, difficulty);
}

SyncResult synchronize(std::span<const StateBlock> blocks, std::span<const consensus::Roster> rosters,
                       std::size_t next_k, int difficulty, const crypto::SignatureScheme& scheme) {
  if (blocks.size() != rosters.size() || blocks.empty()) throw SyncFailure("need one state block per shard");
  SyncResult r;
  for (std::size_t s = 0; s < blocks.size(); ++s) {
    if (blocks[s].shard != s) throw SyncFailure("state blocks must be in shard order");
    if (!verify_state_block(blocks[s], rosters[s], difficulty, scheme)) {
      throw SyncFailure("state block of shard " + std::to_string(s) + " does not verify");
    }
    r.state_block_hashes.push_back(chain::block_hash(blocks[s]));
    for (const auto& [v, score] : blocks[s].cumulative_scores) r.scores[v] = score;
  }
  r.seed = crypto::derive_seed(r.state_block_hashes, kSeedLabel);
  r.assignment = assignment::assign_epoch(r.seed, r.scores, next_k);
  return r;
}

std::string state_block_filename(chain::Epoch epoch, chain::ShardId shard) {
  return "sb_e" + std::to_string(epoch) + "_s" + std::to_string(shard) + ".bin";
}

std::filesystem::path write_state_block(const std::filesystem::path& dir, const StateBlock& sb) {
  std::filesystem::create_directories(dir);
  const auto path = dir / state_block_filename(sb.epoch, sb.shard);
  const Bytes bytes = chain::canonical_encode(sb);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return path;
}

StateBlock read_state_block(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + file.string());
  const Bytes bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return chain::canonical_decode<StateBlock>(bytes);
}

}  // namespace repchain::epoch
