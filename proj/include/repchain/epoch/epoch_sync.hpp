#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "repchain/assignment/assignment.hpp"
#include "repchain/chain/types.hpp"
#include "repchain/consensus/engine.hpp"
#include "repchain/reputation/ledger.hpp"

namespace repchain::epoch {

using chain::StateBlock;
using chain::Utxo;

inline constexpr int kDefaultPowDifficulty = 12;
inline constexpr std::string_view kSeedLabel = "repchain-epoch-seed";

/// Merges each owner's UTXOs into one: smallest address (and its origin)
/// kept, values summed. Input must be unspent entries only. Output is
/// ascending by address.
std::vector<Utxo> consolidate_utxos(std::vector<Utxo> unspent);

StateBlock state_block_body(chain::Epoch epoch, chain::ShardId shard, reputation::ScoreMap cumulative_scores,
                            std::vector<Utxo> consolidated);

/// Collective signature by `participants`, then the PoW nonce over the
/// signed body.
StateBlock seal_state_block(StateBlock body, const consensus::Roster& roster,
                            std::span<const consensus::Signer> participants, int difficulty,
                            const crypto::SignatureScheme& scheme);

/// Cosignature (strict majority), PoW, ascending addresses and at most one
/// UTXO per owner.
bool verify_state_block(const StateBlock& sb, const consensus::Roster& roster, int difficulty,
                        const crypto::SignatureScheme& scheme);

struct SyncFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyncResult {
  std::vector<Hash> state_block_hashes;  // shard order
  crypto::Seed seed{};
  reputation::ScoreMap scores;
  assignment::AssignmentResult assignment;
};

/// Verifies the k state blocks (shard order) against the rosters that
/// signed them, derives the next seed from their hashes, merges the score
/// maps and runs the epoch assignment for `next_k` shards.
SyncResult synchronize(std::span<const StateBlock> blocks, std::span<const consensus::Roster> rosters,
                       std::size_t next_k, int difficulty, const crypto::SignatureScheme& scheme);

std::string state_block_filename(chain::Epoch epoch, chain::ShardId shard);
/// Canonical bytes of the block, one file per (epoch, shard).
std::filesystem::path write_state_block(const std::filesystem::path& dir, const StateBlock& sb);
StateBlock read_state_block(const std::filesystem::path& file);

}  // namespace repchain::epoch
