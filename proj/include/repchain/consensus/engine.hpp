#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "repchain/chain/types.hpp"
#include "repchain/chain/validation.hpp"
#include "repchain/crypto/signature.hpp"
#include "repchain/reputation/ledger.hpp"

namespace repchain::consensus {

using chain::Decision;
using chain::Epoch;
using chain::Iteration;
using chain::ShardId;
using chain::Transaction;
using chain::TxDec;
using chain::TxDecSet;
using chain::TxId;
using chain::TxList;
using chain::ValidatorId;
using crypto::KeyPair;
using crypto::PublicKey;
using crypto::SignatureScheme;

/// Shard membership for one epoch, ascending id, with aligned public keys.
struct Roster {
  ShardId shard = 0;
  std::vector<ValidatorId> members;
  std::vector<PublicKey> keys;

  std::size_t size() const { return members.size(); }
  std::optional<std::size_t> index_of(ValidatorId v) const;
  const PublicKey* key_of(ValidatorId v) const;
};

struct Signer {
  ValidatorId id;
  const KeyPair* key = nullptr;
};

/// Output shard of a transaction id: low 64 bits mod k.
ShardId output_shard_of(const TxId& id, std::size_t k);

/// TxList of the first `capacity` candidates (already in priority order),
/// sorted ascending and signed by the leader.
TxList propose_txlist(Epoch epoch, Iteration iteration, ShardId shard, std::span<const TxId> candidates,
                      std::size_t capacity, const Signer& leader, const SignatureScheme& scheme);

/// Leader signature valid and hashes strictly ascending.
bool verify_txlist(const TxList& list, const PublicKey& leader, const SignatureScheme& scheme);

/// Full validity check for one entry, consuming budget as it goes.
using TxCheck = std::function<Decision(const Transaction&, chain::ValidationBudget&)>;

/// Member vote on a TxList. Entries are validated in `order` (positions;
/// empty means positional) until the budget runs out; the rest are Unknown.
/// Missing transaction contents (nullptr) are Unknown. Then, in positional
/// order, a Yes whose inputs overlap an earlier Yes in the list becomes No.
/// One subset signature per non-empty output-shard cell plus the overall
/// signature.
TxDec vote(const TxList& list, std::span<const Transaction* const> txs, const TxCheck& check,
           chain::ValidationBudget& budget, std::span<const std::size_t> order, std::size_t k, const Signer& voter,
           const SignatureScheme& scheme);

/// Signs already-decided votes (used by adversarial members that choose
/// their decisions directly).
TxDec sign_decisions(const TxList& list, std::vector<Decision> decisions, std::size_t k, const Signer& voter,
                     const SignatureScheme& scheme);

/// Decisions cover the list, subset cells are exactly the non-empty output
/// cells, and every signature verifies against `voter_key`.
bool verify_txdec(const TxDec& dec, const TxList& list, const PublicKey& voter_key, std::size_t k,
                  const SignatureScheme& scheme);

struct Tally {
  std::size_t yes = 0;
  std::size_t no = 0;
};

/// Per-position Yes/No counts over the given decisions.
std::vector<Tally> tally(const TxList& list, std::span<const TxDec> decs);

/// Whether an entry that reached a Yes majority belongs in this shard's TB.
/// Lock entries of cross-shard transactions never do.
using CommitsHere = std::function<bool(const TxId&)>;

struct BlockPair {
  chain::TransactionBlock tb;
  TxDecSet decset;
};

/// TB with exactly the committing entries whose Yes count exceeds m/2, in
/// list order, plus the TxDecSet of all received TxDecs (one per voter,
/// ascending voter id). Absent members count as neither Yes nor No.
BlockPair build_block(const TxList& list, std::span<const Transaction* const> txs, std::vector<TxDec> decs,
                      std::size_t m, const Hash& prev_tb_hash, const CommitsHere& commits_here,
                      const Signer& leader, const SignatureScheme& scheme);

enum class WarningReason : std::uint8_t {
  none = 0,
  missing_txdec = 1,
  altered_txdec = 2,
  unsupported_tx = 3,
  omitted_tx = 4,
  bad_signature = 5,
  leader_timeout = 6,
  bad_chain_link = 7,
};

std::string_view to_string(WarningReason r);

struct VerifyContext {
  const TxList* list = nullptr;
  /// Contents the member holds for the listed hashes (nullptr if unknown).
  std::span<const Transaction* const> txs;
  const TxDec* own_dec = nullptr;  // nullptr if the member did not vote
  ValidatorId self;
  const Roster* roster = nullptr;
  const PublicKey* leader_key = nullptr;
  Hash expected_prev{};
  std::size_t k = 1;
  CommitsHere commits_here;
  /// Signature checks on the contained TxDecs, so callers can cache them.
  std::function<bool(const TxDec&, const PublicKey&)> verify_dec;
  /// Same for the leader's signatures on the TB and the TxDecSet.
  std::function<bool(const chain::TransactionBlock&, const TxDecSet&)> verify_leader;
};

/// none means Accept.
WarningReason verify_block(const VerifyContext& ctx, const chain::TransactionBlock& tb, const TxDecSet& decset,
                           const SignatureScheme& scheme);

chain::Warning make_warning(Epoch epoch, Iteration iteration, ShardId shard, WarningReason reason,
                            const Signer& sender, const SignatureScheme& scheme);

enum class TallyResult { proceed, roll };

/// Roll iff at least ceil(m/2) distinct roster members sent a correctly
/// signed Warning for this (epoch, iteration, shard).
TallyResult tally_warnings(std::span<const chain::Warning> warnings, const Roster& roster, Epoch epoch,
                           Iteration iteration, const SignatureScheme& scheme);

/// Inputs of one confirmed TB for scoring: its TxDecSet and the value of
/// every listed transaction (positionally aligned with the TxList).
struct ScoredIteration {
  const TxDecSet* decset = nullptr;
  std::vector<std::uint64_t> values;
};

/// Score earned by every roster member over the given iterations. Members
/// without a TxDec in an iteration earn nothing from it.
reputation::ScoreMap compute_score_deltas(const Roster& roster, std::span<const ScoredIteration> iterations,
                                          const reputation::ScoringPolicy& policy);

/// Unsigned RB body; the caller runs the collective signing.
chain::ReputationBlock reputation_block_body(Epoch epoch, ShardId shard, const Hash& prev_rb_hash,
                                             std::vector<Hash> confirmed_tb_hashes, reputation::ScoreMap deltas,
                                             std::optional<std::vector<Hash>> prev_state_block_hashes);

/// Body plus an in-process collective signature by `participants`.
chain::ReputationBlock build_reputation_block(chain::ReputationBlock body, const Roster& roster,
                                              std::span<const Signer> participants, const SignatureScheme& scheme);

/// Collective signature verifies with more than m/2 signers and the deltas
/// name exactly the roster.
bool verify_reputation_block(const chain::ReputationBlock& rb, const Roster& roster, const SignatureScheme& scheme);

}  // namespace repchain::consensus
