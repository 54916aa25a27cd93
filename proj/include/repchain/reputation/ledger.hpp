#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "repchain/chain/types.hpp"

namespace repchain::reputation {

using chain::Decision;
using chain::Epoch;
using chain::Score;
using chain::ValidatorId;
using ScoreMap = std::map<ValidatorId, Score>;

struct ScoringPolicy {
  Score correct = Score::parse("0.1");
  Score unknown = Score::parse("0");
  Score wrong_no = Score::parse("-0.5");
  Score wrong_yes = Score::parse("-1");

  /// wrong_yes <= wrong_no <= unknown <= correct and
  /// |wrong_yes| >= |wrong_no| >= correct.
  bool valid() const;
};

/// The shard's verdict on one proposed transaction, which all members can
/// compute identically from the TxDecSet.
enum class Outcome : std::uint8_t {
  included,   // more than m/2 Yes
  rejected,   // more than m/2 No
  undecided,  // neither; the transaction stays in the mempool
};

/// Majority verdict from the Yes and No counts among the m members.
Outcome outcome_of(std::size_t yes, std::size_t no, std::size_t m);

/// Sum over transactions of S(decision vs outcome) * T, where T is the
/// transaction value. Yes on included and No on rejected earn `correct`;
/// Yes on rejected earns `wrong_yes`, No on included earns `wrong_no`;
/// Unknown and undecided transactions earn nothing.
Score score_delta(std::span<const Decision> decisions, std::span<const Outcome> outcomes,
                  std::span<const std::uint64_t> values, const ScoringPolicy& policy = {});

/// Scores earned in one epoch, kept per reputation block.
class EpochScoreBook {
 public:
  explicit EpochScoreBook(Epoch epoch = 0) : epoch_(epoch) {}

  Epoch epoch() const { return epoch_; }
  /// Adds one reputation block's deltas.
  void add_block(const ScoreMap& deltas);
  /// Rolling: the leader's score for this epoch restarts from 0 and its
  /// earlier epochs no longer count toward the window.
  void apply_rolling_penalty(ValidatorId leader);

  Score earned(ValidatorId v) const;
  bool rolled(ValidatorId v) const { return rolled_.count(v) != 0; }
  const ScoreMap& earned() const { return earned_; }
  const std::set<ValidatorId>& rolled() const { return rolled_; }
  const std::vector<ScoreMap>& blocks() const { return blocks_; }

 private:
  Epoch epoch_;
  ScoreMap earned_;
  std::set<ValidatorId> rolled_;
  std::vector<ScoreMap> blocks_;
};

/// Closed epoch books, oldest first.
class ReputationHistory {
 public:
  void close_epoch(EpochScoreBook book);
  const std::map<Epoch, EpochScoreBook>& epochs() const { return epochs_; }

 private:
  std::map<Epoch, EpochScoreBook> epochs_;
};

/// Sum of earned scores over epochs current-w+1 .. current. A rolling in
/// epoch r discards everything the validator earned before r. `open` is the
/// in-progress book for `current`, if that epoch is not closed yet.
ScoreMap cumulative_scores(const ReputationHistory& history, std::uint64_t w, Epoch current,
                           const EpochScoreBook* open = nullptr);

/// Fee split in micro-units: the leader takes half (the odd micro-unit
/// included); the other half is split among the remaining members in
/// proportion to max(epoch score, 0) with largest-remainder rounding
/// (ties to the lower id), or equally when no member has a positive score.
std::map<ValidatorId, std::uint64_t> allocate_rewards(std::uint64_t fee_micros, ValidatorId leader,
                                                      const ScoreMap& member_scores);

/// validator,epoch,delta,cumulative rows for every closed epoch.
std::string export_csv(const ReputationHistory& history, std::uint64_t w);

}  // namespace repchain::reputation
