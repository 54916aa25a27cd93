#pragma once

#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "repchain/chain/types.hpp"
#include "repchain/crypto/rng.hpp"
#include "repchain/reputation/ledger.hpp"

namespace repchain::assignment {

using chain::Score;
using chain::ValidatorId;
using reputation::ScoreMap;

struct AssignmentResult {
  /// Members of each shard in ascending id order.
  std::vector<std::vector<ValidatorId>> shards;
  std::vector<ValidatorId> leaders;
  crypto::Seed seed{};

  bool operator==(const AssignmentResult&) const = default;
};

struct ShardFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sharding step of the epoch algorithm. Validators are taken in descending
/// score order (ties: ascending id); each goes to the u-th of the currently
/// smallest shards (ascending index), u = rng.next_int(number of smallest).
/// Every validator in `scores` is assigned. Throws if k is 0 or exceeds n.
std::vector<std::vector<ValidatorId>> assign_shards(crypto::SeededRng& rng, const ScoreMap& scores,
                                                    std::size_t k);

/// Lower median of the members' scores: element floor((m-1)/2) of the
/// ascending sort. Missing scores count as 0.
Score lower_median(std::span<const ValidatorId> members, const ScoreMap& scores);

/// Every member (ascending id) draws y = rng.next_unit(). A member is
/// eligible when its score is at least the lower median; an eligible member
/// with a positive score gets p = y / score, everyone else p = infinity. The
/// smallest p wins (ties: lower id). If no eligible member has a positive
/// score the leader is instead drawn uniformly with rng.next_int(m).
ValidatorId select_leader(std::span<const ValidatorId> members, const ScoreMap& scores, crypto::SeededRng& rng);

/// select_leader over members not in `kicked`. Throws ShardFailure when
/// nobody is left.
ValidatorId reselect_leader(std::span<const ValidatorId> members, const std::set<ValidatorId>& kicked,
                            const ScoreMap& scores, crypto::SeededRng& rng);

/// Whole epoch algorithm on one stream: shards first, then one leader per
/// shard in shard order.
AssignmentResult assign_epoch(const crypto::Seed& seed, const ScoreMap& scores, std::size_t k);

}  // namespace repchain::assignment
