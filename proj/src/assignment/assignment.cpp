#include "repchain/assignment/assignment.hpp"

#include <algorithm>
#include <limits>

namespace repchain::assignment {
namespace {

Score score_of(const ScoreMap& scores, ValidatorId v) {
  auto it = scores.find(v);
  return it == scores.end() ? Score{} : it->second;
}

}  // namespace

std::vector<std::vector<ValidatorId>> assign_shards(crypto::SeededRng& rng, const ScoreMap& scores,
                                                    std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (k > scores.size()) throw std::invalid_argument("k must not exceed the number of validators");

  std::vector<std::pair<Score, ValidatorId>> order;
  for (const auto& [v, s] : scores) order.emplace_back(s, v);
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  std::vector<std::vector<ValidatorId>> shards(k);
  std::vector<std::size_t> smallest;
  for (const auto& [score, v] : order) {
    std::size_t min_size = shards[0].size();
    for (const auto& s : shards) min_size = std::min(min_size, s.size());
    smallest.clear();
    for (std::size_t t = 0; t < k; ++t)
      if (shards[t].size() == min_size) smallest.push_back(t);
    const auto u = rng.next_int(smallest.size());
    shards[smallest[u]].push_back(v);
  }
  for (auto& s : shards) std::sort(s.begin(), s.end());
  return shards;
}

Score lower_median(std::span<const ValidatorId> members, const ScoreMap& scores) {
  if (members.empty()) throw std::invalid_argument("empty shard");
  std::vector<Score> sorted;
  for (auto v : members) sorted.push_back(score_of(scores, v));
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];
}

ValidatorId select_leader(std::span<const ValidatorId> members, const ScoreMap& scores, crypto::SeededRng& rng) {
  if (members.empty()) throw ShardFailure("cannot select a leader for an empty shard");
  std::vector<ValidatorId> ordered(members.begin(), members.end());
  std::sort(ordered.begin(), ordered.end());
  const Score median = lower_median(ordered, scores);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double best = kInf;
  ValidatorId winner = ordered.front();
  bool any_positive = false;
  for (auto v : ordered) {
    const double y = rng.next_unit();
    const Score s = score_of(scores, v);
    if (s < median || !s.is_positive()) continue;
    any_positive = true;
    const double p = y / s.to_double();
    if (p < best) {
      best = p;
      winner = v;
    }
  }
  if (!any_positive) winner = ordered[rng.next_int(ordered.size())];
  return winner;
}

ValidatorId reselect_leader(std::span<const ValidatorId> members, const std::set<ValidatorId>& kicked,
                            const ScoreMap& scores, crypto::SeededRng& rng) {
  std::vector<ValidatorId> survivors;
  for (auto v : members)
    if (!kicked.count(v)) survivors.push_back(v);
  if (survivors.empty()) throw ShardFailure("every member of the shard has been kicked");
  return select_leader(survivors, scores, rng);
}

AssignmentResult assign_epoch(const crypto::Seed& seed, const ScoreMap& scores, std::size_t k) {
  crypto::SeededRng rng(seed);
  AssignmentResult r;
  r.seed = seed;
  r.shards = assign_shards(rng, scores, k);
  for (const auto& shard : r.shards) r.leaders.push_back(select_leader(shard, scores, rng));
  return r;
}

}  // namespace repchain::assignment
