#include <gtest/gtest.h>

#include <cmath>

#include "repchain/assignment/assignment.hpp"
#include "repchain/crypto/hash.hpp"
#include "stats.hpp"

namespace repchain::assignment {
namespace {

ValidatorId V(std::uint32_t v) { return ValidatorId{v}; }
crypto::Seed seed_of(std::uint64_t i) { return crypto::Sha256().update(as_bytes("assign")).update_u64(i).finish(); }

ScoreMap scores_from(std::vector<double> s) {
  ScoreMap m;
  for (std::size_t i = 0; i < s.size(); ++i)
    m[V(static_cast<std::uint32_t>(i))] = Score::from_micros(std::llround(s[i] * 1e6));
  return m;
}

TEST(AssignShards, SingleShard) {
  crypto::SeededRng rng(seed_of(1));
  const auto shards = assign_shards(rng, scores_from({1, 2, 3, 4, 5}), 1);
  ASSERT_EQ(shards.size(), 1u);
  EXPECT_EQ(shards[0].size(), 5u);
}

TEST(AssignShards, RejectsBadK) {
  crypto::SeededRng rng(seed_of(1));
  EXPECT_THROW(assign_shards(rng, scores_from({1, 2}), 3), std::invalid_argument);
  EXPECT_THROW(assign_shards(rng, scores_from({1, 2}), 0), std::invalid_argument);
}

TEST(AssignShards, BalancedForEverySeed) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    crypto::SeededRng rng(seed_of(s));
    const std::size_t n = 4 + s % 17;
    const std::size_t k = 1 + s % 4;
    std::vector<double> sc;
    for (std::size_t i = 0; i < n; ++i) sc.push_back(static_cast<double>((i * 7 + s) % 5) - 1);
    const auto shards = assign_shards(rng, scores_from(sc), k);
    std::size_t lo = n, hi = 0, total = 0;
    std::set<ValidatorId> seen;
    for (const auto& sh : shards) {
      lo = std::min(lo, sh.size());
      hi = std::max(hi, sh.size());
      total += sh.size();
      seen.insert(sh.begin(), sh.end());
    }
    EXPECT_LE(hi - lo, 1u);
    EXPECT_EQ(total, n);
    EXPECT_EQ(seen.size(), n);
    if (n == 4 && k == 2) EXPECT_EQ(lo, 2u);
  }
}

TEST(AssignEpoch, GoldenVectorsFromIndependentOracle) {
  // tests/oracles/assignment_oracle.py
  const auto r = assign_epoch(kZeroHash, scores_from({4, 3, 2, 1}), 2);
  EXPECT_EQ(r.shards, (std::vector<std::vector<ValidatorId>>{{V(0), V(3)}, {V(1), V(2)}}));
  EXPECT_EQ(r.leaders, (std::vector<ValidatorId>{V(0), V(1)}));

  crypto::Seed s{};
  for (std::size_t i = 0; i < 32; ++i) s[i] = static_cast<std::uint8_t>(i);
  std::vector<double> sc;
  for (int v = 0; v < 12; ++v) sc.push_back(v % 5);
  const auto r2 = assign_epoch(s, scores_from(sc), 3);
  EXPECT_EQ(r2.shards, (std::vector<std::vector<ValidatorId>>{
                           {V(1), V(4), V(5), V(8)}, {V(0), V(3), V(6), V(7)}, {V(2), V(9), V(10), V(11)}}));
  EXPECT_EQ(r2.leaders, (std::vector<ValidatorId>{V(4), V(3), V(2)}));
}

TEST(AssignEpoch, Deterministic) {
  const auto sc = scores_from({5, 1, 3, 3, 2, 0, -1, 4});
  EXPECT_EQ(assign_epoch(seed_of(9), sc, 2), assign_epoch(seed_of(9), sc, 2));
  EXPECT_NE(assign_epoch(seed_of(9), sc, 2).shards, assign_epoch(seed_of(10), sc, 2).shards);
}

TEST(AssignEpoch, LeadersMeetTheMedian) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    std::vector<double> sc;
    for (int i = 0; i < 12; ++i) sc.push_back(static_cast<double>((i * 13 + s * 7) % 11) / 2 - 1);
    const auto scores = scores_from(sc);
    const auto r = assign_epoch(seed_of(s), scores, 3);
    for (std::size_t t = 0; t < 3; ++t) {
      EXPECT_GE(scores.at(r.leaders[t]), lower_median(r.shards[t], scores));
      EXPECT_TRUE(std::count(r.shards[t].begin(), r.shards[t].end(), r.leaders[t]));
    }
  }
}

TEST(AssignShards, ShardIndexUniformWithEqualScores) {
  std::vector<std::uint64_t> counts(4);
  const auto sc = scores_from(std::vector<double>(16, 1.0));
  for (std::uint64_t s = 0; s < 10000; ++s) {
    crypto::SeededRng rng(seed_of(s));
    const auto shards = assign_shards(rng, sc, 4);
    for (std::size_t t = 0; t < 4; ++t)
      if (std::count(shards[t].begin(), shards[t].end(), V(5))) ++counts[t];
  }
  EXPECT_GT(testing::chi_square_uniform_p(counts), 0.01);
}

TEST(LowerMedian, Index) {
  const auto sc = scores_from({1, 2, 3, 4});
  std::vector<ValidatorId> all{V(0), V(1), V(2), V(3)};
  EXPECT_EQ(lower_median(all, sc), Score::from_units(2));
  std::vector<ValidatorId> three{V(0), V(1), V(3)};
  EXPECT_EQ(lower_median(three, sc), Score::from_units(2));
}

TEST(SelectLeader, EqualScoresUniform) {
  const auto sc = scores_from({2, 2, 2, 2, 2});
  std::vector<ValidatorId> members{V(0), V(1), V(2), V(3), V(4)};
  std::vector<std::uint64_t> counts(5);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    crypto::SeededRng rng(seed_of(static_cast<std::uint64_t>(t)));
    ++counts[select_leader(members, sc, rng).value];
  }
  const double sigma = std::sqrt(trials * 0.2 * 0.8);
  for (auto c : counts) EXPECT_NEAR(static_cast<double>(c), trials * 0.2, 3 * sigma);
}

TEST(SelectLeader, TwoEligibleAnalyticOracle) {
  // Shard of three: scores [2, 1, 0]; lower median = 1, so only the first
  // two are eligible and P(score 2 wins) = 1 - 1/(2*2) = 3/4.
  const auto sc = scores_from({2, 1, 0});
  std::vector<ValidatorId> members{V(0), V(1), V(2)};
  int wins = 0, below = 0;
  for (int t = 0; t < 10000; ++t) {
    crypto::SeededRng rng(seed_of(static_cast<std::uint64_t>(t) + 77));
    const auto l = select_leader(members, sc, rng);
    wins += l == V(0);
    below += l == V(2);
  }
  EXPECT_NEAR(wins / 10000.0, 0.75, 0.02);
  EXPECT_EQ(below, 0);
}

TEST(SelectLeader, DrawsForEveryMember) {
  const auto sc = scores_from({5, 0, 0, 0});
  std::vector<ValidatorId> members{V(0), V(1), V(2), V(3)};
  crypto::SeededRng rng(seed_of(3));
  select_leader(members, sc, rng);
  EXPECT_EQ(rng.position(), 4u);
}

TEST(SelectLeader, NonPositiveFallsBackToUniform) {
  const auto sc = scores_from({-1, -1, -3});
  std::vector<ValidatorId> members{V(0), V(1), V(2)};
  std::vector<std::uint64_t> counts(3);
  for (std::uint64_t t = 0; t < 3000; ++t) {
    crypto::SeededRng rng(seed_of(t));
    ++counts[select_leader(members, sc, rng).value];
  }
  EXPECT_GT(testing::chi_square_uniform_p(counts), 0.01);
}

TEST(SelectLeader, MonotoneInScore) {
  // Three eligible members; higher score never selected less often.
  const auto sc = scores_from({1, 2, 4});
  std::vector<ValidatorId> members{V(0), V(1), V(2)};
  std::vector<int> counts(3);
  for (std::uint64_t t = 0; t < 6000; ++t) {
    crypto::SeededRng rng(seed_of(t + 5000));
    ++counts[select_leader(members, sc, rng).value];
  }
  EXPECT_EQ(counts[0], 0);  // below the lower median (2)
  EXPECT_LE(counts[1], counts[2]);
}

TEST(Reselect, KickedLeaderExcluded) {
  const auto sc = scores_from({3, 2, 1});
  std::vector<ValidatorId> members{V(0), V(1), V(2)};
  for (std::uint64_t t = 0; t < 200; ++t) {
    crypto::SeededRng rng(seed_of(t));
    EXPECT_NE(reselect_leader(members, {V(0)}, sc, rng), V(0));
  }
  crypto::SeededRng rng(seed_of(0));
  EXPECT_THROW(reselect_leader(members, {V(0), V(1), V(2)}, sc, rng), ShardFailure);
}

TEST(Reselect, ClearedLeaderNeverReturns) {
  // After rolling the kicked leader's score is 0, below any positive median.
  auto sc = scores_from({3, 2, 1, 4, 5});
  std::vector<ValidatorId> members{V(0), V(1), V(2), V(3), V(4)};
  std::set<ValidatorId> kicked;
  crypto::SeededRng rng(seed_of(11));
  for (int roll = 0; roll < 2; ++roll) {
    const auto leader = reselect_leader(members, kicked, sc, rng);
    EXPECT_FALSE(kicked.count(leader));
    kicked.insert(leader);
    sc[leader] = Score{};
  }
  const auto third = reselect_leader(members, kicked, sc, rng);
  EXPECT_FALSE(kicked.count(third));
  EXPECT_EQ(kicked.size(), 2u);
}

}  // namespace
}  // namespace repchain::assignment
