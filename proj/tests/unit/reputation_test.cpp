#include <gtest/gtest.h>

#include "repchain/reputation/ledger.hpp"

namespace repchain::reputation {
namespace {

Score S(const char* s) { return Score::parse(s); }
ValidatorId V(std::uint32_t v) { return ValidatorId{v}; }

TEST(Policy, DefaultsAreOrdered) {
  ScoringPolicy p;
  EXPECT_TRUE(p.valid());
  EXPECT_EQ(p.correct.micros(), 100000);
  p.wrong_yes = S("-0.2");
  EXPECT_FALSE(p.valid());
}

TEST(Outcome, MajorityRule) {
  EXPECT_EQ(outcome_of(3, 1, 5), Outcome::included);
  EXPECT_EQ(outcome_of(2, 2, 5), Outcome::undecided);
  EXPECT_EQ(outcome_of(2, 1, 4), Outcome::undecided);
  EXPECT_EQ(outcome_of(1, 3, 5), Outcome::rejected);
}

TEST(ScoreDelta, Examples) {
  using D = Decision;
  using O = Outcome;
  std::vector<D> d{D::yes};
  std::vector<O> o{O::included};
  std::vector<std::uint64_t> t{10};
  EXPECT_EQ(score_delta(d, o, t), S("1"));

  d = {D::unknown};
  EXPECT_EQ(score_delta(d, o, t), S("0"));

  d = {D::yes, D::yes, D::no};
  o = {O::included, O::rejected, O::included};
  t = {10, 2, 4};
  EXPECT_EQ(score_delta(d, o, t), S("-3"));

  d = {D::no, D::yes};
  o = {O::rejected, O::undecided};
  t = {7, 100};
  EXPECT_EQ(score_delta(d, o, t), S("0.7"));
  EXPECT_THROW(score_delta(d, o, std::vector<std::uint64_t>{1}), std::invalid_argument);
}

TEST(ScoreDelta, WrongYesNeverBeatsHonest) {
  // Dominance: changing one decision to a wrong Yes can only lower the score.
  using D = Decision;
  const std::vector<Outcome> o{Outcome::included, Outcome::rejected, Outcome::rejected};
  const std::vector<std::uint64_t> t{3, 5, 8};
  const std::vector<D> honest{D::yes, D::no, D::no};
  for (std::size_t i = 1; i < 3; ++i) {
    auto worse = honest;
    worse[i] = D::yes;
    EXPECT_LT(score_delta(worse, o, t), score_delta(honest, o, t));
  }
}

TEST(Window, Arithmetic) {
  ReputationHistory h;
  for (Epoch e = 1; e <= 12; ++e) {
    EpochScoreBook b(e);
    b.add_block({{V(1), S("1")}});
    h.close_epoch(b);
    if (e == 3) EXPECT_EQ(cumulative_scores(h, 10, 3)[V(1)], S("3"));
  }
  EXPECT_EQ(cumulative_scores(h, 10, 12)[V(1)], S("10"));
  EXPECT_THROW(h.close_epoch(EpochScoreBook(5)), std::invalid_argument);
}

TEST(Window, RollingClearsHistory) {
  ReputationHistory h;
  for (Epoch e = 1; e <= 4; ++e) {
    EpochScoreBook b(e);
    b.add_block({{V(1), S("2.5")}, {V(2), S("1")}});
    h.close_epoch(b);
  }
  EpochScoreBook open(5);
  open.add_block({{V(1), S("1")}, {V(2), S("1")}});
  EXPECT_EQ(cumulative_scores(h, 10, 5, &open)[V(1)], S("11"));
  open.apply_rolling_penalty(V(1));
  auto cum = cumulative_scores(h, 10, 5, &open);
  EXPECT_EQ(cum[V(1)], S("0"));
  EXPECT_EQ(cum[V(2)], S("5"));
  // Honest earnings after the rolling accumulate from zero.
  open.add_block({{V(1), S("0.3")}});
  h.close_epoch(open);
  EpochScoreBook six(6);
  six.add_block({{V(1), S("0.2")}});
  h.close_epoch(six);
  EXPECT_EQ(cumulative_scores(h, 10, 6)[V(1)], S("0.5"));
  // Once the rolling epoch leaves the window the old history is gone anyway.
  EXPECT_EQ(cumulative_scores(h, 1, 6)[V(1)], S("0.2"));
}

TEST(Rewards, Proportional) {
  const auto r = allocate_rewards(100'000'000, V(9), {{V(1), S("3")}, {V(2), S("1")}, {V(3), S("1")}});
  EXPECT_EQ(r.at(V(9)), 50'000'000u);
  EXPECT_EQ(r.at(V(1)), 30'000'000u);
  EXPECT_EQ(r.at(V(2)), 10'000'000u);
  EXPECT_EQ(r.at(V(3)), 10'000'000u);
}

TEST(Rewards, ZeroFeesAndDegenerateScores) {
  for (const auto& [v, amt] : allocate_rewards(0, V(9), {{V(1), S("3")}, {V(2), S("1")}})) EXPECT_EQ(amt, 0u);
  const auto eq = allocate_rewards(90, V(9), {{V(1), S("0")}, {V(2), S("-2")}, {V(3), S("0")}});
  EXPECT_EQ(eq.at(V(9)), 45u);
  EXPECT_EQ(eq.at(V(1)), 15u);
  EXPECT_EQ(eq.at(V(2)), 15u);
  EXPECT_EQ(eq.at(V(3)), 15u);
  // Negative scores are clamped to zero weight.
  const auto clamp = allocate_rewards(100, V(9), {{V(1), S("2")}, {V(2), S("-5")}});
  EXPECT_EQ(clamp.at(V(1)), 50u);
  EXPECT_EQ(clamp.at(V(2)), 0u);
}

TEST(Rewards, ConservationProperty) {
  std::uint64_t fee = 1;
  for (int i = 0; i < 500; ++i) {
    fee = fee * 6364136223846793005ULL + 1442695040888963407ULL;
    ScoreMap scores;
    for (std::uint32_t v = 0; v < 1 + i % 7; ++v) scores[V(v)] = Score::from_micros(static_cast<std::int64_t>((fee >> (v * 3)) % 1000) - 200);
    const std::uint64_t total = fee % 1'000'000'007ULL;
    std::uint64_t sum = 0;
    for (const auto& [v, amt] : allocate_rewards(total, V(0), scores)) sum += amt;
    EXPECT_EQ(sum, total);
  }
}

TEST(Export, Csv) {
  ReputationHistory h;
  EpochScoreBook b(0);
  b.add_block({{V(2), S("1.5")}});
  h.close_epoch(b);
  EXPECT_EQ(export_csv(h, 10), "validator,epoch,delta,cumulative\n2,0,1.500000,1.500000\n");
}

}  // namespace
}  // namespace repchain::reputation
