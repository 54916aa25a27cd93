#include <gtest/gtest.h>

#include <filesystem>

#include "repchain/chain/encoding.hpp"
#include "repchain/crypto/pow.hpp"
#include "repchain/epoch/epoch_sync.hpp"
#include "shard_fixture.hpp"

namespace repchain::epoch {
namespace {

using chain::Utxo;
using testing::ShardFixture;

Hash h(std::uint8_t b) {
  Hash x;
  x.fill(b);
  return x;
}

TEST(Consolidate, OnePerOwnerAtSmallestAddress) {
  const crypto::PublicKey a = h(1), b = h(2);
  std::vector<Utxo> in{{h(9), a, 5, h(40), {}}, {h(3), a, 7, h(41), {}}, {h(5), b, 1, h(42), {}}, {h(7), a, 1, h(43), {}}};
  const auto out = consolidate_utxos(in);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].address, h(3));
  EXPECT_EQ(out[0].owner, a);
  EXPECT_EQ(out[0].value, 13u);
  EXPECT_EQ(out[0].origin_tx, h(41));
  EXPECT_EQ(out[1].address, h(5));
  EXPECT_EQ(out[1].value, 1u);
}

TEST(Consolidate, ConservesValueOnRandomSets) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    crypto::SeededRng rng(crypto::sha256(as_bytes("consolidate" + std::to_string(seed))));
    std::vector<Utxo> in;
    std::uint64_t total = 0;
    std::set<crypto::PublicKey> owners;
    for (std::uint64_t i = 0, n = rng.next_int(30); i < n; ++i) {
      Utxo u;
      u.address = crypto::sha256(as_bytes("a" + std::to_string(seed) + "/" + std::to_string(i)));
      u.owner = h(static_cast<std::uint8_t>(rng.next_int(5)));
      u.value = rng.next_int(1000);
      total += u.value;
      owners.insert(u.owner);
      in.push_back(u);
    }
    const auto out = consolidate_utxos(in);
    std::uint64_t after = 0;
    for (const auto& u : out) after += u.value;
    EXPECT_EQ(after, total);
    EXPECT_EQ(out.size(), owners.size());
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end(), [](auto& x, auto& y) { return x.address < y.address; }));
  }
}

TEST(Consolidate, RejectsSpentAndOverflow) {
  std::vector<Utxo> spent{{h(1), h(1), 1, h(1), chain::SpentState::spent}};
  EXPECT_THROW(consolidate_utxos(spent), std::invalid_argument);
  std::vector<Utxo> big{{h(1), h(1), UINT64_MAX, h(1), {}}, {h(2), h(1), 1, h(1), {}}};
  EXPECT_THROW(consolidate_utxos(big), std::overflow_error);
}

class StateBlockTest : public ::testing::Test {
 protected:
  StateBlockTest() : shard(5, 0) {
    reputation::ScoreMap scores;
    for (auto v : shard.roster.members) scores[v] = chain::Score::from_units(v.value);
    body = state_block_body(3, 0, scores, consolidate_utxos({{h(4), h(1), 5, h(4), {}}, {h(6), h(2), 8, h(4), {}}}));
    signers = {shard.signer(0), shard.signer(1), shard.signer(3)};
  }

  ShardFixture shard;
  chain::StateBlock body;
  std::vector<consensus::Signer> signers;
};

TEST_F(StateBlockTest, SealVerifiesWithDefaultDifficulty) {
  const auto sb = seal_state_block(body, shard.roster, signers, kDefaultPowDifficulty, shard.scheme);
  EXPECT_TRUE(verify_state_block(sb, shard.roster, kDefaultPowDifficulty, shard.scheme));
  EXPECT_GE(crypto::leading_zero_bits(crypto::pow_digest(chain::sealed_body_hash(sb), sb.pow_nonce)), 12);

  auto wrong_nonce = sb;
  wrong_nonce.pow_nonce += 1;
  // The next nonce could also meet the target; walk until one does not.
  while (crypto::pow_verify(chain::sealed_body_hash(wrong_nonce), wrong_nonce.pow_nonce, 12)) ++wrong_nonce.pow_nonce;
  EXPECT_FALSE(verify_state_block(wrong_nonce, shard.roster, 12, shard.scheme));

  auto edited = sb;
  edited.utxo_set[0].value += 1;
  EXPECT_FALSE(verify_state_block(edited, shard.roster, 12, shard.scheme));
}

TEST_F(StateBlockTest, MinoritySignersRejected) {
  std::vector<consensus::Signer> two{shard.signer(0), shard.signer(1)};
  const auto sb = seal_state_block(body, shard.roster, two, 4, shard.scheme);
  EXPECT_FALSE(verify_state_block(sb, shard.roster, 4, shard.scheme));
}

TEST_F(StateBlockTest, DuplicateOwnerRejected) {
  auto dup = body;
  dup.utxo_set.push_back({h(9), h(1), 1, h(4), {}});
  const auto sb = seal_state_block(dup, shard.roster, signers, 4, shard.scheme);
  EXPECT_FALSE(verify_state_block(sb, shard.roster, 4, shard.scheme));
}

TEST_F(StateBlockTest, FileRoundTrip) {
  const auto sb = seal_state_block(body, shard.roster, signers, 4, shard.scheme);
  const auto dir = std::filesystem::temp_directory_path() / "repchain_sb_test";
  std::filesystem::remove_all(dir);
  const auto path = write_state_block(dir, sb);
  EXPECT_EQ(path.filename().string(), "sb_e3_s0.bin");
  EXPECT_EQ(read_state_block(path), sb);
  std::filesystem::remove_all(dir);
}

TEST(Synchronize, SeedFromHashesAndMergedScores) {
  ShardFixture s0(4, 0, 0), s1(4, 1, 4);
  // Both fixtures need keys registered in one MAC directory.
  crypto::FastMacScheme scheme;
  for (auto* s : {&s0, &s1}) {
    for (std::size_t i = 0; i < s->keys.size(); ++i) {
      const std::string label = "member-" + std::to_string(s->roster.members[i].value);
      s->keys[i] = scheme.keypair_from_seed(crypto::sha256(as_bytes(label)));
    }
  }
  std::vector<chain::StateBlock> sbs;
  std::vector<consensus::Roster> rosters{s0.roster, s1.roster};
  for (auto* s : {&s0, &s1}) {
    reputation::ScoreMap scores;
    for (auto v : s->roster.members) scores[v] = chain::Score::from_units(v.value % 3);
    std::vector<consensus::Signer> all;
    for (std::size_t i = 0; i < s->m(); ++i) all.push_back(s->signer(i));
    sbs.push_back(seal_state_block(state_block_body(1, s->roster.shard, scores, {}), s->roster, all, 6, scheme));
  }
  const auto r = synchronize(sbs, rosters, 2, 6, scheme);
  EXPECT_EQ(r.scores.size(), 8u);
  const std::vector<Hash> hashes{chain::block_hash(sbs[0]), chain::block_hash(sbs[1])};
  EXPECT_EQ(r.state_block_hashes, hashes);
  EXPECT_EQ(r.seed, crypto::derive_seed(hashes, kSeedLabel));
  EXPECT_EQ(r.assignment, assignment::assign_epoch(r.seed, r.scores, 2));

  std::swap(sbs[0], sbs[1]);
  EXPECT_THROW(synchronize(sbs, rosters, 2, 6, scheme), SyncFailure);
  std::swap(sbs[0], sbs[1]);
  sbs[1].cumulative_scores.begin()->second = chain::Score::from_units(50);
  EXPECT_THROW(synchronize(sbs, rosters, 2, 6, scheme), SyncFailure);
}

}  // namespace
}  // namespace repchain::epoch
