#include <gtest/gtest.h>

#include "repchain/cross/cross_shard.hpp"
#include "shard_fixture.hpp"

namespace repchain::cross {
namespace {

using chain::Decision;
using reputation::Outcome;
using testing::ShardFixture;

Hash with_low64(std::uint64_t v, std::uint8_t fill = 0x5a) {
  Hash h;
  h.fill(fill);
  for (int i = 0; i < 8; ++i) h[31 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return h;
}

TEST(Routing, LowBitsOfIdModK) {
  Transaction tx;
  tx.id = with_low64(17);
  tx.inputs = {chain::TxInput{with_low64(1, 1), with_low64(3), 5, {}}, chain::TxInput{with_low64(2, 2), with_low64(12), 5, {}}};
  const Route r = route_tx(tx, 8);
  EXPECT_EQ(r.output_shard, 1u);
  EXPECT_EQ(r.input_shards, (std::vector<ShardId>{3, 4}));
  EXPECT_TRUE(r.cross());
  EXPECT_EQ(r.foreign_inputs(), (std::vector<ShardId>{3, 4}));

  tx.inputs = {chain::TxInput{with_low64(1, 1), with_low64(9), 5, {}}};
  EXPECT_FALSE(route_tx(tx, 8).cross());
}

class LedgerTest : public ::testing::Test {
 protected:
  LedgerTest() : ledger(0, 2) {
    owner.fill(9);
    origin = with_low64(4);  // shard 0 of 2
    for (std::uint32_t i = 0; i < 3; ++i) ledger.insert(Utxo{chain::output_address(origin, i), owner, 10, origin, {}});
  }

  Transaction tx_on(std::vector<std::uint32_t> indices, std::uint8_t tag) {
    Transaction tx;
    for (auto i : indices) tx.inputs.push_back({chain::output_address(origin, i), origin, 10, {}});
    // A foreign input that this ledger must ignore.
    tx.inputs.push_back({with_low64(77, tag), with_low64(5), 10, {}});
    tx.id = with_low64(100 + tag, tag);
    return tx;
  }

  chain::SpentState state(std::uint32_t i) { return ledger.find(chain::output_address(origin, i))->spent_state; }

  ShardLedger ledger;
  crypto::PublicKey owner{};
  Hash origin{};
};

TEST_F(LedgerTest, LockIsIdempotentAndExclusive) {
  const auto a = tx_on({0, 1}, 1);
  const auto b = tx_on({1, 2}, 2);
  EXPECT_EQ(ledger.lock_inputs(a), LockVerdict::accept);
  EXPECT_EQ(ledger.lock_inputs(a), LockVerdict::accept);
  EXPECT_EQ(state(0), chain::SpentState::locked);
  EXPECT_EQ(ledger.locked_by(chain::output_address(origin, 1)), a.id);

  EXPECT_EQ(ledger.lock_inputs(b), LockVerdict::reject);
  EXPECT_EQ(state(2), chain::SpentState::unspent) << "reject must leave every input untouched";

  ledger.release(a);
  EXPECT_EQ(state(0), chain::SpentState::unspent);
  EXPECT_EQ(ledger.lock_inputs(b), LockVerdict::accept);
}

TEST_F(LedgerTest, SpentInputsRejectAndCannotBeSpentTwice) {
  const auto a = tx_on({0}, 1);
  EXPECT_EQ(ledger.lock_inputs(a), LockVerdict::accept);
  EXPECT_TRUE(ledger.spend(a));
  EXPECT_EQ(state(0), chain::SpentState::spent);
  EXPECT_FALSE(ledger.spend(a));
  EXPECT_EQ(ledger.lock_inputs(tx_on({0}, 3)), LockVerdict::reject);
  ledger.release(a);
  EXPECT_EQ(state(0), chain::SpentState::spent) << "release never revives a spent UTXO";
}

TEST_F(LedgerTest, SpendRespectsForeignLocks) {
  const auto a = tx_on({0}, 1);
  const auto b = tx_on({0}, 2);
  ASSERT_EQ(ledger.lock_inputs(a), LockVerdict::accept);
  EXPECT_FALSE(ledger.spend(b));
  EXPECT_TRUE(ledger.spend(a));
}

TEST_F(LedgerTest, MismatchedClaimRejects) {
  auto a = tx_on({0}, 1);
  a.inputs[0].value = 11;
  EXPECT_EQ(ledger.lock_inputs(a), LockVerdict::reject);
  auto b = tx_on({0}, 2);
  b.inputs[0].utxo = with_low64(1234, 8);
  EXPECT_EQ(ledger.lock_inputs(b), LockVerdict::reject);
}

TEST_F(LedgerTest, OutputsMustRouteHere) {
  Transaction tx;
  tx.id = with_low64(6);
  tx.outputs = {{owner, 4}, {owner, 5}};
  ledger.add_outputs(tx);
  EXPECT_TRUE(ledger.find(chain::output_address(tx.id, 1)).has_value());
  tx.id = with_low64(7);
  EXPECT_THROW(ledger.add_outputs(tx), std::invalid_argument);
}

class ExcerptTest : public ::testing::Test {
 protected:
  ExcerptTest() : source(5, 1, 10) {
    for (std::uint64_t i = 0; hashes.size() < 6; ++i) {
      const Hash h = crypto::sha256(with_low64(i));
      if (consensus::output_shard_of(h, 2) == 0 && count0 < 3) {
        hashes.push_back(h);
        ++count0;
      } else if (consensus::output_shard_of(h, 2) == 1 && hashes.size() - count0 < 3) {
        hashes.push_back(h);
      }
    }
    list = consensus::propose_txlist(2, 7, 1, hashes, hashes.size(), source.signer(0), source.scheme);
    for (std::size_t v = 0; v < 5; ++v) {
      std::vector<Decision> ds;
      for (std::size_t p = 0; p < list.tx_hashes.size(); ++p) {
        // Position p: Yes from the first 5 - p%4 voters, No from the rest.
        ds.push_back(v < 5 - p % 4 ? Decision::yes : Decision::no);
      }
      decset.decs.push_back(consensus::sign_decisions(list, ds, 2, source.signer(v), source.scheme));
    }
    decset.epoch = 2;
    decset.iteration = 7;
    decset.shard = 1;
  }

  ShardFixture source;
  std::vector<Hash> hashes;
  std::size_t count0 = 0;
  chain::TxList list;
  chain::TxDecSet decset;
};

TEST_F(ExcerptTest, BatchedCellVerifies) {
  const auto ex = make_excerpt(list, decset, 0, 2);
  ASSERT_EQ(ex.tx_hashes.size(), 3u);
  ASSERT_EQ(ex.votes.size(), 5u);
  const auto verdicts = verify_excerpt(ex, source.roster, 2, source.scheme);
  ASSERT_TRUE(verdicts.has_value());
  ASSERT_EQ(verdicts->size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto p = static_cast<std::size_t>(
        std::find(list.tx_hashes.begin(), list.tx_hashes.end(), ex.tx_hashes[i]) - list.tx_hashes.begin());
    const std::size_t yes = 5 - p % 4;
    const Outcome want = 2 * yes > 5 ? Outcome::included : 2 * (5 - yes) > 5 ? Outcome::rejected : Outcome::undecided;
    EXPECT_EQ((*verdicts)[i], want) << p;
  }
}

TEST_F(ExcerptTest, TamperedVoteVoidsProof) {
  auto ex = make_excerpt(list, decset, 1, 2);
  ASSERT_TRUE(verify_excerpt(ex, source.roster, 2, source.scheme).has_value());
  auto flipped = ex;
  flipped.votes[4].decisions[0] = Decision::yes == flipped.votes[4].decisions[0] ? Decision::no : Decision::yes;
  EXPECT_FALSE(verify_excerpt(flipped, source.roster, 2, source.scheme).has_value());
  auto bad_sig = ex;
  bad_sig.votes[0].subset_sig[5] ^= 0x40;
  EXPECT_FALSE(verify_excerpt(bad_sig, source.roster, 2, source.scheme).has_value());
  auto dropped = ex;
  dropped.tx_hashes.pop_back();
  for (auto& v : dropped.votes) v.decisions.pop_back();
  EXPECT_FALSE(verify_excerpt(dropped, source.roster, 2, source.scheme).has_value());
}

TEST_F(ExcerptTest, WrongSourceRosterRejected) {
  const auto ex = make_excerpt(list, decset, 0, 2);
  ShardFixture impostor(5, 1, 20);
  EXPECT_FALSE(verify_excerpt(ex, impostor.roster, 2, impostor.scheme).has_value());
  ShardFixture other_shard(5, 0, 10);
  EXPECT_FALSE(verify_excerpt(ex, other_shard.roster, 2, other_shard.scheme).has_value());
}

TEST(Resolve, AcceptRejectAndWait) {
  CrossTxState st;
  st.route.input_shards = {0, 2, 3};
  st.route.output_shard = 0;
  EXPECT_EQ(resolve(st), Action::wait);
  st.record(2, Outcome::included);
  EXPECT_EQ(resolve(st), Action::wait);
  st.record(3, Outcome::undecided);
  EXPECT_EQ(resolve(st), Action::wait);
  st.record(3, Outcome::included);
  EXPECT_EQ(resolve(st), Action::propose_commit);

  CrossTxState rej = st;
  rej.record(2, Outcome::rejected);
  EXPECT_EQ(resolve(rej), Action::abort);
  rej.record(2, Outcome::included);
  EXPECT_EQ(resolve(rej), Action::abort) << "a reject is final";

  st.resolution = Resolution::committed;
  EXPECT_EQ(resolve(st), Action::wait);
}

}  // namespace
}  // namespace repchain::cross
