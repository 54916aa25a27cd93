#include <gtest/gtest.h>

#include "repchain/chain/validation.hpp"
#include "repchain/consensus/engine.hpp"
#include "repchain/cross/cross_shard.hpp"
#include "shard_fixture.hpp"

namespace repchain::consensus {
namespace {

using chain::Decision;
using chain::Transaction;
using chain::TxInput;
using chain::TxOutput;
using chain::Utxo;
using testing::ShardFixture;

constexpr Decision Y = Decision::yes;
constexpr Decision N = Decision::no;
constexpr Decision U = Decision::unknown;

class EngineTest : public ::testing::Test {
 protected:
  explicit EngineTest(std::size_t m = 5) : shard(m), ledger(0, 1) {
    owner = shard.scheme.keypair_from_seed(crypto::sha256(as_bytes("owner")));
    genesis.fill(0x11);
    for (std::uint32_t i = 0; i < 8; ++i) {
      ledger.insert(Utxo{chain::output_address(genesis, i), owner.public_key, 10, genesis, {}});
    }
  }

  Transaction spend(std::uint32_t index, std::uint64_t amount) {
    Transaction tx;
    tx.inputs = {TxInput{chain::output_address(genesis, index), genesis, 10, {}}};
    tx.outputs = {TxOutput{shard.keys[0].public_key, amount}, TxOutput{owner.public_key, 9 - amount}};
    tx.fee = 1;
    const crypto::KeyPair* k = &owner;
    chain::sign_transaction(tx, std::span(&k, 1), shard.scheme);
    return tx;
  }

  TxList list_of(const std::vector<Transaction>& txs, Iteration it = 1) {
    std::vector<TxId> ids;
    for (const auto& t : txs) ids.push_back(t.id);
    return propose_txlist(1, it, 0, ids, ids.size(), shard.signer(0), shard.scheme);
  }

  // Contents aligned with the (sorted) list.
  std::vector<const Transaction*> aligned(const TxList& list, const std::vector<Transaction>& txs) {
    std::vector<const Transaction*> out;
    for (const auto& h : list.tx_hashes) {
      for (const auto& t : txs) {
        if (t.id == h) out.push_back(&t);
      }
    }
    return out;
  }

  TxCheck checker() {
    return [this](const Transaction& tx, chain::ValidationBudget& b) {
      return chain::validate_tx_structure(tx, ledger, shard.scheme, b);
    };
  }

  // One TxDec per listed member with the given decisions on a one-entry list.
  std::vector<TxDec> decs_for(const TxList& list, const std::vector<Decision>& per_member) {
    std::vector<TxDec> out;
    for (std::size_t i = 0; i < per_member.size(); ++i) {
      out.push_back(sign_decisions(list, {per_member[i]}, 1, shard.signer(i), shard.scheme));
    }
    return out;
  }

  ShardFixture shard;
  cross::ShardLedger ledger;
  crypto::KeyPair owner;
  Hash genesis{};
};

TEST_F(EngineTest, TxListTakesCapacityAndSorts) {
  std::vector<TxId> ids;
  for (std::uint32_t i = 0; i < 6; ++i) ids.push_back(spend(i, 3).id);
  const auto list = propose_txlist(1, 1, 0, ids, 4, shard.signer(0), shard.scheme);
  ASSERT_EQ(list.tx_hashes.size(), 4u);
  EXPECT_TRUE(std::is_sorted(list.tx_hashes.begin(), list.tx_hashes.end()));
  for (const auto& h : list.tx_hashes) EXPECT_NE(std::find(ids.begin(), ids.begin() + 4, h), ids.begin() + 4);
  EXPECT_TRUE(verify_txlist(list, shard.roster.keys[0], shard.scheme));
  EXPECT_FALSE(verify_txlist(list, shard.roster.keys[1], shard.scheme));
}

TEST_F(EngineTest, EmptyMempoolStillProducesSignedList) {
  const auto list = propose_txlist(1, 1, 0, {}, 8, shard.signer(0), shard.scheme);
  EXPECT_TRUE(list.tx_hashes.empty());
  EXPECT_TRUE(verify_txlist(list, shard.roster.keys[0], shard.scheme));
  chain::ValidationBudget budget;
  const auto dec = vote(list, {}, checker(), budget, {}, 1, shard.signer(1), shard.scheme);
  EXPECT_TRUE(dec.subset_sigs.empty());
  EXPECT_TRUE(verify_txdec(dec, list, shard.roster.keys[1], 1, shard.scheme));
}

TEST_F(EngineTest, VoteValidatesAndSigns) {
  std::vector<Transaction> txs{spend(0, 3), spend(1, 4)};
  const auto list = list_of(txs);
  const auto contents = aligned(list, txs);
  chain::ValidationBudget budget;
  const auto dec = vote(list, contents, checker(), budget, {}, 1, shard.signer(2), shard.scheme);
  EXPECT_EQ(dec.decisions, (std::vector<Decision>{Y, Y}));
  EXPECT_TRUE(verify_txdec(dec, list, shard.roster.keys[2], 1, shard.scheme));
  EXPECT_FALSE(verify_txdec(dec, list, shard.roster.keys[3], 1, shard.scheme));
  auto flipped = dec;
  flipped.decisions[0] = N;
  EXPECT_FALSE(verify_txdec(flipped, list, shard.roster.keys[2], 1, shard.scheme));
}

TEST_F(EngineTest, InListDoubleSpendLaterPositionIsNo) {
  std::vector<Transaction> txs{spend(0, 3), spend(0, 4)};
  const auto list = list_of(txs);
  chain::ValidationBudget budget;
  const auto dec = vote(list, aligned(list, txs), checker(), budget, {}, 1, shard.signer(1), shard.scheme);
  EXPECT_EQ(dec.decisions, (std::vector<Decision>{Y, N}));
}

TEST_F(EngineTest, ExhaustedBudgetLeavesUnknown) {
  std::vector<Transaction> txs{spend(0, 1), spend(1, 2), spend(2, 3), spend(3, 4)};
  const auto list = list_of(txs);
  chain::ValidationBudget budget{2};
  const std::vector<std::size_t> order{3, 1, 0, 2};
  const auto dec = vote(list, aligned(list, txs), checker(), budget, order, 1, shard.signer(1), shard.scheme);
  EXPECT_EQ(dec.decisions, (std::vector<Decision>{U, Y, U, Y}));
}

TEST_F(EngineTest, SubsetSignaturesPerOutputCell) {
  std::vector<Transaction> txs;
  for (std::uint32_t i = 0; i < 8; ++i) txs.push_back(spend(i, 1 + i % 5));
  const auto list = list_of(txs);
  chain::ValidationBudget budget;
  const auto dec = vote(list, aligned(list, txs), checker(), budget, {}, 4, shard.signer(1), shard.scheme);
  std::set<ShardId> cells;
  for (const auto& h : list.tx_hashes) cells.insert(output_shard_of(h, 4));
  ASSERT_EQ(dec.subset_sigs.size(), cells.size());
  for (std::size_t i = 0; i < dec.subset_sigs.size(); ++i) {
    EXPECT_EQ(dec.subset_sigs[i].destination, *std::next(cells.begin(), static_cast<std::ptrdiff_t>(i)));
  }
  EXPECT_TRUE(verify_txdec(dec, list, shard.roster.keys[1], 4, shard.scheme));
  EXPECT_FALSE(verify_txdec(dec, list, shard.roster.keys[1], 1, shard.scheme));
}

TEST_F(EngineTest, MajorityRuleFiveMembers) {
  std::vector<Transaction> txs{spend(0, 3)};
  const auto list = list_of(txs);
  const auto contents = aligned(list, txs);

  auto included = build_block(list, contents, decs_for(list, {Y, Y, Y, N, U}), 5, kZeroHash, {}, shard.signer(0),
                              shard.scheme);
  EXPECT_EQ(included.tb.txs.size(), 1u);

  auto excluded = build_block(list, contents, decs_for(list, {Y, Y, N, N, U}), 5, kZeroHash, {}, shard.signer(0),
                              shard.scheme);
  EXPECT_TRUE(excluded.tb.txs.empty());
  EXPECT_EQ(excluded.decset.decs.size(), 5u);
}

TEST(MajorityRule, AbsentMemberIsNeitherYesNorNo) {
  ShardFixture shard(4);
  Transaction tx;
  tx.id.fill(7);
  const auto list = propose_txlist(1, 1, 0, std::vector<TxId>{tx.id}, 1, shard.signer(0), shard.scheme);
  std::vector<TxDec> decs;
  const Decision ds[] = {Y, Y, N};
  for (std::size_t i = 0; i < 3; ++i) decs.push_back(sign_decisions(list, {ds[i]}, 1, shard.signer(i), shard.scheme));
  const Transaction* c = &tx;
  const auto block = build_block(list, std::span(&c, 1), decs, 4, kZeroHash, {}, shard.signer(0), shard.scheme);
  EXPECT_TRUE(block.tb.txs.empty());
  EXPECT_EQ(tally(list, block.decset.decs)[0].yes, 2u);
}

TEST_F(EngineTest, LockEntriesStayOutOfTheBlock) {
  std::vector<Transaction> txs{spend(0, 3), spend(1, 3)};
  const auto list = list_of(txs);
  std::vector<TxDec> decs;
  for (std::size_t i = 0; i < 5; ++i) decs.push_back(sign_decisions(list, {Y, Y}, 1, shard.signer(i), shard.scheme));
  const TxId lock_only = list.tx_hashes[1];
  auto pair = build_block(list, aligned(list, txs), decs, 5, kZeroHash,
                          [&](const TxId& id) { return id != lock_only; }, shard.signer(0), shard.scheme);
  ASSERT_EQ(pair.tb.txs.size(), 1u);
  EXPECT_EQ(pair.tb.txs[0].id, list.tx_hashes[0]);
}

class VerifyTest : public EngineTest {
 protected:
  void SetUp() override {
    txs = {spend(0, 3), spend(1, 2)};
    list = list_of(txs);
    contents = aligned(list, txs);
    for (std::size_t i = 0; i < 5; ++i) {
      chain::ValidationBudget b;
      decs.push_back(vote(list, contents, checker(), b, {}, 1, shard.signer(i), shard.scheme));
    }
    pair = build_block(list, contents, decs, 5, kZeroHash, {}, shard.signer(0), shard.scheme);
  }

  WarningReason check_as(std::size_t member, const chain::TransactionBlock& tb, const TxDecSet& ds) {
    VerifyContext ctx;
    ctx.list = &list;
    ctx.txs = contents;
    ctx.own_dec = &decs[member];
    ctx.self = shard.roster.members[member];
    ctx.roster = &shard.roster;
    ctx.leader_key = &shard.roster.keys[0];
    ctx.k = 1;
    return verify_block(ctx, tb, ds, shard.scheme);
  }

  void resign(chain::TransactionBlock& tb) { tb.leader_sig = shard.scheme.sign(shard.keys[0], chain::signing_bytes(tb)); }
  void resign(TxDecSet& ds) { ds.leader_sig = shard.scheme.sign(shard.keys[0], chain::signing_bytes(ds)); }

  std::vector<Transaction> txs;
  TxList list;
  std::vector<const Transaction*> contents;
  std::vector<TxDec> decs;
  BlockPair pair;
};

TEST_F(VerifyTest, HonestBlockAccepted) {
  ASSERT_EQ(pair.tb.txs.size(), 2u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(check_as(i, pair.tb, pair.decset), WarningReason::none);
}

TEST_F(VerifyTest, MissingOwnTxDecWarns) {
  auto ds = pair.decset;
  ds.decs.erase(ds.decs.begin() + 3);
  resign(ds);
  EXPECT_EQ(check_as(3, pair.tb, ds), WarningReason::missing_txdec);
  EXPECT_EQ(check_as(1, pair.tb, ds), WarningReason::none);
}

TEST_F(VerifyTest, AlteredTxDecWarns) {
  auto ds = pair.decset;
  ds.decs[2].decisions[0] = Decision::no;
  resign(ds);
  EXPECT_EQ(check_as(2, pair.tb, ds), WarningReason::altered_txdec);
  EXPECT_EQ(check_as(1, pair.tb, ds), WarningReason::bad_signature);
}

TEST_F(VerifyTest, UnsupportedTransactionWarns) {
  auto tb = pair.tb;
  tb.txs.push_back(spend(5, 4));
  resign(tb);
  EXPECT_EQ(check_as(1, tb, pair.decset), WarningReason::unsupported_tx);
}

TEST_F(VerifyTest, OmittedTransactionWarns) {
  auto tb = pair.tb;
  tb.txs.erase(tb.txs.begin());
  resign(tb);
  EXPECT_EQ(check_as(1, tb, pair.decset), WarningReason::omitted_tx);
}

TEST_F(VerifyTest, SubstitutedContentsWarn) {
  auto tb = pair.tb;
  tb.txs[0].fee += 1;
  resign(tb);
  EXPECT_EQ(check_as(1, tb, pair.decset), WarningReason::unsupported_tx);
}

TEST_F(VerifyTest, ForgedLeaderSignatureWarns) {
  auto tb = pair.tb;
  tb.leader_sig[0] ^= 1;
  EXPECT_EQ(check_as(1, tb, pair.decset), WarningReason::bad_signature);
}

TEST_F(VerifyTest, WrongChainLinkWarns) {
  auto tb = pair.tb;
  tb.prev_tb_hash.fill(3);
  resign(tb);
  EXPECT_EQ(check_as(1, tb, pair.decset), WarningReason::bad_chain_link);
}

std::vector<chain::Warning> warnings_from(const ShardFixture& s, std::size_t count, Iteration it = 4) {
  std::vector<chain::Warning> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(make_warning(1, it, 0, WarningReason::unsupported_tx, s.signer(i), s.scheme));
  }
  return out;
}

TEST(WarningTally, Thresholds) {
  ShardFixture five(5);
  EXPECT_EQ(tally_warnings(warnings_from(five, 3), five.roster, 1, 4, five.scheme), TallyResult::roll);
  EXPECT_EQ(tally_warnings(warnings_from(five, 2), five.roster, 1, 4, five.scheme), TallyResult::proceed);
  ShardFixture four(4);
  EXPECT_EQ(tally_warnings(warnings_from(four, 2), four.roster, 1, 4, four.scheme), TallyResult::roll);
  EXPECT_EQ(tally_warnings(warnings_from(four, 1), four.roster, 1, 4, four.scheme), TallyResult::proceed);
}

TEST(WarningTally, DuplicatesForgeriesAndStaleIterationsIgnored) {
  ShardFixture five(5);
  auto ws = warnings_from(five, 2);
  ws.push_back(ws[0]);
  ws.push_back(ws[1]);
  EXPECT_EQ(tally_warnings(ws, five.roster, 1, 4, five.scheme), TallyResult::proceed);

  auto forged = make_warning(1, 4, 0, WarningReason::omitted_tx, five.signer(3), five.scheme);
  forged.sender = five.roster.members[4];
  ws.push_back(forged);
  EXPECT_EQ(tally_warnings(ws, five.roster, 1, 4, five.scheme), TallyResult::proceed);

  ws.push_back(make_warning(1, 3, 0, WarningReason::omitted_tx, five.signer(4), five.scheme));
  EXPECT_EQ(tally_warnings(ws, five.roster, 1, 4, five.scheme), TallyResult::proceed);

  ShardFixture outsider(1, 0, 99);
  ws.push_back(make_warning(1, 4, 0, WarningReason::omitted_tx, outsider.signer(0), outsider.scheme));
  EXPECT_EQ(tally_warnings(ws, five.roster, 1, 4, five.scheme), TallyResult::proceed);
}

TEST_F(EngineTest, ScoreDeltasFromDecisionSet) {
  std::vector<Transaction> txs{spend(0, 3), spend(1, 5)};
  const auto list = list_of(txs);
  // Member 4 is absent; entry 0 included, entry 1 rejected.
  std::vector<TxDec> decs;
  const std::vector<std::vector<Decision>> votes{{Y, N}, {Y, N}, {Y, N}, {N, Y}};
  for (std::size_t i = 0; i < votes.size(); ++i) {
    decs.push_back(sign_decisions(list, votes[i], 1, shard.signer(i), shard.scheme));
  }
  const auto pair = build_block(list, aligned(list, txs), decs, 5, kZeroHash, {}, shard.signer(0), shard.scheme);
  ScoredIteration it{&pair.decset, {10, 20}};
  const auto deltas = compute_score_deltas(shard.roster, std::span(&it, 1), {});
  ASSERT_EQ(deltas.size(), 5u);
  // Correct on both: 0.1*10 + 0.1*20.
  EXPECT_EQ(deltas.at(shard.roster.members[0]).to_string(), "3.000000");
  // No on included (-0.5*10) and Yes on rejected (-1*20).
  EXPECT_EQ(deltas.at(shard.roster.members[3]).to_string(), "-25.000000");
  EXPECT_EQ(deltas.at(shard.roster.members[4]).to_string(), "0.000000");
}

TEST_F(EngineTest, ReputationBlockCosignedByMajority) {
  reputation::ScoreMap deltas;
  for (auto v : shard.roster.members) deltas[v] = chain::Score::from_units(1);
  auto body = reputation_block_body(1, 0, kZeroHash, {kZeroHash}, deltas, std::vector<Hash>{kZeroHash});
  std::vector<Signer> three{shard.signer(0), shard.signer(2), shard.signer(4)};
  const auto rb = build_reputation_block(body, shard.roster, three, shard.scheme);
  EXPECT_TRUE(verify_reputation_block(rb, shard.roster, shard.scheme));

  std::vector<Signer> two{shard.signer(0), shard.signer(1)};
  EXPECT_FALSE(verify_reputation_block(build_reputation_block(body, shard.roster, two, shard.scheme), shard.roster,
                                       shard.scheme));
  auto partial = rb;
  partial.score_deltas.erase(partial.score_deltas.begin());
  EXPECT_FALSE(verify_reputation_block(partial, shard.roster, shard.scheme));
  auto tampered = rb;
  tampered.score_deltas.begin()->second = chain::Score::from_units(9);
  EXPECT_FALSE(verify_reputation_block(tampered, shard.roster, shard.scheme));
}

}  // namespace
}  // namespace repchain::consensus
