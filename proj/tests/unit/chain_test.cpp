#include <gtest/gtest.h>

#include <map>
#include <set>

#include "generators.hpp"
#include "repchain/chain/encoding.hpp"
#include "repchain/chain/json.hpp"
#include "repchain/chain/validation.hpp"

namespace repchain::chain {
namespace {

using testing::Gen;

template <class T, class Make>
void round_trip_property(Make make) {
  Gen g(42);
  for (int i = 0; i < 200; ++i) {
    const T v = make(g);
    const Bytes b = canonical_encode(v);
    EXPECT_EQ(canonical_encode(v), b);
    EXPECT_EQ(encoded_size(v), b.size());
    EXPECT_EQ(canonical_decode<T>(b), v);
  }
}

template <class T, class Make>
void injectivity_property(Make make) {
  Gen g(7);
  std::map<Bytes, int> seen;
  std::vector<T> values;
  for (int i = 0; i < 200; ++i) {
    values.push_back(make(g));
    const auto [it, fresh] = seen.emplace(canonical_encode(values.back()), i);
    if (!fresh) EXPECT_EQ(values[static_cast<std::size_t>(it->second)], values.back());
  }
}

#define ROUND_TRIP(Type, expr)                                              \
  TEST(Encoding, RoundTrip##Type) { round_trip_property<Type>([](Gen& g) { return expr; }); } \
  TEST(Encoding, Injective##Type) { injectivity_property<Type>([](Gen& g) { return expr; }); }

ROUND_TRIP(Utxo, g.utxo())
ROUND_TRIP(Transaction, g.tx())
ROUND_TRIP(TxList, g.txlist())
ROUND_TRIP(TxDec, g.txdec())
ROUND_TRIP(TxDecSet, g.txdecset())
ROUND_TRIP(TransactionBlock, g.tb())
ROUND_TRIP(ReputationBlock, g.rb())
ROUND_TRIP(StateBlock, g.sb())
ROUND_TRIP(Warning, g.warning())
ROUND_TRIP(ProofExcerpt, g.excerpt())

TEST(Encoding, NearbyValuesDiffer) {
  Gen g(3);
  for (int i = 0; i < 50; ++i) {
    Transaction a = g.tx();
    if (a.outputs.empty()) continue;
    Transaction b = a;
    b.outputs.back().value ^= 1;
    EXPECT_NE(canonical_encode(a), canonical_encode(b));
    EXPECT_NE(tx_id(a), tx_id(b));
  }
  ReputationBlock with, without;
  with.prev_state_block_hashes.emplace();
  EXPECT_NE(canonical_encode(with), canonical_encode(without));
}

TEST(Encoding, GoldenDefaultTransaction) {
  // id(32) + input count(4) + output count(4) + fee(8) + submit time(8).
  EXPECT_EQ(to_hex(canonical_encode(Transaction{})), std::string(112, '0'));
  EXPECT_EQ(to_hex(tx_id(Transaction{})), "374708fff7719dd5979ec875d56cd2286f6d3cf7ec317a3b25632aab28ec37bb");
}

Transaction golden_tx() {
  Transaction tx;
  TxInput in;
  in.utxo.fill(0x11);
  in.origin_tx.fill(0x22);
  in.value = 5;
  in.owner_sig.fill(0x33);
  TxOutput out;
  out.owner.fill(0x44);
  out.value = 4;
  tx.inputs = {in};
  tx.outputs = {out};
  tx.fee = 1;
  tx.submit_time = 9;
  return tx;
}

TEST(Encoding, GoldenTxIdFromIndependentEncoding) {
  const Transaction tx = golden_tx();
  const TxId id = tx_id(tx);
  EXPECT_EQ(to_hex(id), "86f43e5453506fa921b57f97976ffbeed9b1230ce51b90a551cd670dcc3ec206");
  // Signatures and submit time are outside the id.
  Transaction other = tx;
  other.inputs[0].owner_sig.fill(0);
  other.submit_time = 1;
  EXPECT_EQ(tx_id(other), id);
  EXPECT_EQ(to_hex(output_address(id, 0)), "01fa8ee01b7f5fee1280d3ede5cda02c9b69ca5a4190f973503d6e6ed4e2ca13");
}

TEST(Encoding, DecodeRejectsMalformed) {
  const Bytes good = canonical_encode(golden_tx());
  Bytes truncated(good.begin(), good.end() - 1);
  EXPECT_THROW(canonical_decode<Transaction>(truncated), DecodeError);
  Bytes trailing = good;
  trailing.push_back(0);
  EXPECT_THROW(canonical_decode<Transaction>(trailing), DecodeError);

  TxDec dec;
  dec.decisions = {Decision::yes};
  Bytes bad_tag = canonical_encode(dec);
  bad_tag[8 + 8 + 4 + 4 + 4] = 7;
  EXPECT_THROW(canonical_decode<TxDec>(bad_tag), DecodeError);

  // A TxList header followed by an absurd element count.
  Bytes huge(20, 0);
  huge.insert(huge.end(), 4, 0xff);
  EXPECT_THROW(canonical_decode<TxList>(huge), DecodeError);
}

TEST(Encoding, DecodeRejectsUnsortedMapAndPadding) {
  ReputationBlock rb;
  rb.score_deltas[ValidatorId{1}] = Score::from_units(1);
  rb.score_deltas[ValidatorId{2}] = Score::from_units(2);
  Bytes b = canonical_encode(rb);
  // Swap the two map keys in place: offset epoch(8)+shard(4)+prev(32)+tb count(4)+map count(4).
  const std::size_t k0 = 8 + 4 + 32 + 4 + 4;
  std::swap(b[k0 + 3], b[k0 + 4 + 8 + 3]);
  EXPECT_THROW(canonical_decode<ReputationBlock>(b), DecodeError);

  CollectiveSignature c{{true, false, true}, {}};
  Bytes cb = canonical_encode(c);
  EXPECT_EQ(cb[4], 0b10100000);
  cb[4] |= 1;
  EXPECT_THROW(canonical_decode<CollectiveSignature>(cb), DecodeError);
}

TEST(SpentState, Transitions) {
  using S = SpentState;
  EXPECT_TRUE(can_transition(S::unspent, S::locked));
  EXPECT_TRUE(can_transition(S::locked, S::unspent));
  EXPECT_TRUE(can_transition(S::locked, S::spent));
  EXPECT_TRUE(can_transition(S::unspent, S::spent));
  EXPECT_FALSE(can_transition(S::spent, S::unspent));
  EXPECT_FALSE(can_transition(S::spent, S::locked));
  EXPECT_FALSE(can_transition(S::unspent, S::unspent));
}

TEST(ScoreType, ArithmeticAndText) {
  EXPECT_EQ(Score::parse("0.1").micros(), 100000);
  EXPECT_EQ(Score::parse("-0.5").micros(), -500000);
  EXPECT_EQ(Score::parse("12").micros(), 12000000);
  EXPECT_EQ(Score::parse("-1.000001").to_string(), "-1.000001");
  EXPECT_EQ((Score::parse("0.1").times(10)).to_string(), "1.000000");
  EXPECT_THROW(Score::parse("0.1234567"), std::invalid_argument);
  EXPECT_THROW(Score::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Score::from_micros(INT64_MAX) + Score::from_micros(1), std::overflow_error);
  EXPECT_EQ(Score::from_micros(INT64_MIN).to_string(), "-9223372036854.775808");
}

TEST(Json, RendersHex) {
  const auto j = to_json(golden_tx());
  EXPECT_EQ(j["outputs"][0]["value"], 4);
  EXPECT_EQ(j["inputs"][0]["utxo"], std::string(64, '1'));
  ReputationBlock rb;
  rb.score_deltas[ValidatorId{3}] = Score::parse("-3");
  EXPECT_EQ(to_json(rb)["score_deltas"]["3"], "-3.000000");
  EXPECT_FALSE(to_json(rb).contains("prev_state_block_hashes"));
}

// Validation against a small in-memory view.
class MapView : public UtxoView {
 public:
  std::map<Address, Utxo> utxos;
  std::set<Hash> foreign_origins;
  bool owns(const TxInput& in) const override { return !foreign_origins.count(in.origin_tx); }
  std::optional<Utxo> find(const Address& a) const override {
    auto it = utxos.find(a);
    if (it == utxos.end()) return std::nullopt;
    return it->second;
  }
};

class ValidationTest : public ::testing::Test {
 protected:
  void SetUp() override {
    alice = scheme.keypair_from_seed(crypto::sha256(as_bytes("alice")));
    bob = scheme.keypair_from_seed(crypto::sha256(as_bytes("bob")));
    genesis.fill(0xab);
    for (std::uint32_t i = 0; i < 3; ++i) {
      Utxo u{output_address(genesis, i), alice.public_key, 10, genesis, SpentState::unspent};
      view.utxos[u.address] = u;
    }
  }
  Transaction pay(std::uint32_t index, std::uint64_t amount, std::uint64_t fee) {
    Transaction tx;
    tx.inputs = {TxInput{output_address(genesis, index), genesis, 10, {}}};
    tx.outputs = {TxOutput{bob.public_key, amount}, TxOutput{alice.public_key, 10 - amount - fee}};
    tx.fee = fee;
    const crypto::KeyPair* signer = &alice;
    sign_transaction(tx, std::span(&signer, 1), scheme);
    return tx;
  }
  Decision check(const Transaction& tx) {
    ValidationBudget budget;
    return validate_tx_structure(tx, view, scheme, budget);
  }

  crypto::FastMacScheme scheme;
  crypto::KeyPair alice, bob;
  Hash genesis{};
  MapView view;
};

TEST_F(ValidationTest, WellFormedSpendIsYes) { EXPECT_EQ(check(pay(0, 6, 1)), Decision::yes); }

TEST_F(ValidationTest, SpentOrLockedInputIsNo) {
  const auto tx = pay(0, 6, 1);
  view.utxos[tx.inputs[0].utxo].spent_state = SpentState::spent;
  EXPECT_EQ(check(tx), Decision::no);
  view.utxos[tx.inputs[0].utxo].spent_state = SpentState::locked;
  EXPECT_EQ(check(tx), Decision::no);
}

TEST_F(ValidationTest, DefiniteViolationsAreNo) {
  auto inflated = pay(1, 6, 1);
  inflated.outputs[0].value = 100;
  inflated.id = tx_id(inflated);
  EXPECT_EQ(check(inflated), Decision::no);

  auto stale_id = pay(1, 6, 1);
  stale_id.fee = 2;
  EXPECT_EQ(check(stale_id), Decision::no);

  auto forged = pay(1, 6, 1);
  forged.inputs[0].owner_sig = scheme.sign(bob, forged.id);
  EXPECT_EQ(check(forged), Decision::no);

  auto wrong_value = pay(1, 6, 1);
  wrong_value.inputs[0].value = 11;
  wrong_value.outputs[1].value = 4;
  const crypto::KeyPair* signer = &alice;
  sign_transaction(wrong_value, std::span(&signer, 1), scheme);
  EXPECT_EQ(check(wrong_value), Decision::no);

  Transaction missing;
  missing.inputs = {TxInput{kZeroHash, genesis, 5, {}}};
  missing.outputs = {TxOutput{bob.public_key, 5}};
  sign_transaction(missing, std::span(&signer, 1), scheme);
  EXPECT_EQ(check(missing), Decision::no);

  auto duplicated = pay(2, 6, 1);
  duplicated.inputs.push_back(duplicated.inputs[0]);
  duplicated.outputs[1].value += 10;
  duplicated.id = tx_id(duplicated);
  EXPECT_EQ(check(duplicated), Decision::no);

  Transaction empty;
  empty.id = tx_id(empty);
  EXPECT_EQ(check(empty), Decision::no);
}

TEST_F(ValidationTest, ForeignInputsAreNotCheckedLocally) {
  Hash foreign{};
  foreign.fill(0xcd);
  view.foreign_origins.insert(foreign);
  Transaction tx;
  tx.inputs = {TxInput{output_address(foreign, 0), foreign, 7, {}}};
  tx.outputs = {TxOutput{bob.public_key, 7}};
  const crypto::KeyPair* signer = &bob;
  sign_transaction(tx, std::span(&signer, 1), scheme);
  EXPECT_EQ(check(tx), Decision::yes);
}

TEST_F(ValidationTest, ExhaustedBudgetIsUnknown) {
  ValidationBudget budget{2};
  std::vector<Decision> out;
  for (std::uint32_t i = 0; i < 3; ++i) out.push_back(validate_tx_structure(pay(i, 5, 0), view, scheme, budget));
  EXPECT_EQ(out, (std::vector<Decision>{Decision::yes, Decision::yes, Decision::unknown}));
}

}  // namespace
}  // namespace repchain::chain
