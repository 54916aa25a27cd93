#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "repchain/bytes.hpp"
#include "repchain/chain/score.hpp"
#include "repchain/crypto/cosign.hpp"
#include "repchain/crypto/signature.hpp"

namespace repchain::chain {

using crypto::CollectiveSignature;
using crypto::PublicKey;
using crypto::Signature;

using Address = Hash;
using TxId = Hash;
using ShardId = std::uint32_t;
using Epoch = std::uint64_t;
using Iteration = std::uint64_t;
using Tick = std::uint64_t;

struct ValidatorId {
  std::uint32_t value = 0;
  auto operator<=>(const ValidatorId&) const = default;
};

enum class SpentState : std::uint8_t { unspent = 0, locked = 1, spent = 2 };

/// unspent->locked, locked->unspent, locked->spent, unspent->spent.
bool can_transition(SpentState from, SpentState to);
std::string_view to_string(SpentState s);

struct Utxo {
  Address address{};
  PublicKey owner{};
  std::uint64_t value = 0;
  TxId origin_tx{};
  SpentState spent_state = SpentState::unspent;

  bool operator==(const Utxo&) const = default;
};

/// Reference to a UTXO being spent. origin_tx and value are carried with the
/// reference so that a shard which does not hold the UTXO can still route the
/// input and check the value balance.
struct TxInput {
  Address utxo{};
  TxId origin_tx{};
  std::uint64_t value = 0;
  Signature owner_sig{};

  bool operator==(const TxInput&) const = default;
};

struct TxOutput {
  PublicKey owner{};
  std::uint64_t value = 0;

  bool operator==(const TxOutput&) const = default;
};

struct Transaction {
  TxId id{};
  std::vector<TxInput> inputs;
  std::vector<TxOutput> outputs;
  std::uint64_t fee = 0;
  Tick submit_time = 0;

  bool operator==(const Transaction&) const = default;
};

/// Input references, outputs and fee; signatures and submit time excluded.
Bytes tx_body_bytes(const Transaction& tx);
TxId tx_id(const Transaction& tx);
/// Address of output `index` of transaction `id`.
Address output_address(const TxId& id, std::uint32_t index);
/// Sum of input values, or nullopt on overflow.
std::optional<std::uint64_t> input_total(const Transaction& tx);
std::optional<std::uint64_t> output_total(const Transaction& tx);

enum class Decision : std::uint8_t { no = 0, yes = 1, unknown = 2 };
std::string_view to_string(Decision d);

struct TxList {
  Epoch epoch = 0;
  Iteration iteration = 0;
  ShardId shard = 0;
  std::vector<TxId> tx_hashes;
  Signature leader_sig{};

  bool operator==(const TxList&) const = default;
};

/// Signature over one output-shard cell of a TxList: the positions whose
/// transactions are destined to `destination`.
struct SubsetSignature {
  ShardId destination = 0;
  Signature sig{};

  bool operator==(const SubsetSignature&) const = default;
};

struct TxDec {
  Epoch epoch = 0;
  Iteration iteration = 0;
  ShardId shard = 0;
  ValidatorId voter;
  std::vector<Decision> decisions;
  /// One per non-empty cell, ascending destination.
  std::vector<SubsetSignature> subset_sigs;
  /// Over everything above; binds the vote even when the list is empty.
  Signature sig{};

  bool operator==(const TxDec&) const = default;
};

struct TxDecSet {
  Epoch epoch = 0;
  Iteration iteration = 0;
  ShardId shard = 0;
  /// Ascending voter id.
  std::vector<TxDec> decs;
  Signature leader_sig{};

  bool operator==(const TxDecSet&) const = default;
};

struct TransactionBlock {
  Epoch epoch = 0;
  Iteration iteration = 0;
  ShardId shard = 0;
  Hash prev_tb_hash{};
  std::vector<Transaction> txs;
  Signature leader_sig{};

  bool operator==(const TransactionBlock&) const = default;
};

struct ReputationBlock {
  Epoch epoch = 0;
  ShardId shard = 0;
  Hash prev_rb_hash{};
  std::vector<Hash> confirmed_tb_hashes;
  std::map<ValidatorId, Score> score_deltas;
  std::optional<std::vector<Hash>> prev_state_block_hashes;
  CollectiveSignature cosig;

  bool operator==(const ReputationBlock&) const = default;
};

struct StateBlock {
  Epoch epoch = 0;
  ShardId shard = 0;
  std::map<ValidatorId, Score> cumulative_scores;
  /// Ascending address.
  std::vector<Utxo> utxo_set;
  std::uint64_t pow_nonce = 0;
  CollectiveSignature cosig;

  bool operator==(const StateBlock&) const = default;
};

/// Message a member sends when it refuses a TB.
struct Warning {
  Epoch epoch = 0;
  Iteration iteration = 0;
  ShardId shard = 0;
  ValidatorId sender;
  std::uint8_t reason = 0;
  Signature sig{};

  bool operator==(const Warning&) const = default;
};

/// One voter's share of a cross-shard proof: its decisions on the cell and
/// the subset signature that covers them.
struct ExcerptVote {
  ValidatorId voter;
  std::vector<Decision> decisions;
  Signature subset_sig{};

  bool operator==(const ExcerptVote&) const = default;
};

/// TxDecSet restricted to the transactions destined to one shard. Each vote
/// verifies independently against the voter's key.
struct ProofExcerpt {
  Epoch epoch = 0;
  Iteration iteration = 0;
  ShardId source = 0;
  ShardId destination = 0;
  std::vector<TxId> tx_hashes;
  std::vector<ExcerptVote> votes;

  bool operator==(const ProofExcerpt&) const = default;
};

// Signing bodies: the canonical encoding of every field the signature covers.
Bytes signing_bytes(const TxList& v);
Bytes signing_bytes(const TxDec& v);
Bytes signing_bytes(const TxDecSet& v);
Bytes signing_bytes(const TransactionBlock& v);
Bytes signing_bytes(const ReputationBlock& v);
Bytes signing_bytes(const StateBlock& v);
Bytes signing_bytes(const Warning& v);
/// Bytes a subset signature covers for cell `destination`.
Bytes subset_signing_bytes(Epoch epoch, Iteration iteration, ShardId source, ShardId destination,
                           ValidatorId voter, std::span<const TxId> cell_hashes,
                           std::span<const Decision> cell_decisions);

Hash block_hash(const TransactionBlock& b);
Hash block_hash(const ReputationBlock& b);
Hash block_hash(const StateBlock& b);
/// Digest the state-block PoW is computed over: the signed body plus cosig.
Hash sealed_body_hash(const StateBlock& b);

}  // namespace repchain::chain
