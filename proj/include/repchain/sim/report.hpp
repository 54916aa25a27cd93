#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "repchain/chain/types.hpp"

namespace repchain::sim {

using chain::Epoch;
using chain::Score;
using chain::ShardId;
using chain::Tick;
using chain::ValidatorId;

struct EpochMetrics {
  Epoch epoch = 0;
  Tick start = 0;            // first TxList
  Tick last_rb = 0;          // last RB confirmation of the epoch
  Tick next_start = 0;       // first TxList of the next epoch
  std::uint64_t submitted = 0;
  std::uint64_t committed = 0;   // by enclosing-RB confirmation tick
  std::uint64_t cross_committed = 0;
  std::uint64_t cross_aborted = 0;
  std::uint64_t rollings = 0;
  double throughput = 0;     // committed per simulated second over [start, next_start)
  double mean_latency = 0;   // ticks, submit to enclosing RB
  Tick transition_latency = 0;
};

struct RollingEvent {
  Epoch epoch = 0;
  ShardId shard = 0;
  ValidatorId leader;
  chain::Iteration iteration = 0;
  Tick tick = 0;
  bool leader_malicious = false;
};

struct ValidatorRecord {
  ValidatorId id;
  double capability = 1.0;
  bool malicious = false;
  std::vector<Score> earned;      // per epoch
  std::vector<Score> cumulative;  // window score at the end of each epoch
  std::uint64_t times_leader = 0;
};

struct ByteCounter {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct Violation {
  std::string invariant;
  std::string detail;
  Tick tick = 0;
};

struct LivenessMetrics {
  std::uint64_t intents = 0;
  std::uint64_t committed = 0;
  std::uint64_t within_two_epochs = 0;
  std::uint64_t reissued_versions = 0;
};

struct MetricsReport {
  Tick total_ticks = 0;
  std::uint64_t committed = 0;
  std::uint64_t submitted = 0;
  double throughput = 0;
  double mean_latency = 0;
  double mean_transition_latency = 0;
  std::vector<EpochMetrics> epochs;
  std::vector<RollingEvent> rollings;
  std::vector<ValidatorRecord> validators;
  std::map<std::string, ByteCounter> bytes;
  LivenessMetrics liveness;
  std::uint64_t invalid_commits = 0;
  std::uint64_t atomicity_violations = 0;
  std::uint64_t agreement_violations = 0;
  std::uint64_t cross_committed = 0;
  std::uint64_t cross_aborted = 0;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  /// Committed per simulated second over epochs [first, last] (1-based,
  /// inclusive), measured from each epoch's start to the next one's.
  double throughput_over(Epoch first, Epoch last, double seconds_per_tick) const;
};

nlohmann::json to_json(const MetricsReport& r);

std::string epochs_csv(const MetricsReport& r);
std::string reputation_csv(const MetricsReport& r);
std::string rollings_csv(const MetricsReport& r);
std::string bytes_csv(const MetricsReport& r);

}  // namespace repchain::sim
