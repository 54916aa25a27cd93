#pragma once

#include <filesystem>
#include <string>

#include "repchain/sim/config.hpp"
#include "repchain/sim/report.hpp"

namespace repchain::sim {

struct RunOptions {
  /// When set, every sealed state block is also written here.
  std::filesystem::path state_block_dir;
};

struct RunResult {
  MetricsReport report;
  /// Newline-delimited JSON, empty unless the config asks for a trace.
  std::string trace;
};

/// Runs the scenario end to end: assignment, pipelined consensus
/// iterations, reputation blocks, cross-shard coordination and state-block
/// synchronization for every epoch. Stops at the first invariant violation,
/// which is recorded in the report. Throws ConfigError on a bad config.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace repchain::sim
