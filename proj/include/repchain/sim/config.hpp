#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "repchain/bytes.hpp"
#include "repchain/crypto/signature.hpp"

namespace repchain::sim {

enum class Adversary : std::uint8_t { none, simple, camouflage, observe_act };
enum class LeaderSelection : std::uint8_t { reputation, random };

std::string_view to_string(Adversary a);
std::string_view to_string(LeaderSelection s);

/// Raised for unreadable or inconsistent scenarios; `field` names the
/// offending key.
struct ConfigError : std::runtime_error {
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field(std::move(field)) {}
  std::string field;
};

struct ScenarioConfig {
  std::uint32_t n = 40;
  std::uint32_t k = 2;
  std::uint32_t w = 10;                 // reputation window in epochs
  std::uint32_t txlist_capacity = 32;   // B
  std::uint32_t rho = 3;                // TBs per RB
  std::uint32_t delta = 1;              // ticks per honest hop
  std::uint32_t epochs = 3;
  std::uint32_t epoch_ticks = 40;       // TxList issuing period per epoch
  std::uint32_t drain_ticks = 400;      // extra time the last epoch may take to empty the mempools
  int pow_difficulty = 12;
  Adversary adversary = Adversary::none;
  double malicious_fraction = 0.2;      // ignored when adversary is none
  double capability_min = 1.0;
  double capability_max = 1.0;
  double cross_shard_fraction = 0.2;
  double workload_rate = 0.1;           // submission attempts per validator per tick
  std::uint32_t genesis_utxos = 4;
  std::uint64_t genesis_value = 1000;
  std::uint32_t abort_timeout = 20;
  std::uint32_t leader_cost = 1;        // ticks a c = 1 leader needs to assemble a block
  LeaderSelection leader_selection = LeaderSelection::reputation;
  std::uint32_t regions = 2;
  double seconds_per_tick = 1.0;
  crypto::SchemeKind scheme = crypto::SchemeKind::fast_mac;
  std::uint64_t seed = 0;
  bool trace = false;

  std::uint32_t m() const { return n / k; }
  std::uint32_t malicious_count() const;
  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

/// Strict parse: unknown keys and mistyped values are errors.
ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);
ScenarioConfig load_config(const std::filesystem::path& file);

/// "key=value" with the value parsed as JSON when possible, else as a string.
void apply_override(ScenarioConfig& c, std::string_view assignment);

/// sha256 of the canonical JSON dump.
Hash config_hash(const ScenarioConfig& c);

}  // namespace repchain::sim
