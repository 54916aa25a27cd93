#include "repchain/sim/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "repchain/crypto/hash.hpp"
#include "repchain/crypto/pow.hpp"

namespace repchain::sim {
namespace {

using nlohmann::json;

template <class E>
E enum_from(const std::string& field, const json& v, std::initializer_list<std::pair<std::string_view, E>> names) {
  if (!v.is_string()) throw ConfigError(field, "expected a string");
  const auto s = v.get<std::string>();
  for (const auto& [name, e] : names) {
    if (s == name) return e;
  }
  std::string opts;
  for (const auto& [name, e] : names) opts += (opts.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(field, "unknown value '" + s + "' (expected one of: " + opts + ")");
}

template <class T>
T unsigned_from(const std::string& field, const json& v) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(field, "expected a non-negative integer");
  }
  const auto x = v.get<std::uint64_t>();
  if (x > std::numeric_limits<T>::max()) throw ConfigError(field, "value too large");
  return static_cast<T>(x);
}

double number_from(const std::string& field, const json& v) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  return v.get<double>();
}

using Setter = std::function<void(ScenarioConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto u32 = [&t](const char* name, std::uint32_t ScenarioConfig::*field) {
      t[name] = [name, field](ScenarioConfig& c, const json& v) { c.*field = unsigned_from<std::uint32_t>(name, v); };
    };
    auto real = [&t](const char* name, double ScenarioConfig::*field) {
      t[name] = [name, field](ScenarioConfig& c, const json& v) { c.*field = number_from(name, v); };
    };
    u32("n", &ScenarioConfig::n);
    u32("k", &ScenarioConfig::k);
    u32("w", &ScenarioConfig::w);
    u32("txlist_capacity", &ScenarioConfig::txlist_capacity);
    u32("rho", &ScenarioConfig::rho);
    u32("delta", &ScenarioConfig::delta);
    u32("epochs", &ScenarioConfig::epochs);
    u32("epoch_ticks", &ScenarioConfig::epoch_ticks);
    u32("drain_ticks", &ScenarioConfig::drain_ticks);
    u32("genesis_utxos", &ScenarioConfig::genesis_utxos);
    u32("abort_timeout", &ScenarioConfig::abort_timeout);
    u32("leader_cost", &ScenarioConfig::leader_cost);
    u32("regions", &ScenarioConfig::regions);
    real("malicious_fraction", &ScenarioConfig::malicious_fraction);
    real("capability_min", &ScenarioConfig::capability_min);
    real("capability_max", &ScenarioConfig::capability_max);
    real("cross_shard_fraction", &ScenarioConfig::cross_shard_fraction);
    real("workload_rate", &ScenarioConfig::workload_rate);
    real("seconds_per_tick", &ScenarioConfig::seconds_per_tick);
    t["pow_difficulty"] = [](ScenarioConfig& c, const json& v) {
      c.pow_difficulty = static_cast<int>(unsigned_from<std::uint32_t>("pow_difficulty", v));
    };
    t["genesis_value"] = [](ScenarioConfig& c, const json& v) {
      c.genesis_value = unsigned_from<std::uint64_t>("genesis_value", v);
    };
    t["seed"] = [](ScenarioConfig& c, const json& v) { c.seed = unsigned_from<std::uint64_t>("seed", v); };
    t["trace"] = [](ScenarioConfig& c, const json& v) {
      if (!v.is_boolean()) throw ConfigError("trace", "expected true or false");
      c.trace = v.get<bool>();
    };
    t["adversary"] = [](ScenarioConfig& c, const json& v) {
      c.adversary = enum_from<Adversary>("adversary", v,
                                         {{"none", Adversary::none},
                                          {"simple", Adversary::simple},
                                          {"camouflage", Adversary::camouflage},
                                          {"observe_act", Adversary::observe_act}});
    };
    t["leader_selection"] = [](ScenarioConfig& c, const json& v) {
      c.leader_selection = enum_from<LeaderSelection>(
          "leader_selection", v, {{"reputation", LeaderSelection::reputation}, {"random", LeaderSelection::random}});
    };
    t["scheme"] = [](ScenarioConfig& c, const json& v) {
      c.scheme = enum_from<crypto::SchemeKind>("scheme", v,
                                               {{"fast_mac", crypto::SchemeKind::fast_mac},
                                                {"schnorr", crypto::SchemeKind::schnorr}});
    };
    return t;
  }();
  return table;
}

}  // namespace

std::string_view to_string(Adversary a) {
  switch (a) {
    case Adversary::none: return "none";
    case Adversary::simple: return "simple";
    case Adversary::camouflage: return "camouflage";
    case Adversary::observe_act: return "observe_act";
  }
  return "none";
}

std::string_view to_string(LeaderSelection s) { return s == LeaderSelection::random ? "random" : "reputation"; }

std::uint32_t ScenarioConfig::malicious_count() const {
  if (adversary == Adversary::none) return 0;
  return static_cast<std::uint32_t>(std::floor(malicious_fraction * n + 1e-9));
}

void ScenarioConfig::validate() const {
  if (n == 0) throw ConfigError("n", "must be positive");
  if (k == 0) throw ConfigError("k", "must be positive");
  if (n % k != 0) throw ConfigError("k", "must divide n (" + std::to_string(n) + ")");
  if (w == 0) throw ConfigError("w", "must be at least 1");
  if (txlist_capacity == 0) throw ConfigError("txlist_capacity", "must be at least 1");
  if (rho == 0) throw ConfigError("rho", "must be at least 1");
  if (delta == 0) throw ConfigError("delta", "must be at least 1 tick");
  if (epochs == 0) throw ConfigError("epochs", "must be at least 1");
  if (epoch_ticks == 0) throw ConfigError("epoch_ticks", "must be at least 1");
  if (pow_difficulty < 0 || pow_difficulty > crypto::kMaxPowDifficulty) {
    throw ConfigError("pow_difficulty", "must lie in [0, 32]");
  }
  if (!(malicious_fraction >= 0.0 && malicious_fraction <= 1.0 / 3.0)) {
    throw ConfigError("malicious_fraction", "must lie in [0, 1/3]");
  }
  if (3 * static_cast<std::uint64_t>(malicious_count()) >= n && malicious_count() > 0) {
    throw ConfigError("malicious_fraction", "malicious count must stay below n/3");
  }
  if (!(capability_min > 0.0 && capability_min <= capability_max && capability_max <= 1.0)) {
    throw ConfigError("capability_min", "need 0 < capability_min <= capability_max <= 1");
  }
  if (!(cross_shard_fraction >= 0.0 && cross_shard_fraction <= 1.0)) {
    throw ConfigError("cross_shard_fraction", "must lie in [0, 1]");
  }
  if (!(workload_rate >= 0.0 && workload_rate <= 1.0)) throw ConfigError("workload_rate", "must lie in [0, 1]");
  if (genesis_utxos == 0) throw ConfigError("genesis_utxos", "must be at least 1");
  if (genesis_value < 16) throw ConfigError("genesis_value", "must be at least 16");
  if (abort_timeout == 0) throw ConfigError("abort_timeout", "must be at least 1 tick");
  if (leader_cost == 0) throw ConfigError("leader_cost", "must be at least 1 tick");
  if (regions == 0) throw ConfigError("regions", "must be at least 1");
  if (!(seconds_per_tick > 0.0)) throw ConfigError("seconds_per_tick", "must be positive");
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  ScenarioConfig c;
  const auto& table = setters();
  for (const auto& [key, value] : j.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError(key, "unknown field");
    it->second(c, value);
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const ScenarioConfig& c) {
  return json{{"n", c.n},
              {"k", c.k},
              {"w", c.w},
              {"txlist_capacity", c.txlist_capacity},
              {"rho", c.rho},
              {"delta", c.delta},
              {"epochs", c.epochs},
              {"epoch_ticks", c.epoch_ticks},
              {"drain_ticks", c.drain_ticks},
              {"pow_difficulty", c.pow_difficulty},
              {"adversary", to_string(c.adversary)},
              {"malicious_fraction", c.malicious_fraction},
              {"capability_min", c.capability_min},
              {"capability_max", c.capability_max},
              {"cross_shard_fraction", c.cross_shard_fraction},
              {"workload_rate", c.workload_rate},
              {"genesis_utxos", c.genesis_utxos},
              {"genesis_value", c.genesis_value},
              {"abort_timeout", c.abort_timeout},
              {"leader_cost", c.leader_cost},
              {"leader_selection", to_string(c.leader_selection)},
              {"regions", c.regions},
              {"seconds_per_tick", c.seconds_per_tick},
              {"scheme", c.scheme == crypto::SchemeKind::schnorr ? "schnorr" : "fast_mac"},
              {"seed", c.seed},
              {"trace", c.trace}};
}

ScenarioConfig load_config(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError("<file>", "cannot open " + file.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

void apply_override(ScenarioConfig& c, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(std::string(assignment), "override must look like key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json j = to_json(c);
  if (!j.contains(key)) throw ConfigError(key, "unknown field");
  j[key] = value;
  c = config_from_json(j);
}

Hash config_hash(const ScenarioConfig& c) { return crypto::sha256(as_bytes(to_json(c).dump())); }

}  // namespace repchain::sim
