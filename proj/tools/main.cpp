#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "repchain/assignment/assignment.hpp"
#include "repchain/crypto/hash.hpp"
#include "repchain/security/analysis.hpp"
#include "repchain/sim/config.hpp"
#include "repchain/sim/report.hpp"
#include "repchain/sim/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace repchain;

namespace {

constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// ---- simulate ----------------------------------------------------------

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string sweep;
  std::string out;
  bool trace = false;
  bool state_blocks = false;
};

/// Writes one run's artifacts; returns the report.
sim::MetricsReport run_into(const sim::ScenarioConfig& cfg, const fs::path& dir, bool state_blocks) {
  fs::create_directories(dir);
  sim::RunOptions opts;
  if (state_blocks) {
    opts.state_block_dir = dir / "state_blocks";
    fs::create_directories(opts.state_block_dir);
  }
  auto result = sim::run_scenario(cfg, opts);
  const json manifest{{"version", REPCHAIN_VERSION},
                      {"config_hash", to_hex(sim::config_hash(cfg))},
                      {"config", sim::to_json(cfg)}};
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file(dir / "report.json", sim::to_json(result.report).dump(2) + "\n");
  write_file(dir / "epochs.csv", sim::epochs_csv(result.report));
  write_file(dir / "reputation.csv", sim::reputation_csv(result.report));
  write_file(dir / "rollings.csv", sim::rollings_csv(result.report));
  write_file(dir / "bytes.csv", sim::bytes_csv(result.report));
  if (cfg.trace) write_file(dir / "trace.ndjson", result.trace);
  return std::move(result.report);
}

void print_summary(const std::string& label, const sim::MetricsReport& r) {
  std::printf("%s: committed %llu/%llu, throughput %.4f tx/s, latency %.2f ticks, rollings %zu, %s\n", label.c_str(),
              static_cast<unsigned long long>(r.committed), static_cast<unsigned long long>(r.submitted), r.throughput,
              r.mean_latency, r.rollings.size(), r.ok() ? "ok" : "VIOLATION");
  for (const auto& v : r.violations) {
    std::printf("  violation [%s] at tick %llu: %s\n", v.invariant.c_str(), static_cast<unsigned long long>(v.tick),
                v.detail.c_str());
  }
}

int cmd_simulate(const SimulateArgs& a) {
  sim::ScenarioConfig base;
  if (!a.config.empty()) base = sim::load_config(a.config);
  for (const auto& o : a.overrides) sim::apply_override(base, o);
  if (a.seed) base.seed = *a.seed;
  if (a.trace) base.trace = true;
  base.validate();
  const fs::path out(a.out);

  if (a.sweep.empty()) {
    const auto r = run_into(base, out, a.state_blocks);
    print_summary(out.string(), r);
    return r.ok() ? 0 : kExitViolation;
  }

  const auto eq = a.sweep.find('=');
  if (eq == std::string::npos) throw sim::ConfigError(a.sweep, "sweep must look like key=v1,v2,...");
  const std::string key = a.sweep.substr(0, eq);
  std::vector<std::string> values;
  std::stringstream ss(a.sweep.substr(eq + 1));
  for (std::string v; std::getline(ss, v, ',');) {
    if (!v.empty()) values.push_back(v);
  }
  if (values.empty()) throw sim::ConfigError(key, "sweep lists no values");
  std::vector<sim::ScenarioConfig> configs;
  for (const auto& v : values) {
    auto c = base;
    sim::apply_override(c, key + "=" + v);
    configs.push_back(c);
  }

  // Independent runs share nothing, so they go to worker threads.
  std::vector<sim::MetricsReport> reports(configs.size());
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < configs.size(); start += workers) {
    std::vector<std::future<sim::MetricsReport>> batch;
    for (std::size_t i = start; i < std::min(configs.size(), start + workers); ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] {
        return run_into(configs[i], out / (key + "=" + values[i]), a.state_blocks);
      }));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) reports[start + i] = batch[i].get();
  }

  std::ostringstream csv;
  csv << key << ",throughput,mean_latency,committed,submitted,rollings,ok\n";
  bool ok = true;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    csv << values[i] << ',' << r.throughput << ',' << r.mean_latency << ',' << r.committed << ',' << r.submitted << ','
        << r.rollings.size() << ',' << (r.ok() ? 1 : 0) << '\n';
    print_summary(key + "=" + values[i], r);
    ok = ok && r.ok();
  }
  write_file(out / "scaling.csv", csv.str());
  return ok ? 0 : kExitViolation;
}

// ---- analyze -----------------------------------------------------------

struct AnalyzeArgs {
  std::uint64_t n = 0, k = 0, g = 0, exposed = 0;
  bool printed_cap = false;
  bool brute_force = false;
  std::string sweep;
};

security::Rational failure_for(const AnalyzeArgs& a, std::uint64_t exposed) {
  if (exposed == 0 && !a.printed_cap) return security::failure_probability(a.n, a.k, a.g);
  const auto bound =
      a.printed_cap ? security::CamouflageBound::printed_cap : security::CamouflageBound::capacity_corrected;
  return security::camouflage(a.n, a.k, a.g, exposed, bound).failure;
}

int cmd_analyze(const AnalyzeArgs& a) {
  if (a.k == 0 || a.n == 0) throw std::invalid_argument("n and k must be positive");
  if (a.n % a.k != 0) {
    throw std::invalid_argument("k = " + std::to_string(a.k) + " does not divide n = " + std::to_string(a.n) +
                                "; shards must have equal size");
  }
  if (a.g > a.n) throw std::invalid_argument("g cannot exceed n");

  if (!a.sweep.empty()) {
    if (a.sweep.rfind("exposed=", 0) != 0) throw std::invalid_argument("only exposed=LO..HI sweeps are supported");
    const auto range = a.sweep.substr(8);
    const auto dots = range.find("..");
    if (dots == std::string::npos) throw std::invalid_argument("sweep range must look like LO..HI");
    const auto lo = std::stoull(range.substr(0, dots));
    const auto hi = std::stoull(range.substr(dots + 2));
    if (lo > hi || hi > a.g) throw std::invalid_argument("sweep range must satisfy LO <= HI <= g");
    std::printf("exposed,failure,exact\n");
    for (auto x = lo; x <= hi; ++x) {
      const auto f = failure_for(a, x);
      std::printf("%llu,%s,%s\n", static_cast<unsigned long long>(x), security::to_decimal(f).c_str(),
                  security::to_fraction(f).c_str());
    }
    return 0;
  }

  if (a.exposed > a.g) throw std::invalid_argument("exposed cannot exceed g");
  const auto f = failure_for(a, a.exposed);
  std::printf("P(failure) = %s\n", security::to_decimal(f).c_str());
  std::printf("exact      = %s\n", security::to_fraction(f).c_str());
  if (a.brute_force) {
    const auto b = security::brute_force_failure(a.n, a.k, a.g, a.exposed);
    const bool match = b == f;
    std::printf("brute      = %s %s\n", security::to_decimal(b).c_str(), match ? "[match]" : "[MISMATCH]");
    if (!match) return kExitViolation;
  }
  return 0;
}

// ---- report ------------------------------------------------------------

int cmd_report(const std::string& dir_arg, bool as_csv) {
  const fs::path dir(dir_arg);
  const char* required[] = {"manifest.json", "report.json", "epochs.csv", "reputation.csv", "rollings.csv",
                            "bytes.csv"};
  std::vector<std::string> missing;
  for (const char* f : required) {
    if (!fs::exists(dir / f)) missing.emplace_back(f);
  }
  if (!missing.empty()) {
    std::fprintf(stderr, "report: %s is missing:\n", dir.string().c_str());
    for (const auto& f : missing) std::fprintf(stderr, "  %s\n", f.c_str());
    return kExitUsage;
  }
  const json r = json::parse(read_file(dir / "report.json"));
  const json m = json::parse(read_file(dir / "manifest.json"));
  const double spt = m["config"]["seconds_per_tick"].get<double>();
  (void)spt;

  if (as_csv) {
    std::printf("epoch,throughput,mean_latency,transition_latency,committed,rollings\n");
    for (const auto& e : r["epochs"]) {
      std::printf("%llu,%g,%g,%llu,%llu,%llu\n", e["epoch"].get<unsigned long long>(), e["throughput"].get<double>(),
                  e["mean_latency"].get<double>(), e["transition_latency"].get<unsigned long long>(),
                  e["committed"].get<unsigned long long>(), e["rollings"].get<unsigned long long>());
    }
    return 0;
  }

  std::printf("Per-epoch throughput\n");
  std::printf("%6s %12s %12s %12s %10s %9s\n", "epoch", "tx/s", "latency", "transition", "committed", "rollings");
  for (const auto& e : r["epochs"]) {
    std::printf("%6llu %12.4f %12.2f %12llu %10llu %9llu\n", e["epoch"].get<unsigned long long>(),
                e["throughput"].get<double>(), e["mean_latency"].get<double>(),
                e["transition_latency"].get<unsigned long long>(), e["committed"].get<unsigned long long>(),
                e["rollings"].get<unsigned long long>());
  }

  std::printf("\nCapability vs reputation (final epoch window score)\n");
  std::printf("%9s %10s %9s %16s %7s\n", "validator", "capability", "malicious", "reputation", "leader");
  std::vector<json> vs(r["validators"].begin(), r["validators"].end());
  std::sort(vs.begin(), vs.end(), [](const json& x, const json& y) {
    const double cx = x["capability"].get<double>(), cy = y["capability"].get<double>();
    return cx != cy ? cx < cy : x["id"].get<unsigned>() < y["id"].get<unsigned>();
  });
  for (const auto& v : vs) {
    const auto& cum = v["cumulative"];
    std::printf("%9u %10.3f %9s %16s %7llu\n", v["id"].get<unsigned>(), v["capability"].get<double>(),
                v["malicious"].get<bool>() ? "yes" : "no",
                cum.empty() ? "-" : cum.back().get<std::string>().c_str(), v["times_leader"].get<unsigned long long>());
  }

  std::printf("\nRolling events per epoch\n");
  std::printf("%6s %9s %18s\n", "epoch", "rollings", "malicious leaders");
  for (const auto& e : r["epochs"]) {
    const auto ep = e["epoch"].get<unsigned long long>();
    unsigned long long bad = 0;
    for (const auto& x : r["rollings"]) {
      if (x["epoch"].get<unsigned long long>() == ep && x["leader_malicious"].get<bool>()) ++bad;
    }
    std::printf("%6llu %9llu %18llu\n", ep, e["rollings"].get<unsigned long long>(), bad);
  }
  std::printf("\nInvariant checks: %s\n", r["ok"].get<bool>() ? "passed" : "FAILED");
  return 0;
}

// ---- assign ------------------------------------------------------------

int cmd_assign(std::uint32_t n, std::uint32_t k, std::uint64_t seed) {
  if (k == 0 || n % k != 0) throw std::invalid_argument("k must divide n");
  reputation::ScoreMap scores;
  for (std::uint32_t i = 0; i < n; ++i) scores[chain::ValidatorId{i}] = chain::Score{};
  crypto::Sha256 h;
  h.update(as_bytes("repchain-assign"));
  h.update_u64(seed);
  const auto res = assignment::assign_epoch(h.finish(), scores, k);
  for (std::size_t s = 0; s < res.shards.size(); ++s) {
    std::printf("shard %zu leader %u members", s, res.leaders[s].value);
    for (auto v : res.shards[s]) std::printf(" %u", v.value);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RepChain sharding simulator and security analyzer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", REPCHAIN_VERSION);

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario and write its report");
  sim_cmd->add_option("--config", sa.config, "Scenario JSON file")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sa.seed, "Master seed (overrides the config)");
  sim_cmd->add_option("--override", sa.overrides, "key=value config override (repeatable)");
  sim_cmd->add_option("--sweep", sa.sweep, "key=v1,v2,... runs one scenario per value");
  sim_cmd->add_option("--out", sa.out, "Output directory")->required();
  sim_cmd->add_flag("--trace", sa.trace, "Also write trace.ndjson");
  sim_cmd->add_flag("--state-blocks", sa.state_blocks, "Also write every state block");

  AnalyzeArgs aa;
  auto* an_cmd = app.add_subcommand("analyze", "Shard failure probability");
  an_cmd->alias("analyze-security");
  an_cmd->add_option("--n", aa.n, "Validators")->required();
  an_cmd->add_option("--k", aa.k, "Shards")->required();
  an_cmd->add_option("--g", aa.g, "Malicious validators")->required();
  an_cmd->add_option("--exposed", aa.exposed, "Malicious validators already spread by the camouflage attack");
  an_cmd->add_flag("--printed-cap", aa.printed_cap, "Use the per-shard cap exactly as printed");
  an_cmd->add_flag("--brute-force", aa.brute_force, "Cross-check by exhaustive enumeration");
  an_cmd->add_option("--sweep", aa.sweep, "exposed=LO..HI, CSV output");

  std::string report_dir;
  bool report_csv = false;
  auto* rep_cmd = app.add_subcommand("report", "Summarize a run directory");
  rep_cmd->add_option("dir", report_dir, "Run directory")->required();
  rep_cmd->add_flag("--csv", report_csv, "Per-epoch table as CSV");

  std::uint32_t as_n = 40, as_k = 2;
  std::uint64_t as_seed = 0;
  auto* as_cmd = app.add_subcommand("assign", "Show a first-epoch shard assignment");
  as_cmd->add_option("--n", as_n, "Validators");
  as_cmd->add_option("--k", as_k, "Shards");
  as_cmd->add_option("--seed", as_seed, "Seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim_cmd) return cmd_simulate(sa);
    if (*an_cmd) return cmd_analyze(aa);
    if (*rep_cmd) return cmd_report(report_dir, report_csv);
    if (*as_cmd) return cmd_assign(as_n, as_k, as_seed);
  } catch (const sim::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}
