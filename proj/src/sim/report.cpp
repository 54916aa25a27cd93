#include "repchain/sim/report.hpp"

#include <sstream>

namespace repchain::sim {

using nlohmann::json;

double MetricsReport::throughput_over(Epoch first, Epoch last, double seconds_per_tick) const {
  std::uint64_t committed_sum = 0;
  Tick ticks = 0;
  for (const auto& e : epochs) {
    if (e.epoch < first || e.epoch > last) continue;
    committed_sum += e.committed;
    ticks += e.next_start - e.start;
  }
  if (ticks == 0) return 0;
  return static_cast<double>(committed_sum) / (static_cast<double>(ticks) * seconds_per_tick);
}

json to_json(const MetricsReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"start", e.start},
                      {"last_rb", e.last_rb},
                      {"next_start", e.next_start},
                      {"submitted", e.submitted},
                      {"committed", e.committed},
                      {"cross_committed", e.cross_committed},
                      {"cross_aborted", e.cross_aborted},
                      {"rollings", e.rollings},
                      {"throughput", e.throughput},
                      {"mean_latency", e.mean_latency},
                      {"transition_latency", e.transition_latency}});
  }
  json rollings = json::array();
  for (const auto& x : r.rollings) {
    rollings.push_back({{"epoch", x.epoch},
                        {"shard", x.shard},
                        {"leader", x.leader.value},
                        {"iteration", x.iteration},
                        {"tick", x.tick},
                        {"leader_malicious", x.leader_malicious}});
  }
  json validators = json::array();
  for (const auto& v : r.validators) {
    json earned = json::array(), cumulative = json::array();
    for (const auto& s : v.earned) earned.push_back(s.to_string());
    for (const auto& s : v.cumulative) cumulative.push_back(s.to_string());
    validators.push_back({{"id", v.id.value},
                          {"capability", v.capability},
                          {"malicious", v.malicious},
                          {"times_leader", v.times_leader},
                          {"earned", earned},
                          {"cumulative", cumulative}});
  }
  json bytes = json::object();
  for (const auto& [name, c] : r.bytes) bytes[name] = {{"messages", c.messages}, {"bytes", c.bytes}};
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"invariant", v.invariant}, {"detail", v.detail}, {"tick", v.tick}});
  }
  return json{{"total_ticks", r.total_ticks},
              {"submitted", r.submitted},
              {"committed", r.committed},
              {"throughput", r.throughput},
              {"mean_latency", r.mean_latency},
              {"mean_transition_latency", r.mean_transition_latency},
              {"cross_committed", r.cross_committed},
              {"cross_aborted", r.cross_aborted},
              {"rolling_events", r.rollings.size()},
              {"invalid_commits", r.invalid_commits},
              {"atomicity_violations", r.atomicity_violations},
              {"agreement_violations", r.agreement_violations},
              {"liveness",
               {{"intents", r.liveness.intents},
                {"committed", r.liveness.committed},
                {"within_two_epochs", r.liveness.within_two_epochs},
                {"reissued_versions", r.liveness.reissued_versions}}},
              {"epochs", epochs},
              {"rollings", rollings},
              {"validators", validators},
              {"bytes", bytes},
              {"violations", violations},
              {"ok", r.ok()}};
}

std::string epochs_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "epoch,start,last_rb,next_start,submitted,committed,cross_committed,cross_aborted,rollings,throughput,"
        "mean_latency,transition_latency\n";
  for (const auto& e : r.epochs) {
    os << e.epoch << ',' << e.start << ',' << e.last_rb << ',' << e.next_start << ',' << e.submitted << ','
       << e.committed << ',' << e.cross_committed << ',' << e.cross_aborted << ',' << e.rollings << ','
       << e.throughput << ',' << e.mean_latency << ',' << e.transition_latency << '\n';
  }
  return os.str();
}

std::string reputation_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "validator,capability,malicious,epoch,earned,cumulative\n";
  for (const auto& v : r.validators) {
    for (std::size_t e = 0; e < v.cumulative.size(); ++e) {
      os << v.id.value << ',' << v.capability << ',' << (v.malicious ? 1 : 0) << ',' << e + 1 << ','
         << v.earned[e].to_string() << ',' << v.cumulative[e].to_string() << '\n';
    }
  }
  return os.str();
}

std::string rollings_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "epoch,shard,leader,iteration,tick,leader_malicious\n";
  for (const auto& x : r.rollings) {
    os << x.epoch << ',' << x.shard << ',' << x.leader.value << ',' << x.iteration << ',' << x.tick << ','
       << (x.leader_malicious ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string bytes_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "message,count,bytes\n";
  for (const auto& [name, c] : r.bytes) os << name << ',' << c.messages << ',' << c.bytes << '\n';
  return os.str();
}

}  // namespace repchain::sim
