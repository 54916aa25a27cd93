#include "repchain/reputation/ledger.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace repchain::reputation {

bool ScoringPolicy::valid() const {
  const Score zero;
  if (!(wrong_yes <= wrong_no && wrong_no <= unknown && unknown <= correct)) return false;
  const Score abs_yes = wrong_yes < zero ? -wrong_yes : wrong_yes;
  const Score abs_no = wrong_no < zero ? -wrong_no : wrong_no;
  return abs_yes >= abs_no && abs_no >= correct;
}

Outcome outcome_of(std::size_t yes, std::size_t no, std::size_t m) {
  if (2 * yes > m) return Outcome::included;
  if (2 * no > m) return Outcome::rejected;
  return Outcome::undecided;
}

Score score_delta(std::span<const Decision> decisions, std::span<const Outcome> outcomes,
                  std::span<const std::uint64_t> values, const ScoringPolicy& policy) {
  if (decisions.size() != outcomes.size() || decisions.size() != values.size()) {
    throw std::invalid_argument("decisions, outcomes and values must align");
  }
  Score total;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (outcomes[i] == Outcome::undecided) continue;
    const bool included = outcomes[i] == Outcome::included;
    Score factor;
    switch (decisions[i]) {
      case Decision::unknown:
        factor = policy.unknown;
        break;
      case Decision::yes:
        factor = included ? policy.correct : policy.wrong_yes;
        break;
      case Decision::no:
        factor = included ? policy.wrong_no : policy.correct;
        break;
    }
    if (values[i] > static_cast<std::uint64_t>(INT64_MAX)) throw std::overflow_error("transaction value too large");
    total += factor.times(static_cast<std::int64_t>(values[i]));
  }
  return total;
}

void EpochScoreBook::add_block(const ScoreMap& deltas) {
  for (const auto& [v, d] : deltas) earned_[v] += d;
  blocks_.push_back(deltas);
}

void EpochScoreBook::apply_rolling_penalty(ValidatorId leader) {
  earned_[leader] = Score{};
  rolled_.insert(leader);
}

Score EpochScoreBook::earned(ValidatorId v) const {
  auto it = earned_.find(v);
  return it == earned_.end() ? Score{} : it->second;
}

void ReputationHistory::close_epoch(EpochScoreBook book) {
  if (!epochs_.empty() && epochs_.rbegin()->first >= book.epoch()) {
    throw std::invalid_argument("epochs must be closed in increasing order");
  }
  const Epoch e = book.epoch();
  epochs_.emplace(e, std::move(book));
}

ScoreMap cumulative_scores(const ReputationHistory& history, std::uint64_t w, Epoch current,
                           const EpochScoreBook* open) {
  if (w == 0) throw std::invalid_argument("window must be at least one epoch");
  const Epoch first = current + 1 >= w ? current + 1 - w : 0;
  std::vector<const EpochScoreBook*> books;
  for (auto it = history.epochs().lower_bound(first); it != history.epochs().end() && it->first <= current; ++it) {
    if (open && it->first == open->epoch()) continue;
    books.push_back(&it->second);
  }
  if (open && open->epoch() >= first && open->epoch() <= current) books.push_back(open);
  std::sort(books.begin(), books.end(), [](auto* a, auto* b) { return a->epoch() < b->epoch(); });

  // Latest rolling epoch per validator inside the window.
  std::map<ValidatorId, Epoch> last_roll;
  for (const auto* b : books)
    for (auto v : b->rolled()) last_roll[v] = b->epoch();

  ScoreMap out;
  for (const auto* b : books) {
    for (const auto& [v, s] : b->earned()) {
      auto r = last_roll.find(v);
      if (r != last_roll.end() && b->epoch() < r->second) continue;
      out[v] += s;
    }
    for (auto v : b->rolled()) out.try_emplace(v);
  }
  return out;
}

std::map<ValidatorId, std::uint64_t> allocate_rewards(std::uint64_t fee_micros, ValidatorId leader,
                                                      const ScoreMap& member_scores) {
  std::map<ValidatorId, std::uint64_t> out;
  const std::uint64_t pool = fee_micros / 2;
  out[leader] = fee_micros - pool;

  std::vector<std::pair<ValidatorId, unsigned __int128>> weights;
  unsigned __int128 total_weight = 0;
  for (const auto& [v, s] : member_scores) {
    if (v == leader) continue;
    const auto w = static_cast<unsigned __int128>(std::max<std::int64_t>(s.micros(), 0));
    weights.emplace_back(v, w);
    total_weight += w;
  }
  if (weights.empty()) {
    out[leader] += pool;
    return out;
  }
  if (total_weight == 0) {
    for (auto& [v, w] : weights) w = 1;
    total_weight = weights.size();
  }

  std::vector<std::pair<unsigned __int128, ValidatorId>> remainders;
  std::uint64_t handed_out = 0;
  for (const auto& [v, w] : weights) {
    const unsigned __int128 num = static_cast<unsigned __int128>(pool) * w;
    const auto share = static_cast<std::uint64_t>(num / total_weight);
    out[v] = share;
    handed_out += share;
    remainders.emplace_back(num % total_weight, v);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::uint64_t i = 0; handed_out + i < pool; ++i) ++out[remainders[i].second];
  return out;
}

std::string export_csv(const ReputationHistory& history, std::uint64_t w) {
  std::ostringstream os;
  os << "validator,epoch,delta,cumulative\n";
  for (const auto& [e, book] : history.epochs()) {
    const ScoreMap cum = cumulative_scores(history, w, e);
    std::set<ValidatorId> ids;
    for (const auto& [v, s] : book.earned()) ids.insert(v);
    for (const auto& [v, s] : cum) ids.insert(v);
    for (auto v : ids) {
      auto c = cum.find(v);
      os << v.value << ',' << e << ',' << book.earned(v).to_string() << ','
         << (c == cum.end() ? Score{} : c->second).to_string() << '\n';
    }
  }
  return os.str();
}

}  // namespace repchain::reputation
