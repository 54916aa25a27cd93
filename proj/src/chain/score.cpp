#include "repchain/chain/score.hpp"

#include <charconv>
#include <stdexcept>

namespace repchain::chain {

Score Score::from_units(std::int64_t units) { return Score(kScale).times(units); }

Score Score::parse(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty score");
  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  const auto dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw std::invalid_argument("malformed score");
  if (frac.size() > 6) throw std::invalid_argument("score has more than 6 decimals");
  std::int64_t w = 0;
  if (!whole.empty()) {
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
    if (ec != std::errc{} || p != whole.data() + whole.size()) throw std::invalid_argument("malformed score");
  }
  std::int64_t f = 0;
  for (char c : frac) {
    if (c < '0' || c > '9') throw std::invalid_argument("malformed score");
    f = f * 10 + (c - '0');
  }
  for (std::size_t i = frac.size(); i < 6; ++i) f *= 10;
  Score s = Score(kScale).times(w) + Score(f);
  return negative ? -s : s;
}

std::string Score::to_string() const {
  const bool negative = micros_ < 0;
  // Magnitude as unsigned to survive INT64_MIN.
  const std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(micros_) : static_cast<std::uint64_t>(micros_);
  std::string frac = std::to_string(mag % kScale);
  frac.insert(0, 6 - frac.size(), '0');
  return (negative ? "-" : "") + std::to_string(mag / kScale) + "." + frac;
}

Score Score::times(std::int64_t factor) const {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(micros_, factor, &out)) throw std::overflow_error("score overflow");
  return Score(out);
}

Score Score::operator+(Score o) const {
  std::int64_t out = 0;
  if (__builtin_add_overflow(micros_, o.micros_, &out)) throw std::overflow_error("score overflow");
  return Score(out);
}

Score Score::operator-(Score o) const {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(micros_, o.micros_, &out)) throw std::overflow_error("score overflow");
  return Score(out);
}

}  // namespace repchain::chain
