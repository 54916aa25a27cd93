#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace repchain::chain {

/// Signed fixed-point reputation value with six fractional decimal digits.
/// Every validator computes identical scores; nothing here touches floating
/// point except the explicit to_double() used for reporting.
class Score {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Score() = default;

  static constexpr Score from_micros(std::int64_t micros) { return Score(micros); }
  static Score from_units(std::int64_t units);
  /// Parses decimal text such as "-0.5" or "12.000001" (at most 6 decimals).
  static Score parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }
  /// Always six decimals, e.g. "-3.000000".
  std::string to_string() const;

  /// Scaling factor times an integer quantity (e.g. S(j) * T(j)).
  /// Throws std::overflow_error on overflow.
  Score times(std::int64_t factor) const;

  Score operator+(Score o) const;
  Score operator-(Score o) const;
  Score operator-() const { return Score(-micros_); }
  Score& operator+=(Score o) { return *this = *this + o; }
  Score& operator-=(Score o) { return *this = *this - o; }

  constexpr bool is_positive() const { return micros_ > 0; }
  constexpr auto operator<=>(const Score&) const = default;

 private:
  constexpr explicit Score(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace repchain::chain
