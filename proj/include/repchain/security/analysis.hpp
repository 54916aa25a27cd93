#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

namespace repchain::security {

using Count = mpz_class;
using Rational = mpq_class;

/// Most malicious members a shard of size m tolerates: floor((m-1)/2).
constexpr std::uint64_t tolerance(std::uint64_t m) { return m == 0 ? 0 : (m - 1) / 2; }

/// Number of ways to place x malicious validators into y shards of m slots
/// each so that no shard holds more than floor((m-1)/2) of them.
Count safe_allocations(std::uint64_t x, std::uint64_t y, std::uint64_t m);

/// 1 - F(g, k) / C(n, g). Requires k | n and g <= n.
Rational failure_probability(std::uint64_t n, std::uint64_t k, std::uint64_t g);

enum class CamouflageBound {
  /// Per-shard cap d - p - u_l: the exposed validators already occupy p (+1)
  /// of the tolerated malicious seats.
  capacity_corrected,
  /// Uncorrected cap d - u_l with C(m, x) at the base. Disagrees with
  /// enumeration once p > 0; kept for comparison.
  printed_cap,
};

struct CamouflageResult {
  Count safe;   // C(k,q) * F(g-a, k)
  Count total;  // C(k,q) * C(n-a, g-a)
  Rational failure;
};

/// Failure probability when `exposed` of the g malicious validators have
/// been spread evenly over the k shards beforehand (p = a div k per shard,
/// q = a mod k shards holding one more), the remaining g - a placed at random.
CamouflageResult camouflage(std::uint64_t n, std::uint64_t k, std::uint64_t g, std::uint64_t exposed,
                            CamouflageBound bound = CamouflageBound::capacity_corrected);

/// Largest instance brute_force_failure accepts, measured as C(n-a, g-a).
inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

/// Enumerates every placement of the unexposed malicious validators (and
/// every choice of the q shards holding an extra exposed one) and counts
/// outcomes where some shard exceeds floor((m-1)/2).
Rational brute_force_failure(std::uint64_t n, std::uint64_t k, std::uint64_t g, std::uint64_t exposed);

/// printf("%g")-style rendering with `digits` significant digits, rounded
/// exactly from the rational (round half up).
std::string to_decimal(const Rational& r, int digits = 6);

/// Exact rendering "p/q" in lowest terms ("0" and "1" for the integers).
std::string to_fraction(const Rational& r);

}  // namespace repchain::security
