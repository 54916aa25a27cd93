#include "repchain/security/analysis.hpp"

#include <bit>
#include <stdexcept>

namespace repchain::security {
namespace {

Count binom(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  Count c;
  mpz_bin_uiui(c.get_mpz_t(), n, r);
  return c;
}

void check_partition(std::uint64_t n, std::uint64_t k, std::uint64_t g) {
  if (k == 0 || n == 0) throw std::invalid_argument("n and k must be positive");
  if (n % k != 0) throw std::invalid_argument("k must divide n (shards of equal size)");
  if (g > n) throw std::invalid_argument("g must not exceed n");
}

struct Level {
  std::int64_t cap;  // most malicious this shard may still take; negative = already unsafe
  std::uint64_t slots;
};

// levels[0] is the innermost shard (y = 1). F_0 is the indicator of x = 0,
// so F_1(x) = C(slots, x) when x <= cap. Returns F_y(0..x_max) for y = all.
std::vector<Count> evaluate(std::uint64_t x_max, const std::vector<Level>& levels,
                            const std::vector<Count>* base = nullptr) {
  std::vector<Count> f(x_max + 1, 0);
  std::size_t start = 0;
  if (base) {
    f = *base;
    start = 1;
  } else {
    f[0] = 1;
  }
  for (std::size_t y = start; y < levels.size(); ++y) {
    const auto& lv = levels[y];
    if (lv.cap < 0) return std::vector<Count>(x_max + 1, 0);
    const std::uint64_t cap = static_cast<std::uint64_t>(lv.cap);
    std::vector<Count> c(std::min(cap, x_max) + 1);
    for (std::uint64_t s = 0; s < c.size(); ++s) c[s] = binom(lv.slots, s);
    std::vector<Count> next(x_max + 1, 0);
    for (std::uint64_t x = 0; x <= x_max; ++x) {
      for (std::uint64_t s = 0; s <= std::min(cap, x); ++s) {
        if (f[x - s] != 0) next[x] += f[x - s] * c[s];
      }
    }
    f = std::move(next);
  }
  return f;
}

}  // namespace

Count safe_allocations(std::uint64_t x, std::uint64_t y, std::uint64_t m) {
  if (y == 0) return x == 0 ? 1 : 0;
  if (x > y * m) throw std::invalid_argument("more malicious validators than slots");
  const std::vector<Level> levels(y, Level{static_cast<std::int64_t>(tolerance(m)), m});
  return evaluate(x, levels)[x];
}

Rational failure_probability(std::uint64_t n, std::uint64_t k, std::uint64_t g) {
  check_partition(n, k, g);
  Rational safe(safe_allocations(g, k, n / k), binom(n, g));
  safe.canonicalize();
  return 1 - safe;
}

CamouflageResult camouflage(std::uint64_t n, std::uint64_t k, std::uint64_t g, std::uint64_t exposed,
                            CamouflageBound bound) {
  check_partition(n, k, g);
  if (exposed > g) throw std::invalid_argument("exposed count must not exceed g");
  const std::uint64_t m = n / k;
  const auto d = static_cast<std::int64_t>(tolerance(m));
  const std::uint64_t p = exposed / k;
  const std::uint64_t q = exposed % k;
  const std::uint64_t x = g - exposed;

  // Shard l = k - y carries one extra exposed validator when l < q.
  std::vector<Level> levels;
  for (std::uint64_t y = 1; y <= k; ++y) {
    const std::uint64_t u = (k - y) < q ? 1 : 0;
    const auto taken = static_cast<std::int64_t>(p + u);
    const std::int64_t cap = bound == CamouflageBound::capacity_corrected ? d - taken : d - static_cast<std::int64_t>(u);
    levels.push_back({cap, m - p - u});
  }

  Count f;
  if (bound == CamouflageBound::printed_cap) {
    std::vector<Count> base(x + 1, 0);
    for (std::uint64_t i = 0; i <= x && static_cast<std::int64_t>(i) <= d; ++i) base[i] = binom(m, i);
    f = evaluate(x, levels, &base)[x];
  } else {
    f = evaluate(x, levels)[x];
  }

  const Count choices = binom(k, q);
  CamouflageResult r;
  r.safe = choices * f;
  r.total = choices * binom(n - exposed, x);
  Rational safe(r.safe, r.total);
  safe.canonicalize();
  r.failure = 1 - safe;
  return r;
}

Rational brute_force_failure(std::uint64_t n, std::uint64_t k, std::uint64_t g, std::uint64_t exposed) {
  check_partition(n, k, g);
  if (exposed > g) throw std::invalid_argument("exposed count must not exceed g");
  if (k > 63) throw std::invalid_argument("brute force supports at most 63 shards");
  const std::uint64_t free_slots = n - exposed;
  const std::uint64_t x = g - exposed;
  if (binom(free_slots, x) > kBruteForceLimit) {
    throw std::invalid_argument("instance too large for enumeration (C(n-a, g-a) > 10^7); use the recursion");
  }
  const std::uint64_t m = n / k;
  const std::uint64_t d = tolerance(m);
  const std::uint64_t p = exposed / k;
  const std::uint64_t q = exposed % k;

  std::uint64_t total = 0;
  std::uint64_t unsafe = 0;
  for (std::uint64_t extra = 0; extra < (std::uint64_t{1} << k); ++extra) {
    if (static_cast<std::uint64_t>(std::popcount(extra)) != q) continue;
    std::vector<std::uint64_t> pre(k);
    std::vector<std::uint64_t> owner;  // shard of each free slot
    for (std::uint64_t s = 0; s < k; ++s) {
      pre[s] = p + ((extra >> s) & 1);
      if (pre[s] > m) throw std::invalid_argument("more exposed validators than slots");
      for (std::uint64_t i = pre[s]; i < m; ++i) owner.push_back(s);
    }
    // Lexicographic walk over all x-subsets of the free slots.
    std::vector<std::uint64_t> pick(x);
    for (std::uint64_t i = 0; i < x; ++i) pick[i] = i;
    for (;;) {
      std::vector<std::uint64_t> count = pre;
      for (auto i : pick) ++count[owner[i]];
      bool bad = false;
      for (auto c : count) bad = bad || c > d;
      ++total;
      unsafe += bad ? 1 : 0;

      std::int64_t i = static_cast<std::int64_t>(x) - 1;
      while (i >= 0 && pick[static_cast<std::size_t>(i)] == free_slots - x + static_cast<std::uint64_t>(i)) --i;
      if (i < 0) break;
      ++pick[static_cast<std::size_t>(i)];
      for (auto j = static_cast<std::size_t>(i) + 1; j < x; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  Rational r(Count(std::to_string(unsafe)), Count(std::to_string(total)));
  r.canonicalize();
  return r;
}

std::string to_fraction(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_decimal(const Rational& value, int digits) {
  if (digits < 1) throw std::invalid_argument("digits must be positive");
  if (value == 0) return "0";
  Rational r = abs(value);
  const std::string sign = value < 0 ? "-" : "";

  auto pow10 = [](long e) {
    Count p;
    mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(e < 0 ? -e : e));
    return e < 0 ? Rational(1, p) : Rational(p);
  };

  // Exponent e with 10^e <= r < 10^(e+1), starting from a bit-length estimate.
  const long bits = static_cast<long>(mpz_sizeinbase(r.get_num_mpz_t(), 2)) -
                    static_cast<long>(mpz_sizeinbase(r.get_den_mpz_t(), 2));
  long e = static_cast<long>(static_cast<double>(bits) * 0.30102999566398120);
  while (pow10(e) > r) --e;
  while (pow10(e + 1) <= r) ++e;

  Rational scaled = r * pow10(digits - 1 - e) + Rational(1, 2);
  Count mant = scaled.get_num() / scaled.get_den();  // floor, scaled > 0
  Count limit;
  mpz_ui_pow_ui(limit.get_mpz_t(), 10, static_cast<unsigned long>(digits));
  if (mant >= limit) {
    mant /= 10;
    ++e;
  }
  const std::string s = mant.get_str();

  auto trim = [](std::string t) {
    if (t.find('.') == std::string::npos) return t;
    while (t.back() == '0') t.pop_back();
    if (t.back() == '.') t.pop_back();
    return t;
  };

  if (e < -4 || e >= digits) {
    std::string m = trim(s.substr(0, 1) + "." + s.substr(1));
    std::string ex = std::to_string(e < 0 ? -e : e);
    if (ex.size() < 2) ex.insert(0, "0");
    return sign + m + "e" + (e < 0 ? "-" : "+") + ex;
  }
  if (e >= 0) {
    const auto point = static_cast<std::size_t>(e) + 1;
    return sign + trim(s.substr(0, point) + "." + s.substr(point));
  }
  return sign + trim("0." + std::string(static_cast<std::size_t>(-e - 1), '0') + s);
}

}  // namespace repchain::security
