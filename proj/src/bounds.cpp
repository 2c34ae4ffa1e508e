#include "di2pc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "di2pc/chsh.hpp"
#include "di2pc/errors.hpp"

namespace di2pc::bounds {

namespace {

using real = long double;

constexpr real kLn2 = 0.693147180559945309417232121458176568L;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log2-sum-exp2.
class Log2Sum {
 public:
  void add(real log2_term) {
    if (log2_term == -std::numeric_limits<real>::infinity()) return;
    if (log2_term <= max_) {
      sum_ += std::exp2l(log2_term - max_);
    } else {
      sum_ = sum_ * std::exp2l(max_ - log2_term) + 1.0L;
      max_ = log2_term;
    }
  }
  real value() const {
    return sum_ == 0.0L ? -std::numeric_limits<real>::infinity() : max_ + std::log2l(sum_);
  }

 private:
  real max_ = -std::numeric_limits<real>::infinity();
  real sum_ = 0.0L;
};

// log2 C(n, k) for k = 0..kmax via the multiplicative recurrence.
class Log2Binomials {
 public:
  Log2Binomials(std::int64_t n) : n_(n) {}
  real next() {
    const real out = current_;
    current_ += (std::log2l(static_cast<real>(n_ - k_)) - std::log2l(static_cast<real>(k_ + 1)));
    ++k_;
    return out;
  }

 private:
  std::int64_t n_;
  std::int64_t k_ = 0;
  real current_ = 0.0L;
};

void check_args(std::int64_t n, std::uint64_t d, double zeta) {
  if (n < 1) throw DomainError("bounds: n must be >= 1");
  if (d < 1) throw DomainError("bounds: d must be >= 1");
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw DomainError("bounds: zeta must lie in [0, 1]");
}

// Effective threshold clipped to n; binomial terms vanish beyond n.
std::int64_t effective_threshold(std::int64_t n, std::uint64_t d, double zeta) {
  const auto t = threshold(d, zeta);
  return t ? std::min(*t, n) : n;
}

}  // namespace

void BoundInput::validate() const {
  check_args(n, d, zeta);
  if (!(gamma >= 0.0 && gamma <= 0.5)) throw DomainError("bounds: gamma must lie in [0, 0.5]");
}

std::optional<std::int64_t> threshold(std::uint64_t d, double zeta) {
  if (d < 1) throw DomainError("threshold: d must be >= 1");
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw DomainError("threshold: zeta must lie in [0, 1]");
  if (zeta >= 1.0) return std::nullopt;
  if (d == 1) return 0;
  const real log_r = std::log2l((1.0L + zeta) / 2.0L);
  const real t = std::floor(-std::log2l(static_cast<real>(d)) / log_r);
  constexpr real cap = static_cast<real>(std::int64_t{1} << 62);
  return static_cast<std::int64_t>(std::min(t, cap));
}

double log2_bound_perfect(std::int64_t n, std::uint64_t d, double zeta) {
  check_args(n, d, zeta);
  if (zeta >= 1.0) return 0.0;
  const real log_d = std::log2l(static_cast<real>(d));
  const real r = (1.0L + zeta) / 2.0L;
  const real log_r = std::log2l(r);
  const std::int64_t t = effective_threshold(n, d, zeta);

  const real head = 0.5L * log_d + static_cast<real>(n) * std::log2l(0.5L + 0.5L * std::sqrt(r));

  Log2Sum correction;
  Log2Binomials binom(n);
  for (std::int64_t k = 0; k <= t; ++k) {
    const real lc = binom.next() - static_cast<real>(n);
    const real excess_log2 = 0.5L * log_d + 0.5L * static_cast<real>(k) * log_r;  // ≥ 0 for k ≤ t
    const real excess = std::expm1l(kLn2 * excess_log2);
    if (excess > 0.0L) correction.add(lc + std::log2l(excess));
  }
  const real lc = correction.value();
  if (lc == -std::numeric_limits<real>::infinity()) return static_cast<double>(head);
  const real diff = lc - head;
  if (diff >= 0.0L) return kNegInf;
  return static_cast<double>(head + std::log1pl(-std::exp2l(diff)) / kLn2);
}

double log2_bound_perfect_sumform(std::int64_t n, std::uint64_t d, double zeta) {
  check_args(n, d, zeta);
  if (zeta >= 1.0) return 0.0;
  const real log_d = std::log2l(static_cast<real>(d));
  const real log_r = std::log2l((1.0L + zeta) / 2.0L);
  const std::int64_t t = effective_threshold(n, d, zeta);

  Log2Sum sum;
  Log2Binomials binom(n);
  for (std::int64_t k = 0; k <= n; ++k) {
    real term = binom.next() - static_cast<real>(n);
    if (k > t) term += 0.5L * log_d + 0.5L * static_cast<real>(k) * log_r;
    sum.add(term);
  }
  return static_cast<double>(sum.value());
}

double bound_perfect_raw(std::int64_t n, std::uint64_t d, double zeta) {
  return std::exp2(log2_bound_perfect(n, d, zeta));
}

double bound_perfect_sumform(std::int64_t n, std::uint64_t d, double zeta) {
  return std::exp2(log2_bound_perfect_sumform(n, d, zeta));
}

double bound_perfect(std::int64_t n, std::uint64_t d, double zeta) {
  return std::clamp(bound_perfect_raw(n, d, zeta), 0.0, 1.0);
}

double binary_entropy(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("binary_entropy: gamma must lie in [0, 1]");
  if (gamma == 0.0 || gamma == 1.0) return 0.0;
  return -gamma * std::log2(gamma) - (1.0 - gamma) * std::log2(1.0 - gamma);
}

double log2_bound_imperfect(std::int64_t n, std::uint64_t d, double zeta, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 0.5)) throw DomainError("bound_imperfect: gamma must lie in [0, 0.5]");
  const double base = log2_bound_perfect(n, d, zeta);
  if (gamma == 0.0) return base;
  return base + binary_entropy(gamma) * static_cast<double>(n);
}

double bound_imperfect(std::int64_t n, std::uint64_t d, double zeta, double gamma) {
  return std::clamp(std::exp2(log2_bound_imperfect(n, d, zeta, gamma)), 0.0, 1.0);
}

double decay_exponent(double zeta) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) throw DomainError("decay_exponent: zeta must lie in [0, 1]");
  return -std::log2(0.5 + 0.5 * std::sqrt((1.0 + zeta) / 2.0));
}

bool decay_condition(double zeta, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("decay_condition: gamma must lie in [0, 1]");
  return gamma <= 0.5 && binary_entropy(gamma) < decay_exponent(zeta);
}

double gamma_star(double zeta) {
  const double target = decay_exponent(zeta);
  if (target <= 0.0) return 0.0;
  double lo = 0.0, hi = 0.5;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (binary_entropy(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SecurityRegion security_region(std::span<const double> s_grid,
                               std::span<const double> gamma_grid) {
  if (!std::is_sorted(s_grid.begin(), s_grid.end()) ||
      !std::is_sorted(gamma_grid.begin(), gamma_grid.end()))
    throw DomainError("security_region: grids must be ascending");
  for (double s : s_grid)
    if (!(s >= 2.0 - 1e-12 && s <= chsh::kTsirelson + 1e-9))
      throw DomainError("security_region: S must lie in [2, 2*sqrt(2)]");
  for (double g : gamma_grid)
    if (!(g >= 0.0 && g <= 0.5)) throw DomainError("security_region: gamma must lie in [0, 0.5]");

  SecurityRegion region;
  region.s_grid.assign(s_grid.begin(), s_grid.end());
  region.gamma_grid.assign(gamma_grid.begin(), gamma_grid.end());
  for (double s : s_grid) {
    const double z = chsh::zeta_from_violation(std::max(s, 2.0)).zeta;
    region.zeta.push_back(z);
    region.gamma_star.push_back(gamma_star(z));
    std::vector<bool> row;
    row.reserve(gamma_grid.size());
    for (double g : gamma_grid) row.push_back(decay_condition(z, g));
    region.secure.push_back(std::move(row));
  }
  return region;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lo};
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    out.push_back(i + 1 == count ? hi
                                 : lo + (hi - lo) * static_cast<double>(i) /
                                            static_cast<double>(count - 1));
  return out;
}

MinRounds min_rounds(std::uint64_t d, double zeta, double gamma, double eps_target,
                     std::int64_t n_cap) {
  if (!(eps_target > 0.0 && eps_target < 1.0)) throw DomainError("min_rounds: eps must lie in (0, 1)");
  if (n_cap < 1) throw DomainError("min_rounds: n_cap must be >= 1");
  BoundInput{1, d, zeta, gamma}.validate();
  if (!decay_condition(zeta, gamma)) return {};

  const double target = std::log2(eps_target);
  auto passes = [&](std::int64_t n) { return log2_bound_imperfect(n, d, zeta, gamma) <= target; };

  std::int64_t hi = 1;
  while (!passes(hi)) {
    if (hi >= n_cap) {
      std::ostringstream os;
      os << "min_rounds: no n <= " << n_cap << " reaches eps = " << eps_target;
      throw RoundCapError(os.str());
    }
    hi = std::min(hi * 2, n_cap);
  }
  std::int64_t lo = hi / 2;  // fails (or 0)
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (passes(mid) ? hi : lo) = mid;
  }
  MinRounds out;
  out.n = hi;
  out.locally_monotone =
      log2_bound_imperfect(hi + 1, d, zeta, gamma) <= log2_bound_imperfect(hi, d, zeta, gamma);
  return out;
}

boost::multiprecision::cpp_int hamming_ball(std::int64_t n, std::int64_t radius) {
  if (n < 0 || radius < 0 || radius > n) throw DomainError("hamming_ball: need 0 <= radius <= n");
  boost::multiprecision::cpp_int c = 1, total = 1;
  for (std::int64_t k = 0; k < radius; ++k) {
    c = c * (n - k) / (k + 1);
    total += c;
  }
  return total;
}

std::int64_t hamming_radius(std::int64_t n, double gamma) {
  if (n < 0 || !(gamma >= 0.0)) throw DomainError("hamming_radius: invalid arguments");
  const double v = gamma * static_cast<double>(n);
  return static_cast<std::int64_t>(std::floor(v + 1e-9 * std::max(1.0, v)));
}

double minentropy_rate(double bound_value, std::int64_t n) {
  if (n < 1) throw DomainError("minentropy_rate: n must be >= 1");
  if (!(bound_value >= 0.0) || bound_value > 1.0)
    throw DomainError("minentropy_rate: bound must lie in [0, 1]");
  if (bound_value == 0.0) return std::numeric_limits<double>::infinity();
  return -std::log2(bound_value) / static_cast<double>(n);
}

std::string_view to_string(ReportKind kind) noexcept {
  switch (kind) {
    case ReportKind::guessing: return "guessing";
    case ReportKind::wse_noisy_entanglement: return "wse-ne";
    case ReportKind::position_verification: return "pv";
  }
  return "guessing";
}

std::optional<ReportKind> parse_report_kind(std::string_view name) noexcept {
  for (auto k : {ReportKind::guessing, ReportKind::wse_noisy_entanglement,
                 ReportKind::position_verification})
    if (name == to_string(k)) return k;
  return std::nullopt;
}

BoundReport make_report(const BoundInput& input, ReportKind kind) {
  input.validate();
  BoundReport r;
  r.kind = kind;
  r.input = input;
  r.threshold_t = effective_threshold(input.n, input.d, input.zeta);
  if (const auto t = threshold(input.d, input.zeta)) r.threshold_t = *t;
  r.b_perfect = bound_perfect(input.n, input.d, input.zeta);
  r.log2_b_imperfect = std::min(0.0, log2_bound_imperfect(input.n, input.d, input.zeta, input.gamma));
  r.b_imperfect = bound_imperfect(input.n, input.d, input.zeta, input.gamma);
  r.minentropy_rate = -r.log2_b_imperfect / static_cast<double>(input.n);
  if (r.minentropy_rate == 0.0) r.minentropy_rate = 0.0;  // no negative zero
  r.secure = decay_condition(input.zeta, input.gamma);
  return r;
}

}  // namespace di2pc::bounds
