#pragma once

// Closed-form cheating-probability bounds for the bounded-storage guessing
// game and the quantities derived from them.
//
// All logarithms are base 2. Bounds are evaluated in log space so that
// n up to 10^6 neither overflows nor underflows; the plain-valued entry
// points clamp to [0, 1].

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace di2pc::bounds {

struct BoundInput {
  std::int64_t n = 1;    // rounds
  std::uint64_t d = 1;   // adversary quantum-memory dimension
  double zeta = 0.0;     // certificate, [0, 1]
  double gamma = 0.0;    // allowed bit-error fraction, [0, 0.5]

  /// Throws DomainError when any field is out of range.
  void validate() const;
};

/// t = ⌊−log d / log((1+ζ)/2)⌋. Empty for ζ = 1, where the ratio is
/// undefined; callers then use t = n and a trivial bound of 1.
std::optional<std::int64_t> threshold(std::uint64_t d, double zeta);

/// log2 of √d(½+½√((1+ζ)/2))^n − Σ_{k≤t} C(n,k) 2^{−n} (√d((1+ζ)/2)^{k/2} − 1).
double log2_bound_perfect(std::int64_t n, std::uint64_t d, double zeta);

/// log2 of 2^{−n}[Σ_{k≤t} C(n,k) + √d Σ_{k>t} C(n,k) ((1+ζ)/2)^{k/2}].
double log2_bound_perfect_sumform(std::int64_t n, std::uint64_t d, double zeta);

/// Unclamped values of the two forms.
double bound_perfect_raw(std::int64_t n, std::uint64_t d, double zeta);
double bound_perfect_sumform(std::int64_t n, std::uint64_t d, double zeta);

/// B(n, d, ζ) clamped to [0, 1].
double bound_perfect(std::int64_t n, std::uint64_t d, double zeta);

/// h(γ) in bits, h(0) = h(1) = 0.
double binary_entropy(double gamma);

/// log2 of 2^{h(γ)n} B(n, d, ζ), unclamped. Throws DomainError for γ > 0.5.
double log2_bound_imperfect(std::int64_t n, std::uint64_t d, double zeta, double gamma);

/// B′(n, d, ζ, γ) clamped to [0, 1].
double bound_imperfect(std::int64_t n, std::uint64_t d, double zeta, double gamma);

/// −log2(½ + ½√((1+ζ)/2)): the per-round decay rate of B for large n.
double decay_exponent(double zeta);

/// γ ≤ ½ and h(γ) < decay_exponent(ζ).
bool decay_condition(double zeta, double gamma);

/// Root of h(γ) = decay_exponent(ζ) on [0, ½] by bisection (width ≤ 1e-10).
double gamma_star(double zeta);

struct SecurityRegion {
  std::vector<double> s_grid;
  std::vector<double> gamma_grid;
  std::vector<double> zeta;                 // per S
  std::vector<double> gamma_star;           // per S
  std::vector<std::vector<bool>> secure;    // [s index][gamma index]
};

/// Both grids must be ascending, S within [2, 2√2] and γ within [0, ½].
SecurityRegion security_region(std::span<const double> s_grid,
                               std::span<const double> gamma_grid);

/// Evenly spaced grid including both end points.
std::vector<double> linspace(double lo, double hi, std::size_t count);

struct MinRounds {
  std::optional<std::int64_t> n;  // empty: insecure (decay condition fails)
  bool locally_monotone = true;   // bound(n + 1) ≤ bound(n) at the result

  bool insecure() const { return !n.has_value(); }
};

inline constexpr std::int64_t kDefaultRoundCap = 1'000'000;

/// Smallest n with B′(n) ≤ eps_target, by doubling then bisection. The
/// returned n satisfies B′(n) ≤ eps < B′(n−1). Throws RoundCapError when
/// n_cap is reached first.
MinRounds min_rounds(std::uint64_t d, double zeta, double gamma, double eps_target,
                     std::int64_t n_cap = kDefaultRoundCap);

/// Σ_{k ≤ radius} C(n, k), exact.
boost::multiprecision::cpp_int hamming_ball(std::int64_t n, std::int64_t radius);

/// ⌊γ n⌋, robust to the representation error of decimal γ.
std::int64_t hamming_radius(std::int64_t n, double gamma);

/// −log2(bound)/n; +infinity for a zero bound.
double minentropy_rate(double bound_value, std::int64_t n);

/// The same bound certifies the guessing game (λ), weak string erasure in
/// the noisy-entanglement model (λ_NE) and position verification (λ_PV).
enum class ReportKind { guessing, wse_noisy_entanglement, position_verification };

std::string_view to_string(ReportKind kind) noexcept;
std::optional<ReportKind> parse_report_kind(std::string_view name) noexcept;

struct BoundReport {
  ReportKind kind = ReportKind::guessing;
  BoundInput input;
  std::int64_t threshold_t = 0;
  double b_perfect = 1.0;
  double b_imperfect = 1.0;
  double log2_b_imperfect = 0.0;
  double minentropy_rate = 0.0;
  bool secure = false;  // decay condition
};

BoundReport make_report(const BoundInput& input, ReportKind kind = ReportKind::guessing);

}  // namespace di2pc::bounds
