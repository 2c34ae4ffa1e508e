#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "di2pc/bounds.hpp"
#include "di2pc/errors.hpp"

using namespace di2pc;
using namespace di2pc::bounds;
using big = boost::multiprecision::cpp_bin_float_50;
using boost::multiprecision::cpp_int;

namespace {

// Straight-line 50-digit evaluation of the sum form, no log-domain tricks.
big oracle_sumform(int n, std::uint64_t d, double zeta) {
  const big r = (big(1) + big(zeta)) / 2;
  const big sd = sqrt(big(d));
  const int t = static_cast<int>(std::min<std::int64_t>(*threshold(d, zeta), n));
  big binom = 1, total = 0;
  for (int k = 0; k <= n; ++k) {
    total += k <= t ? binom : binom * sd * pow(r, big(k) / 2);
    binom = binom * (n - k) / (k + 1);
  }
  return total / pow(big(2), n);
}

}  // namespace

TEST_CASE("threshold examples") {
  CHECK(*threshold(1, 0.3) == 0);
  CHECK(*threshold(2, 0.0) == 1);
  CHECK(*threshold(4, 0.826797) == 15);
  CHECK_FALSE(threshold(4, 1.0).has_value());
  CHECK(*threshold(1024, 0.0) == 10);
  CHECK_THROWS_AS(threshold(0, 0.0), DomainError);
}

TEST_CASE("perfect bound anchors") {
  const double cos2 = std::pow(std::cos(std::numbers::pi / 8), 2);
  CHECK(bound_perfect(1, 1, 0.0) == approx(cos2).epsilon(1e-14));
  CHECK(bound_perfect(1, 1, 0.0) == approx(0.5 + 1 / (2 * std::numbers::sqrt2)));
  CHECK(bound_perfect_raw(1, 2, 0.0) == approx(1.0).epsilon(1e-14));
  CHECK(bound_perfect_sumform(1, 2, 0.0) == approx(1.0).epsilon(1e-14));
  for (int n : {1, 5, 30}) CHECK(bound_perfect(n, 1u << 7, 1.0) == 1.0);
  for (int n : {1, 4, 12}) CHECK(bound_perfect_sumform(n, std::uint64_t{1} << n, 0.0) ==
                                 approx(1.0).epsilon(1e-14));
}

TEST_CASE("both forms match a 50-digit oracle") {
  for (int n : {1, 2, 3, 7, 20, 64, 150})
    for (std::uint64_t d : {1ull, 2ull, 3ull, 8ull, 1000ull, 1ull << 20})
      for (double z : {0.0, 0.25, 0.5, 0.826797, 0.99}) {
        const double want = static_cast<double>(oracle_sumform(n, d, z));
        CAPTURE(n);
        CAPTURE(d);
        CAPTURE(z);
        CHECK(bound_perfect_sumform(n, d, z) == approx(want).epsilon(1e-12));
        CHECK(bound_perfect_raw(n, d, z) == approx(want).epsilon(1e-12));
      }
}

TEST_CASE("n = 100, d = 2, zeta = 0") {
  const double b = bound_imperfect(100, 2, 0.0, 0.0);
  CHECK(b == approx(1.87e-7).epsilon(0.01));
  CHECK(b == approx(static_cast<double>(oracle_sumform(100, 2, 0.0))).epsilon(1e-12));
  CHECK(b == bound_perfect(100, 2, 0.0));
  CHECK(minentropy_rate(b, 100) == approx(0.2234).epsilon(1e-3));

  const double with_noise = bound_imperfect(100, 2, 0.0, 0.01);
  CHECK(with_noise == approx(b * std::exp2(100 * binary_entropy(0.01))).epsilon(1e-12));
  CHECK(binary_entropy(0.01) * 100 == approx(8.0793).epsilon(1e-4));
}

TEST_CASE("large n stays finite in the log domain") {
  const double l = log2_bound_perfect(1'000'000, 1u << 20, 0.3);
  CHECK(std::isfinite(l));
  CHECK(l == approx(log2_bound_perfect_sumform(1'000'000, 1u << 20, 0.3)).epsilon(1e-12));
  CHECK(bound_perfect(1'000'000, 1u << 20, 0.3) == 0.0);
}

TEST_CASE("raw bound never exceeds one") {
  // B is the expectation of min(1, √d r^{K/2}) over K ~ Bin(n, ½).
  for (int n = 1; n <= 40; ++n)
    for (std::uint64_t d : {1ull, 2ull, 5ull, 64ull, 1ull << 20})
      for (double z : {0.0, 0.3, 0.7, 0.95})
        CHECK(bound_perfect_raw(n, d, z) <= 1.0 + 1e-13);
}

TEST_CASE("monotone in d, zeta and gamma") {
  for (int n : {1, 3, 10, 60}) {
    double prev = 0.0;
    for (std::uint64_t d = 1; d <= (1u << 12); d *= 2) {
      const double b = bound_perfect(n, d, 0.4);
      CHECK(b >= prev - 1e-15);
      prev = b;
    }
    prev = 0.0;
    for (double z = 0.0; z <= 1.0; z += 0.05) {
      const double b = bound_perfect(n, 4, z);
      CHECK(b >= prev - 1e-15);
      prev = b;
    }
    prev = 0.0;
    for (double g = 0.0; g <= 0.5; g += 0.025) {
      const double b = bound_imperfect(n, 4, 0.2, g);
      CHECK(b >= prev - 1e-15);
      prev = b;
    }
  }
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.25) == approx(0.811278).epsilon(1e-6));
  CHECK(binary_entropy(0.05) == approx(0.286397).epsilon(1e-5));
  CHECK_THROWS_AS(binary_entropy(-0.1), DomainError);
  CHECK_THROWS_AS(bound_imperfect(3, 2, 0.0, 0.51), DomainError);
}

TEST_CASE("decay condition and gamma star") {
  CHECK(decay_exponent(0.0) == approx(0.228446).epsilon(1e-5));
  CHECK(decay_condition(0.0, 0.0));
  CHECK_FALSE(decay_condition(1.0, 0.0));
  CHECK_FALSE(decay_condition(0.0, 0.05));
  CHECK_FALSE(decay_condition(0.0, 0.6));
  const double g = gamma_star(0.0);
  // Independent root of h(γ) = −log2(½ + ½√½) by Newton's method.
  const double target = -std::log2(0.5 + 0.5 * std::sqrt(0.5));
  double x = 0.05;
  for (int i = 0; i < 60; ++i) {
    const double h = -x * std::log2(x) - (1 - x) * std::log2(1 - x);
    x -= (h - target) / std::log2((1 - x) / x);
  }
  CHECK(g == approx(x).epsilon(1e-9));
  CHECK(g == approx(0.0370176).epsilon(1e-5));
  CHECK(binary_entropy(g) == approx(decay_exponent(0.0)).epsilon(1e-8));
  CHECK(gamma_star(1.0) == 0.0);
}

TEST_CASE("security region grid") {
  const auto s = linspace(2.0, 2.0 * std::numbers::sqrt2, 21);
  const auto g = linspace(0.0, 0.5, 11);
  const auto region = security_region(s, g);
  REQUIRE(region.zeta.size() == s.size());
  CHECK(region.gamma_star.front() == 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(region.gamma_star[i] >= region.gamma_star[i - 1]);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      CHECK(region.secure[i][j] == (g[j] < region.gamma_star[i] && region.zeta[i] < 1.0));
  const std::vector<double> bad{1.5, 2.5};
  CHECK_THROWS_AS(security_region(bad, g), DomainError);
  const std::vector<double> unsorted{2.5, 2.1};
  CHECK_THROWS_AS(security_region(unsorted, g), DomainError);
}

TEST_CASE("min rounds") {
  const double eps = std::exp2(-20.0);
  const auto r = min_rounds(2, 0.0, 0.0, eps);
  REQUIRE(r.n.has_value());
  const auto n = *r.n;
  CHECK(n >= 89);
  CHECK(n <= 92);
  CHECK(bound_imperfect(n, 2, 0.0, 0.0) <= eps);
  CHECK(bound_imperfect(n - 1, 2, 0.0, 0.0) > eps);
  CHECK(r.locally_monotone);
  CHECK(min_rounds(2, 1.0, 0.0, eps).insecure());
  CHECK(min_rounds(2, 0.0, 0.05, eps).insecure());
  CHECK_THROWS_AS(min_rounds(2, 0.0, 0.0, eps, 50), RoundCapError);
  CHECK_THROWS_AS(min_rounds(2, 0.0, 0.0, 1.5), DomainError);
  CHECK(*min_rounds(1, 0.0, 0.0, 0.9).n == 1);
}

TEST_CASE("hamming ball") {
  CHECK(hamming_ball(20, 0) == 1);
  CHECK(hamming_ball(20, 20) == cpp_int(1) << 20);
  CHECK(hamming_ball(20, 5) == 21700);
  CHECK(hamming_ball(200, 200) == cpp_int(1) << 200);
  CHECK_THROWS_AS(hamming_ball(5, 6), DomainError);
  CHECK(hamming_radius(20, 0.15) == 3);
  CHECK(hamming_radius(20, 0.35) == 7);
  CHECK(hamming_radius(100, 0.01) == 1);
}

TEST_CASE("minentropy rate") {
  CHECK(minentropy_rate(1.0, 10) == 0.0);
  CHECK(minentropy_rate(std::exp2(-10.0), 10) == approx(1.0));
  CHECK(std::isinf(minentropy_rate(0.0, 10)));
  CHECK_THROWS_AS(minentropy_rate(1.5, 10), DomainError);
}

TEST_CASE("report kinds share one code path") {
  const BoundInput in{50, 4, 0.2, 0.01};
  const auto a = make_report(in, ReportKind::guessing);
  const auto b = make_report(in, ReportKind::position_verification);
  CHECK(a.b_imperfect == b.b_imperfect);
  CHECK(a.b_imperfect >= a.b_perfect);
  CHECK(a.minentropy_rate == approx(-std::log2(a.b_imperfect) / 50));
  CHECK(*parse_report_kind("wse-ne") == ReportKind::wse_noisy_entanglement);
  CHECK_FALSE(parse_report_kind("nope").has_value());
  CHECK_THROWS_AS(make_report({0, 4, 0.2, 0.0}), DomainError);
  CHECK(make_report({7, 2, 1.0, 0.0}).threshold_t == 7);
}
