// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "di2pc/adversary.hpp"
#include "di2pc/bounds.hpp"
#include "di2pc/chsh.hpp"
#include "di2pc/jordan.hpp"
#include "di2pc/protocols.hpp"
#include "di2pc/random.hpp"

using namespace di2pc;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome certificate_map() {
  const double z2 = chsh::zeta_from_violation(2.0).zeta;
  const double zt = chsh::zeta_from_violation(chsh::kTsirelson).zeta;
  const double z25 = chsh::zeta_from_violation(2.5).zeta;
  const bool ok = std::abs(z2 - 1.0) <= 1e-12 && std::abs(zt) <= 1e-12 && std::abs(z25 - 0.826797) <= 1e-6;
  return {ok, fmt("zeta(2)=%.3g zeta(2sqrt2)=%.3g zeta(2.5)=%.7f", z2, zt, z25)};
}

Outcome bound_identity() {
  double worst = 0.0;
  for (std::int64_t n = 1; n <= 200; ++n)
    for (int k = 0; k <= 20; ++k)
      for (int z = 0; z <= 9; ++z) {
        const std::uint64_t d = std::uint64_t{1} << k;
        const double a = bounds::bound_perfect(n, d, z / 10.0);
        const double b = bounds::bound_perfect_sumform(n, d, z / 10.0);
        const double scale = std::max(std::abs(a), std::abs(b));
        if (scale > 0) worst = std::max(worst, std::abs(a - b) / scale);
      }
  return {worst <= 1e-12, fmt("max relative difference %.3g over 42000 points", worst)};
}

Outcome tightness() {
  const auto dev = ideal_bb84_device();
  const double b11 = bounds::bound_perfect(1, 1, 0.0);
  const double b12 = bounds::bound_perfect(1, 2, 0.0);
  const double a11 = adversary::exact_win_probability(dev, adversary::AttackStrategy::breidbart(1), 1, 1, 0.0).win_prob;
  const double a12 = adversary::exact_win_probability(dev, adversary::AttackStrategy::store_all(1), 1, 2, 0.0).win_prob;
  const double cos2 = std::pow(std::cos(std::numbers::pi / 8), 2);
  const bool ok = std::abs(b11 - cos2) <= 1e-12 && std::abs(b12 - 1.0) <= 1e-12 && std::abs(a11 - b11) <= 1e-6 &&
                  std::abs(a12 - b12) <= 1e-6;
  return {ok, fmt("B(1,1,0)=%.7f breidbart=%.7f  B(1,2,0)=%.7f store=%.7f", b11, a11, b12, a12)};
}

Outcome key_lemma() {
  struct Config {
    int n;
    Index d;
    double gamma;
  };
  const std::vector<Config> configs{{1, 1, 0.0}, {1, 2, 0.0}, {2, 1, 0.0}, {2, 2, 0.0}, {2, 1, 0.5}, {2, 2, 0.5}};
  Outcome o;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& c = configs[i];
    const auto r = adversary::verify_key_lemma(200, c.n, c.d, c.gamma, 1000 + i);
    violations += r.failures.size();
    o.detail += fmt("(%d,%ld,%.1f) max ratio %.4f; ", c.n, static_cast<long>(c.d), c.gamma, r.max_ratio);
  }
  o.pass = violations == 0;
  o.detail += fmt("%zu violations", violations);
  return o;
}

Outcome norm_lemma() {
  const auto r = adversary::verify_norm_lemma(10000, 16, 8, 2024);
  return {r.passed() && r.min_slack >= -1e-9,
          fmt("%zu violations, min slack %.3g", r.failures.size(), r.min_slack)};
}

Outcome overlap_lemma() {
  const auto r = adversary::verify_overlap_lemma(1000, 2, 3, 2025);
  return {r.passed() && r.min_slack_angles >= -1e-9 && r.min_slack_epsilon >= -1e-9,
          fmt("%zu violations over %ld checks, min slack %.3g / %.3g", r.failures.size(),
              static_cast<long>(r.checks), r.min_slack_angles, r.min_slack_epsilon)};
}

Outcome jordan_round_trip() {
  RandomSuite rng(77);
  double worst_rec = 0.0, worst_eps = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Index dim = rng.uniform_int(2, 16);
    const auto m0 = jordan::BinaryMeasurement::from_projector(rng.projector(dim, rng.uniform_int(0, static_cast<int>(dim))));
    const auto m1 = jordan::BinaryMeasurement::from_projector(rng.projector(dim, rng.uniform_int(0, static_cast<int>(dim))));
    const auto sigma = rng.density(dim);
    const auto dec = jordan::decompose_pair(m0, m1);
    worst_rec = std::max({worst_rec, max_abs_diff(dec.reconstruct_p0(0), m0.p0()),
                          max_abs_diff(dec.reconstruct_p0(1), m1.p0())});
    worst_eps = std::max(worst_eps, std::abs(jordan::epsilon_plus_blocks(dec, sigma) -
                                             jordan::epsilon_plus_direct(m0, m1, sigma)));
  }
  return {worst_rec <= 1e-8 && worst_eps <= 1e-9,
          fmt("max reconstruction error %.3g, max route difference %.3g", worst_rec, worst_eps)};
}

Outcome secure_region() {
  const double top = bounds::gamma_star(0.0);
  const double bottom = bounds::gamma_star(chsh::zeta_from_violation(2.0).zeta);
  const auto grid = bounds::linspace(2.0, chsh::kTsirelson, 200);
  const auto region = bounds::security_region(grid, bounds::linspace(0.0, 0.5, 11));
  bool monotone = true;
  for (std::size_t i = 1; i < region.gamma_star.size(); ++i)
    monotone = monotone && region.gamma_star[i] >= region.gamma_star[i - 1];
  return {std::abs(top - 0.0357) <= 0.0005 && bottom == 0.0 && monotone,
          fmt("gamma*(2sqrt2)=%.6f gamma*(2)=%.3g monotone=%d", top, bottom, monotone)};
}

Outcome exponential_decay() {
  double worst = -1e300;
  for (std::int64_t n = 18; n <= 500; ++n)
    worst = std::max(worst, bounds::log2_bound_perfect(n, 2, 0.0) + 0.2 * static_cast<double>(n));
  const double eps = std::ldexp(1.0, -20);
  const auto m = bounds::min_rounds(2, 0.0, 0.0, eps);
  const std::int64_t n = m.n.value_or(-1);
  const bool boundary = n > 1 && bounds::bound_imperfect(n, 2, 0.0, 0.0) <= eps &&
                        bounds::bound_imperfect(n - 1, 2, 0.0, 0.0) > eps;
  return {worst <= 0.0 && n >= 89 && n <= 92 && boundary,
          fmt("max log2(B)+0.2n = %.4f; min_rounds = %ld, boundary=%d", worst, static_cast<long>(n), boundary)};
}

Outcome completeness() {
  const auto ideal = ideal_bb84_device();
  std::int64_t mismatches = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) mismatches += !protocols::run_wse(ideal, 100, s).substring_matches();

  const auto noisy = ideal_bb84_device(0.04);
  const auto big = protocols::run_wse(noisy, 1'000'000, 31);
  const double qber = big.matched_qber();

  protocols::PvConfig cfg;
  cfg.n = 1000;
  cfg.gamma = 0.05;
  int accepted = 0, rejected_late = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    accepted += protocols::run_pv(noisy, cfg, s).accepted;
    auto fast = cfg;
    fast.delta_t = (cfg.pos_v2 - cfg.pos_v1) - 1e-3;
    rejected_late += !protocols::run_pv(noisy, fast, s).accepted;
  }
  const bool ok = mismatches == 0 && std::abs(qber - 0.02) <= 0.002 && accepted >= 198 && rejected_late == 200;
  return {ok, fmt("WSE mismatches %ld/10000; QBER %.5f; PV accepted %d/200; rejected below light time %d/200",
                  static_cast<long>(mismatches), qber, accepted, rejected_late)};
}

Outcome chsh_estimation() {
  const auto dev = ideal_bb84_device();
  int covered = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto e = chsh::estimate_chsh(dev, 100000, 0.01, s);
    covered += std::abs(e.s_hat - chsh::kTsirelson) <= e.half_width;
  }
  return {covered >= 99, fmt("%d/100 intervals cover 2sqrt2", covered)};
}

Outcome hamming_entropy() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  int checked = 0, bad = 0;
  for (std::int64_t n = 1; n <= 64; ++n)
    for (int k = 0; k <= 10; ++k) {
      const double gamma = k / 20.0;
      const std::int64_t radius = k * n / 20;
      if (bounds::hamming_radius(n, gamma) != radius) ++bad;
      const Big ball(bounds::hamming_ball(n, radius));
      const Big g = Big(k) / 20;
      Big h = 0;
      if (k > 0) h = -(g * log(g) + (1 - g) * log(1 - g)) / log(Big(2));
      const Big rhs = pow(Big(2), h * n);
      if (ball > rhs * (1 + Big("1e-40"))) ++bad;
      ++checked;
    }
  return {bad == 0, fmt("%d of %d (n, gamma) pairs violate", bad, checked)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "certificate map", 1, certificate_map},
      {2, "bound identity", 10, bound_identity},
      {3, "tightness anchors", 10, tightness},
      {4, "key-lemma fuzz", 600, key_lemma},
      {5, "norm-of-sum fuzz", 120, norm_lemma},
      {6, "overlap fuzz", 300, overlap_lemma},
      {7, "jordan round trip", 60, jordan_round_trip},
      {8, "secure region", 5, secure_region},
      {9, "exponential decay", 5, exponential_decay},
      {10, "honest completeness", 300, completeness},
      {11, "chsh estimation", 120, chsh_estimation},
      {12, "hamming/entropy step", 1, hamming_entropy},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] %2d %-22s %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                secs, in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
