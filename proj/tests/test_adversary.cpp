#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <numbers>

#include "di2pc/adversary.hpp"
#include "di2pc/bounds.hpp"
#include "di2pc/errors.hpp"
#include "di2pc/random.hpp"

using namespace di2pc;
using namespace di2pc::adversary;

namespace {

const double kCos2 = (1.0 + 1.0 / std::numbers::sqrt2) / 2.0;  // cos²(π/8)

ComplexVector ket(Complex a, Complex b) {
  ComplexVector v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("discrimination examples") {
  const ComplexMatrix p0 = projector_onto(ket(1, 0));
  const ComplexMatrix p1 = projector_onto(ket(0, 1));
  const ComplexMatrix pp = projector_onto(ket(1, 1) / std::numbers::sqrt2);

  std::vector<ComplexMatrix> ortho{p0 / 2.0, p1 / 2.0};
  CHECK(optimal_discrimination(ortho).value == approx(1.0).epsilon(1e-12));
  std::vector<ComplexMatrix> same{p0 / 2.0, p0 / 2.0};
  CHECK(optimal_discrimination(same).value == approx(0.5).epsilon(1e-12));
  std::vector<ComplexMatrix> plus{p0 / 2.0, pp / 2.0};
  const auto r = optimal_discrimination(plus);
  CHECK(r.value == approx(kCos2).epsilon(1e-12));
  CHECK(r.gap <= 1e-10);

  // Trine states with equal priors: optimum 2/3.
  std::vector<ComplexMatrix> trine;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 3.0;
    trine.push_back(projector_onto(ket(std::cos(a / 2), std::sin(a / 2))) / 3.0);
  }
  const auto t = optimal_discrimination(trine);
  CHECK(t.value == approx(2.0 / 3.0).epsilon(1e-8));
  CHECK(t.converged);
  CHECK(t.upper >= t.value);
}

TEST_CASE("iterative discrimination agrees with helstrom") {
  RandomSuite rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Index d = rng.uniform_int(2, 4);
    const double w = rng.uniform(0.1, 0.9);
    const ComplexMatrix r0 = rng.density(d).mat() * w;
    const ComplexMatrix r1 = rng.density(d).mat() * (1.0 - w);
    const double h = helstrom_value(r0, r1);
    std::vector<ComplexMatrix> two{r0, r1};
    CHECK(std::abs(optimal_discrimination(two).value - h) <= 1e-10);
    // A zero-weight third hypothesis forces the iterative path.
    std::vector<ComplexMatrix> three{r0, r1, ComplexMatrix::Zero(d, d)};
    const auto it = optimal_discrimination(three);
    CHECK(it.value <= h + 1e-10);
    CHECK(it.upper >= h - 1e-10);
    CHECK(it.upper - it.value <= 1e-7);
  }
}

TEST_CASE("dual bound dominates every measurement") {
  RandomSuite rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ComplexMatrix> ops;
    for (int i = 0; i < 4; ++i) ops.push_back(rng.density(3).mat() / 4.0);
    const auto r = optimal_discrimination(ops);
    for (int k = 0; k < 20; ++k) {
      const auto f = rng.povm(3, 4);
      double v = 0.0;
      for (int i = 0; i < 4; ++i) v += (f.elements()[static_cast<std::size_t>(i)] * ops[static_cast<std::size_t>(i)]).trace().real();
      CHECK(v <= r.upper + 1e-9);
    }
  }
}

TEST_CASE("explicit strategies on the ideal device") {
  const auto dev = ideal_bb84_device();
  CHECK(exact_win_probability(dev, AttackStrategy::breidbart(1), 1, 1, 0.0).win_prob ==
        approx(kCos2).epsilon(1e-9));
  CHECK(exact_win_probability(dev, AttackStrategy::store_all(1), 1, 2, 0.0).win_prob ==
        approx(1.0).epsilon(1e-9));
  CHECK(exact_win_probability(dev, AttackStrategy::breidbart(2), 2, 1, 0.0).win_prob ==
        approx(kCos2 * kCos2).epsilon(1e-9));
  // Measuring in Z guesses right only when θ = 0 or the coin lands well.
  CHECK(exact_win_probability(dev, AttackStrategy::measure_all({0.0}), 1, 1, 0.0).win_prob ==
        approx(0.75).epsilon(1e-9));
  // Storing one of two rounds and measuring the other at π/4.
  const auto half = exact_win_probability(
      dev, AttackStrategy::store_subset({1}, {std::numbers::pi / 4, 0.0}), 2, 2, 0.0);
  CHECK(half.win_prob == approx(kCos2).epsilon(1e-9));
}

TEST_CASE("strategy validation") {
  const auto dev = ideal_bb84_device();
  CHECK_THROWS_AS(exact_win_probability(dev, AttackStrategy::store_all(2), 2, 2, 0.0), DomainError);
  CHECK_THROWS_AS(exact_win_probability(dev, AttackStrategy::measure_all({0.0}), 2, 1, 0.0), DomainError);
  CHECK_THROWS_AS(exact_win_probability(dev, AttackStrategy::breidbart(11), 11, 1, 0.0),
                  DimensionCapError);
  Instrument big;
  big.in_dim = 16;
  big.out_dim = 1;
  big.outcomes.push_back({ComplexMatrix::Identity(1, 16)});
  CHECK_THROWS_AS(AttackStrategy::general(big).to_instrument(4, 2, 1), DimensionCapError);
  Instrument leaky;
  leaky.in_dim = 2;
  leaky.out_dim = 1;
  leaky.outcomes.push_back({ComplexMatrix::Identity(1, 2)});
  CHECK_THROWS_AS(AttackStrategy::general(leaky).to_instrument(1, 2, 1), DomainError);
}

TEST_CASE("strategy json round trip") {
  const auto s = AttackStrategy::store_subset({0}, {0.0, 0.3});
  const auto back = strategy_from_json(nlohmann::json::parse(strategy_to_json(s).dump()));
  CHECK(back.kind == StrategyKind::store_subset);
  CHECK(back.kept == s.kept);
  CHECK(back.angles == s.angles);
  const auto g = AttackStrategy::general(AttackStrategy::breidbart(1).to_instrument(1, 2, 1));
  const auto gb = strategy_from_json(nlohmann::json::parse(strategy_to_json(g).dump()));
  CHECK(gb.instrument.outcomes.size() == 2);
  CHECK_THROWS_AS(strategy_from_json(nlohmann::json::parse(R"({"kind":"nope"})")), ParseError);
}

TEST_CASE("ensembles are normalized") {
  RandomSuite rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto dev = random_device(rng);
    for (std::uint32_t th = 0; th < 4; ++th) {
      const auto e = post_measurement_ensemble(dev, AttackStrategy::breidbart(2), 2, th, 1);
      double q = 0.0, w = 0.0;
      for (double v : e.q) q += v;
      for (const auto& b : e.branches)
        for (const auto& m : b.states) w += real_trace(m);
      CHECK(q == approx(1.0).epsilon(1e-10));
      CHECK(w == approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("ensembles on the ideal device") {
  const auto dev = ideal_bb84_device();
  const auto b = post_measurement_ensemble(dev, AttackStrategy::breidbart(1), 1, 0, 1);
  CHECK(b.q[0] == approx(0.5));
  CHECK(b.q[1] == approx(0.5));
  CHECK(b.branches.size() == 2);

  for (std::uint32_t th = 0; th < 4; ++th) {
    const auto e = post_measurement_ensemble(dev, AttackStrategy::store_all(2), 2, th, 4);
    REQUIRE(e.branches.size() == 1);
    std::vector<ComplexMatrix> rho;
    for (std::uint32_t x = 0; x < 4; ++x) rho.push_back(*e.normalized(0, x));
    for (std::uint32_t x = 0; x < 4; ++x) {
      CHECK(real_trace(rho[x] * rho[x]) == approx(1.0).epsilon(1e-10));
      for (std::uint32_t y = x + 1; y < 4; ++y) CHECK(std::abs((rho[x] * rho[y]).trace()) <= 1e-12);
    }
  }
}

TEST_CASE("win probability grows with the error tolerance") {
  RandomSuite rng(8);
  const auto dev = random_device(rng);
  double prev = 0.0;
  for (double g : {0.0, 0.25, 0.5}) {
    const double v = exact_win_probability(dev, AttackStrategy::breidbart(2), 2, 1, g).win_prob;
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
  // Radius 1 of 2: only the antipodal guess loses.
  CHECK(prev < 1.0);
}

TEST_CASE("tolerant game is at most ball size times the perfect game") {
  RandomSuite rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const auto dev = random_device(rng);
    for (const auto& s : {AttackStrategy::breidbart(2), AttackStrategy::store_subset({0}, {0.0, 0.4})}) {
      const double perfect = exact_win_probability(dev, s, 2, 2, 0.0).win_prob;
      for (double g : {0.25, 0.5}) {
        const double radius = static_cast<double>(bounds::hamming_ball(2, bounds::hamming_radius(2, g)));
        CHECK(exact_win_probability(dev, s, 2, 2, g).win_prob <= radius * perfect + 1e-9);
      }
    }
  }
}

TEST_CASE("monte carlo replay matches the exact value") {
  RandomSuite drng(21);
  const auto dev = random_device(drng);
  const int n = 2;
  const auto strat = AttackStrategy::store_subset({0}, {0.0, 0.7});
  const auto exact = exact_win_probability(dev, strat, n, 2, 0.0);
  RandomSuite rng(99);
  const int shots = 40000;
  int wins = 0;
  std::vector<Ensemble> ens;
  for (std::uint32_t th = 0; th < 4; ++th) ens.push_back(post_measurement_ensemble(dev, strat, n, th, 2));
  for (int s = 0; s < shots; ++s) {
    const auto th = static_cast<std::uint32_t>(rng.uniform_int(0, 3));
    const auto& e = ens[th];
    // Joint draw of (x, k) with weight tr ρ_{x,k}.
    double u = rng.uniform(), c = 0.0;
    std::uint32_t x = 0;
    std::size_t k = 0;
    bool done = false;
    for (std::size_t b = 0; b < e.branches.size() && !done; ++b)
      for (std::uint32_t xx = 0; xx < 4 && !done; ++xx) {
        c += real_trace(e.branches[b].states[xx]);
        if (u < c) {
          x = xx;
          k = b;
          done = true;
        }
      }
    const auto rho = e.normalized(static_cast<int>(k), x);
    if (!rho) continue;
    const auto& f = exact.povms[th][k];
    double v = rng.uniform(), cy = 0.0;
    std::uint32_t y = 3;
    for (std::uint32_t yy = 0; yy < 4; ++yy) {
      cy += (f[yy] * *rho).trace().real();
      if (v < cy) {
        y = yy;
        break;
      }
    }
    wins += y == x;
  }
  const double p = exact.win_prob;
  const double sigma = std::sqrt(p * (1 - p) / shots);
  CHECK(std::abs(static_cast<double>(wins) / shots - p) <= 3 * sigma);
}

TEST_CASE("seesaw reaches the known single-round optima") {
  const auto dev = ideal_bb84_device();
  SeesawOptions opt;
  opt.restarts = 3;
  opt.steps = 40;
  const auto s1 = seesaw_search(dev, 1, 1, 4, opt);
  CHECK(s1.best.win_prob >= kCos2 - 1e-4);
  CHECK(s1.best.win_prob <= kCos2 + 1e-6);
  const auto s2 = seesaw_search(dev, 1, 2, 4, opt);
  CHECK(s2.best.win_prob == approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(seesaw_search(dev, 4, 2, 1), DimensionCapError);
}

TEST_CASE("key lemma harness") {
  KeyLemmaOptions opt;
  opt.angle_steps = 8;  // includes π/4
  opt.seesaw_restarts = 1;
  opt.seesaw_steps = 10;
  const auto rep = verify_key_lemma(4, 1, 1, 0.0, 17, opt);
  CHECK(rep.passed());
  CHECK(rep.anchor_value == approx(kCos2).epsilon(1e-4));
  CHECK(rep.anchor_value <= rep.anchor_bound + 1e-6);
  CHECK(rep.evaluations > 4 * 8);
  opt.threads = 3;
  const auto again = verify_key_lemma(4, 1, 1, 0.0, 17, opt);
  CHECK(again.max_ratio == rep.max_ratio);
  CHECK_THROWS_AS(verify_key_lemma(1, 3, 1, 0.0, 1), DomainError);
}

TEST_CASE("norm lemma instances") {
  RandomSuite rng(2);
  const ComplexMatrix a = rng.psd(3);
  const auto one = evaluate_norm_lemma({a});
  CHECK(one.lhs == approx(operator_norm(a)).epsilon(1e-10));
  CHECK(one.rhs == approx(one.lhs).epsilon(1e-10));

  // Orthogonal diagonal projectors: Σ = I, every cross term vanishes.
  const ComplexMatrix d0 = diagonal({1, 0, 0}), d1 = diagonal({0, 1, 0}), d2 = diagonal({0, 0, 1});
  const auto diag = evaluate_norm_lemma({d0, d1, d2});
  CHECK(diag.lhs == approx(1.0));
  CHECK(diag.rhs == approx(1.0));
  // Identical operators: Σ = N·A, equality again.
  const auto same = evaluate_norm_lemma({a, a, a});
  CHECK(same.lhs == approx(same.rhs).epsilon(1e-9));

  const auto rep = verify_norm_lemma(300, 5, 5, 1, 2);
  CHECK(rep.passed());
  CHECK(rep.min_slack >= -1e-9);
}

TEST_CASE("overlap lemma instances") {
  RandomSuite rng(6);
  OverlapInstance inst;
  inst.beta = {std::numbers::pi / 4};
  inst.d = 2;
  for (int th = 0; th < 2; ++th) inst.povms.push_back(rng.povm(2, 2).elements());
  for (const auto& c : evaluate_overlap_lemma(inst)) {
    if (c.theta == c.theta_prime) {
      // w = 0: the bound is min{1, √d} = 1 and the overlap is a norm of a projector-like product.
      CHECK(c.bound_angles == 1.0);
      CHECK(c.lhs <= 1.0 + 1e-12);
    } else {
      CHECK(c.bound_angles == approx(1.0));  // √2 · cos(π/4)
      CHECK(c.bound_epsilon == approx(1.0));
    }
  }
  // Trivial memory with unbiased bases: overlap exactly cos(π/4).
  OverlapInstance flat;
  flat.beta = {std::numbers::pi / 4};
  flat.d = 1;
  for (int th = 0; th < 2; ++th) flat.povms.push_back({diagonal({1}), diagonal({0})});
  for (const auto& c : evaluate_overlap_lemma(flat))
    if (c.theta != c.theta_prime) CHECK(c.lhs == approx(std::sqrt(0.5)).epsilon(1e-10));

  const auto rep = verify_overlap_lemma(200, 2, 3, 4, 2);
  CHECK(rep.passed());
  CHECK(rep.checks == 200 * 16);
  CHECK(rep.min_slack_angles >= -1e-9);
  CHECK(rep.max_form_difference <= 1e-12);
}
