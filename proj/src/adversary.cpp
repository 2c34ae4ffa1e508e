#include "di2pc/adversary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/SVD>

#include "di2pc/bounds.hpp"
#include "di2pc/errors.hpp"
#include "di2pc/jordan.hpp"
#include "di2pc/parallel.hpp"
#include "di2pc/random.hpp"

namespace di2pc::adversary {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSoundnessSlack = 1e-6;

int bit_of(std::uint32_t s, int round, int n) { return static_cast<int>((s >> (n - 1 - round)) & 1u); }

void check_rounds(int n) {
  if (n < 1) throw DomainError("adversary: n must be >= 1");
  if (n > kMaxRounds) throw DimensionCapError("adversary: n exceeds the enumeration cap");
}

Index int_pow(Index base, int exp) {
  Index r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Row vectors ⟨φ_0|, ⟨φ_1| of the eigenbasis of cos φ Z + sin φ X.
KrausList angle_measurement(double phi) {
  ComplexMatrix r0(1, 2), r1(1, 2);
  r0 << std::cos(phi / 2), std::sin(phi / 2);
  r1 << -std::sin(phi / 2), std::cos(phi / 2);
  return {r0, r1};
}

// Combines per-round instruments (one Kraus element per outcome) into the
// n-round product instrument.
Instrument product_instrument(const std::vector<KrausList>& rounds, const Tolerances& tol) {
  Instrument out;
  std::vector<ComplexMatrix> current{ComplexMatrix::Identity(1, 1)};
  for (const auto& r : rounds) {
    std::vector<ComplexMatrix> next;
    next.reserve(current.size() * r.size());
    for (const auto& a : current)
      for (const auto& b : r) next.push_back(tensor_product(a, b, tol));
    current = std::move(next);
  }
  out.in_dim = current.front().cols();
  out.out_dim = current.front().rows();
  for (auto& m : current) out.outcomes.push_back({std::move(m)});
  return out;
}

// Per-round conditional operators τ^θ_x = tr_A[(P^θ_x ⊗ I) σ], [θ][x].
std::array<std::array<ComplexMatrix, 2>, 2> single_round_operators(const DeviceModel& device) {
  const std::array<Index, 2> dims{device.dim_a, device.dim_b};
  const std::array<Index, 1> keep{1};
  std::array<std::array<ComplexMatrix, 2>, 2> tau;
  for (int th = 0; th < 2; ++th)
    for (int x = 0; x < 2; ++x)
      tau[th][x] = hermitian_part(partial_trace(
          tensor_product(device.alice(th).outcome(x), identity(device.dim_b)) * device.sigma_ab.mat(),
          dims, keep));
  return tau;
}

std::vector<ComplexMatrix> product_operators(const std::array<std::array<ComplexMatrix, 2>, 2>& tau,
                                             int n, std::uint32_t theta) {
  const std::uint32_t count = 1u << n;
  std::vector<ComplexMatrix> out(count);
  for (std::uint32_t x = 0; x < count; ++x) {
    ComplexMatrix m = tau[bit_of(theta, 0, n)][bit_of(x, 0, n)];
    for (int j = 1; j < n; ++j) m = tensor_product(m, tau[bit_of(theta, j, n)][bit_of(x, j, n)]);
    out[x] = std::move(m);
  }
  return out;
}

ComplexMatrix apply_kraus(const KrausList& ks, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(ks.front().rows(), ks.front().rows());
  for (const auto& k : ks) out += k * rho * k.adjoint();
  return hermitian_part(out);
}

// Operators to discriminate when guesses within Hamming radius r win.
std::vector<ComplexMatrix> ball_sums(const std::vector<ComplexMatrix>& states, int radius) {
  if (radius == 0) return states;
  const auto count = static_cast<std::uint32_t>(states.size());
  std::vector<ComplexMatrix> out(count, ComplexMatrix::Zero(states[0].rows(), states[0].cols()));
  for (std::uint32_t y = 0; y < count; ++y)
    for (std::uint32_t x = 0; x < count; ++x)
      if (std::popcount(x ^ y) <= radius) out[y] += states[x];
  return out;
}

// Inverse square root on the support plus the projector onto the kernel.
struct SupportSplit {
  ComplexMatrix inv_sqrt;
  ComplexMatrix kernel;
};

SupportSplit split_support(const ComplexMatrix& m) {
  const auto e = eig_hermitian(hermitian_part(m));
  const double top = std::max(0.0, e.values.maxCoeff());
  const double cutoff = std::max(1e-300, 1e-13 * top);
  const Index d = m.rows();
  RealVector inv = RealVector::Zero(d), ker = RealVector::Zero(d);
  for (Index i = 0; i < d; ++i) {
    if (e.values(i) > cutoff)
      inv(i) = 1.0 / std::sqrt(e.values(i));
    else
      ker(i) = 1.0;
  }
  return {e.vectors * inv.cast<Complex>().asDiagonal() * e.vectors.adjoint(),
          e.vectors * ker.cast<Complex>().asDiagonal() * e.vectors.adjoint()};
}

void certify(std::span<const ComplexMatrix> ops, DiscriminationResult& r) {
  const Index d = ops[0].rows();
  ComplexMatrix y = ComplexMatrix::Zero(d, d);
  double value = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    y += ops[i] * r.povm[i];
    value += (r.povm[i] * ops[i]).trace().real();
  }
  y = hermitian_part(y);
  double lift = 0.0;
  for (const auto& op : ops) lift = std::max(lift, max_eigenvalue(hermitian_part(op - y)));
  r.value = value;
  r.upper = real_trace(y) + static_cast<double>(d) * lift;
  r.gap = std::max(0.0, r.upper - r.value);
}

const Tolerances& wide_tolerances() {
  static const Tolerances tol = [] {
    Tolerances t;
    t.dim_cap = 1 << 16;
    return t;
  }();
  return tol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Strategies

void Instrument::validate(double tol) const {
  if (outcomes.empty()) throw DomainError("instrument: no outcomes");
  ComplexMatrix sum = ComplexMatrix::Zero(in_dim, in_dim);
  for (const auto& ks : outcomes) {
    if (ks.empty()) throw DomainError("instrument: outcome without operation elements");
    for (const auto& k : ks) {
      if (k.rows() != out_dim || k.cols() != in_dim)
        throw ShapeError("instrument: operation element has wrong shape");
      sum += k.adjoint() * k;
    }
  }
  if (max_abs_diff(sum, identity(in_dim)) > tol)
    throw DomainError("instrument: operation elements are not trace preserving");
}

AttackStrategy AttackStrategy::measure_all(std::vector<double> angles) {
  AttackStrategy s;
  s.kind = StrategyKind::measure_all;
  s.angles = std::move(angles);
  return s;
}

AttackStrategy AttackStrategy::breidbart(int n) {
  return measure_all(std::vector<double>(static_cast<std::size_t>(std::max(n, 0)), kPi / 4));
}

AttackStrategy AttackStrategy::store_subset(std::vector<int> kept, std::vector<double> angles) {
  AttackStrategy s;
  s.kind = StrategyKind::store_subset;
  s.kept = std::move(kept);
  std::sort(s.kept.begin(), s.kept.end());
  s.angles = std::move(angles);
  return s;
}

AttackStrategy AttackStrategy::store_all(int n) {
  std::vector<int> kept;
  for (int i = 0; i < n; ++i) kept.push_back(i);
  return store_subset(std::move(kept), std::vector<double>(static_cast<std::size_t>(std::max(n, 0)), 0.0));
}

AttackStrategy AttackStrategy::general(Instrument instrument) {
  AttackStrategy s;
  s.kind = StrategyKind::general_encoding;
  s.instrument = std::move(instrument);
  return s;
}

std::string AttackStrategy::label() const {
  std::ostringstream os;
  switch (kind) {
    case StrategyKind::measure_all:
      os << "measure_all[";
      for (std::size_t i = 0; i < angles.size(); ++i) os << (i ? "," : "") << angles[i];
      os << "]";
      break;
    case StrategyKind::store_subset:
      os << "store_subset{";
      for (std::size_t i = 0; i < kept.size(); ++i) os << (i ? "," : "") << kept[i];
      os << "}[";
      for (std::size_t i = 0; i < angles.size(); ++i) os << (i ? "," : "") << angles[i];
      os << "]";
      break;
    case StrategyKind::general_encoding:
      os << "general_encoding(" << instrument.outcomes.size() << " outcomes, dim "
         << instrument.out_dim << ")";
      break;
  }
  return os.str();
}

Instrument AttackStrategy::to_instrument(int n, Index dim_b, Index d) const {
  check_rounds(n);
  if (d < 1) throw DomainError("strategy: d must be >= 1");
  const Index in_dim = int_pow(dim_b, n);
  if (kind == StrategyKind::general_encoding) {
    if (n > kMaxGeneralRounds) throw DimensionCapError("general_encoding: n exceeds 3");
    if (instrument.in_dim != in_dim) throw ShapeError("general_encoding: input dimension mismatch");
    if (instrument.out_dim > d) throw DomainError("general_encoding: memory dimension exceeds d");
    instrument.validate();
    return instrument;
  }
  if (static_cast<int>(angles.size()) != n) throw DomainError("strategy: need one angle per round");
  std::vector<bool> keep(static_cast<std::size_t>(n), false);
  if (kind == StrategyKind::store_subset) {
    for (int k : kept) {
      if (k < 0 || k >= n || keep[static_cast<std::size_t>(k)])
        throw DomainError("store_subset: kept rounds must be distinct and within [0, n)");
      keep[static_cast<std::size_t>(k)] = true;
    }
    if (int_pow(dim_b, static_cast<int>(kept.size())) > d)
      throw DomainError("store_subset: kept memory exceeds d");
  }
  std::vector<KrausList> rounds;
  for (int j = 0; j < n; ++j) {
    if (keep[static_cast<std::size_t>(j)]) {
      rounds.push_back({identity(dim_b)});
    } else {
      if (dim_b != 2) throw DomainError("strategy: angle measurements need a qubit B system");
      rounds.push_back(angle_measurement(angles[static_cast<std::size_t>(j)]));
    }
  }
  return product_instrument(rounds, wide_tolerances());
}

nlohmann::ordered_json strategy_to_json(const AttackStrategy& s) {
  nlohmann::ordered_json j;
  switch (s.kind) {
    case StrategyKind::measure_all:
      j["kind"] = "measure_all";
      j["angles"] = s.angles;
      break;
    case StrategyKind::store_subset:
      j["kind"] = "store_subset";
      j["kept"] = s.kept;
      j["angles"] = s.angles;
      break;
    case StrategyKind::general_encoding: {
      j["kind"] = "general_encoding";
      j["in_dim"] = s.instrument.in_dim;
      j["out_dim"] = s.instrument.out_dim;
      auto outs = nlohmann::ordered_json::array();
      for (const auto& ks : s.instrument.outcomes) {
        auto list = nlohmann::ordered_json::array();
        for (const auto& k : ks) list.push_back(matrix_to_json(k));
        outs.push_back(list);
      }
      j["outcomes"] = outs;
      break;
    }
  }
  return j;
}

AttackStrategy strategy_from_json(const nlohmann::json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "measure_all") return AttackStrategy::measure_all(j.at("angles").get<std::vector<double>>());
    if (kind == "store_subset")
      return AttackStrategy::store_subset(j.at("kept").get<std::vector<int>>(),
                                          j.at("angles").get<std::vector<double>>());
    if (kind == "general_encoding") {
      Instrument ins;
      ins.in_dim = j.at("in_dim").get<Index>();
      ins.out_dim = j.at("out_dim").get<Index>();
      for (const auto& list : j.at("outcomes")) {
        KrausList ks;
        for (const auto& m : list) ks.push_back(matrix_from_json(m));
        ins.outcomes.push_back(std::move(ks));
      }
      return AttackStrategy::general(std::move(ins));
    }
    throw ParseError("strategy: unknown kind " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("strategy: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Ensembles

std::vector<ComplexMatrix> conditional_operators(const DeviceModel& device, int n,
                                                 std::uint32_t theta) {
  check_rounds(n);
  if (theta >= (1u << n)) throw DomainError("conditional_operators: theta out of range");
  return product_operators(single_round_operators(device), n, theta);
}

std::optional<ComplexMatrix> Ensemble::normalized(int branch, std::uint32_t x) const {
  const ComplexMatrix& m = branches.at(static_cast<std::size_t>(branch)).states.at(x);
  const double t = real_trace(m);
  if (t <= 1e-15) return std::nullopt;
  return ComplexMatrix(m / t);
}

Ensemble post_measurement_ensemble(const DeviceModel& device, const AttackStrategy& strategy,
                                   int n, std::uint32_t theta, Index d) {
  const Instrument ins = strategy.to_instrument(n, device.dim_b, d);
  const auto t = conditional_operators(device, n, theta);
  Ensemble e;
  e.n = n;
  e.theta = theta;
  for (const auto& m : t) e.q.push_back(real_trace(m));
  for (std::size_t k = 0; k < ins.outcomes.size(); ++k) {
    Branch b;
    b.label = static_cast<int>(k);
    for (const auto& m : t) b.states.push_back(apply_kraus(ins.outcomes[k], m));
    e.branches.push_back(std::move(b));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Discrimination

double helstrom_value(const ComplexMatrix& r0, const ComplexMatrix& r1) {
  return 0.5 * (real_trace(r0) + real_trace(r1) + trace_norm(hermitian_part(r0 - r1)));
}

DiscriminationResult optimal_discrimination(std::span<const ComplexMatrix> input,
                                            const DiscriminationOptions& options) {
  if (input.empty()) throw DomainError("optimal_discrimination: empty ensemble");
  const Index d = input[0].rows();
  std::vector<ComplexMatrix> ops;
  ops.reserve(input.size());
  for (const auto& m : input) {
    if (m.rows() != d || m.cols() != d) throw ShapeError("optimal_discrimination: shape mismatch");
    ops.push_back(hermitian_part(m));
  }
  const std::size_t count = ops.size();
  DiscriminationResult r;
  r.povm.assign(count, ComplexMatrix::Zero(d, d));

  if (d == 1 || count == 1) {
    std::size_t best = 0;
    if (d == 1)
      for (std::size_t i = 1; i < count; ++i)
        if (ops[i](0, 0).real() > ops[best](0, 0).real()) best = i;
    r.povm[best] = identity(d);
    certify(ops, r);
    return r;
  }
  if (count == 2) {
    const auto e = eig_hermitian(hermitian_part(ops[1] - ops[0]));
    ComplexMatrix f1 = ComplexMatrix::Zero(d, d);
    for (Index i = 0; i < d; ++i)
      if (e.values(i) > 0.0) f1 += e.vectors.col(i) * e.vectors.col(i).adjoint();
    r.povm[0] = identity(d) - f1;
    r.povm[1] = f1;
    certify(ops, r);
    return r;
  }

  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (const auto& m : ops) total += m;
  const double scale = real_trace(total);
  if (scale <= 1e-300) {
    r.povm[0] = identity(d);
    certify(ops, r);
    return r;
  }
  // Start from the pretty good measurement, completed on the kernel.
  {
    const SupportSplit s = split_support(total);
    for (std::size_t i = 0; i < count; ++i)
      r.povm[i] = hermitian_part(s.inv_sqrt * ops[i] * s.inv_sqrt + s.kernel / static_cast<double>(count));
  }
  const double tol = options.tolerance * std::max(1.0, scale);
  certify(ops, r);
  int it = 0;
  while (r.gap > tol && it < options.max_iterations) {
    ComplexMatrix g = ComplexMatrix::Zero(d, d);
    std::vector<ComplexMatrix> rfr(count);
    for (std::size_t i = 0; i < count; ++i) {
      rfr[i] = ops[i] * r.povm[i] * ops[i];
      g += rfr[i];
    }
    // Γ = G^{1/2}, so Γ^+ is the inverse square root of G on its support.
    const SupportSplit s = split_support(g);
    const ComplexMatrix& gamma_inv = s.inv_sqrt;
    for (std::size_t i = 0; i < count; ++i)
      r.povm[i] = hermitian_part(gamma_inv * rfr[i] * gamma_inv + s.kernel / static_cast<double>(count));
    ++it;
    if (it % 4 == 0 || it == options.max_iterations) certify(ops, r);
  }
  certify(ops, r);
  r.iterations = it;
  r.converged = r.gap <= std::max(tol, 1e-7 * std::max(1.0, scale));
  return r;
}

// ---------------------------------------------------------------------------
// Exact values

namespace {

struct ThetaTables {
  int n = 1;
  int radius = 0;
  std::vector<std::vector<ComplexMatrix>> ops;  // [θ][x], on B^{⊗n}
};

ThetaTables theta_tables(const DeviceModel& device, int n, double gamma) {
  check_rounds(n);
  if (!(gamma >= 0.0 && gamma <= 0.5)) throw DomainError("adversary: gamma must lie in [0, 0.5]");
  ThetaTables t;
  t.n = n;
  t.radius = static_cast<int>(bounds::hamming_radius(n, gamma));
  const auto tau = single_round_operators(device);
  for (std::uint32_t th = 0; th < (1u << n); ++th) t.ops.push_back(product_operators(tau, n, th));
  return t;
}

GuessResult evaluate_instrument(const ThetaTables& tables, const Instrument& ins,
                                const DiscriminationOptions& options) {
  GuessResult g;
  const std::size_t thetas = tables.ops.size();
  g.per_theta.assign(thetas, 0.0);
  g.povms.resize(thetas);
  double gap = 0.0;
  for (std::size_t th = 0; th < thetas; ++th) {
    for (const auto& ks : ins.outcomes) {
      std::vector<ComplexMatrix> states;
      states.reserve(tables.ops[th].size());
      for (const auto& m : tables.ops[th]) states.push_back(apply_kraus(ks, m));
      const auto r = optimal_discrimination(ball_sums(states, tables.radius), options);
      g.per_theta[th] += r.value;
      gap += r.gap;
      g.converged = g.converged && r.converged;
      g.povms[th].push_back(r.povm);
    }
  }
  double sum = 0.0;
  for (double v : g.per_theta) sum += v;
  g.win_prob = sum / static_cast<double>(thetas);
  g.certified_gap = gap / static_cast<double>(thetas);
  return g;
}

}  // namespace

GuessResult exact_win_probability(const DeviceModel& device, const AttackStrategy& strategy, int n,
                                  Index d, double gamma, const DiscriminationOptions& options) {
  const auto tables = theta_tables(device, n, gamma);
  return evaluate_instrument(tables, strategy.to_instrument(n, device.dim_b, d), options);
}

// ---------------------------------------------------------------------------
// See-saw

namespace {

ComplexMatrix polar_isometry(const ComplexMatrix& g) {
  Eigen::JacobiSVD<ComplexMatrix> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

Instrument isometry_to_instrument(const ComplexMatrix& v, Index d, int outcomes) {
  Instrument ins;
  ins.in_dim = v.cols();
  ins.out_dim = d;
  for (int k = 0; k < outcomes; ++k) ins.outcomes.push_back({v.middleRows(k * d, d)});
  return ins;
}

}  // namespace

SeesawResult seesaw_search(const DeviceModel& device, int n, Index d, std::uint64_t seed,
                           const SeesawOptions& options) {
  if (n > kMaxGeneralRounds) throw DimensionCapError("seesaw_search: n exceeds 3");
  if (d < 1) throw DomainError("seesaw_search: d must be >= 1");
  const auto tables = theta_tables(device, n, options.gamma);
  const Index in_dim = int_pow(device.dim_b, n);
  const Index mem = std::min(d, in_dim);
  const int outcomes = options.outcomes > 0
                           ? options.outcomes
                           : static_cast<int>(std::max<Index>(2, 2 * ((in_dim + mem - 1) / mem)));
  if (static_cast<Index>(outcomes) * mem < in_dim)
    throw DomainError("seesaw_search: too few outcomes for an isometry");

  // Ball sums of the conditional operators: TB[θ][y].
  std::vector<std::vector<ComplexMatrix>> tb;
  for (const auto& ops : tables.ops) tb.push_back(ball_sums(ops, tables.radius));

  const DiscriminationOptions inner{400, 1e-8};
  auto evaluate = [&](const ComplexMatrix& v) {
    return evaluate_instrument(tables, isometry_to_instrument(v, mem, outcomes), inner);
  };
  auto ascend = [&](const ComplexMatrix& v, const GuessResult& g) {
    ComplexMatrix grad = ComplexMatrix::Zero(v.rows(), v.cols());
    for (std::size_t th = 0; th < tb.size(); ++th)
      for (int k = 0; k < outcomes; ++k) {
        const ComplexMatrix mk = v.middleRows(k * mem, mem);
        const auto& f = g.povms[th][static_cast<std::size_t>(k)];
        for (std::size_t y = 0; y < tb[th].size(); ++y)
          grad.middleRows(k * mem, mem) += f[y] * mk * tb[th][y];
      }
    return polar_isometry(grad);
  };

  RandomSuite rng(seed);
  SeesawResult out;
  ComplexMatrix best_v;
  double best = -1.0;
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    ComplexMatrix v = polar_isometry(rng.ginibre(outcomes * mem, in_dim));
    GuessResult cur = evaluate(v);
    double step = 0.3;
    for (int s = 0; s < options.steps; ++s) {
      const ComplexMatrix va = ascend(v, cur);
      GuessResult ga = evaluate(va);
      if (ga.win_prob > cur.win_prob + 1e-12) {
        v = va;
        cur = std::move(ga);
        continue;
      }
      // Stalled: random kick.
      const ComplexMatrix vp = polar_isometry(v + step * rng.ginibre(v.rows(), v.cols()));
      GuessResult gp = evaluate(vp);
      if (gp.win_prob > cur.win_prob + 1e-12) {
        v = vp;
        cur = std::move(gp);
        step = std::min(1.0, step * 1.3);
      } else {
        step = std::max(1e-3, step * 0.6);
      }
    }
    out.restart_values.push_back(cur.win_prob);
    if (cur.win_prob > best) {
      best = cur.win_prob;
      best_v = v;
    }
  }
  out.strategy = AttackStrategy::general(isometry_to_instrument(best_v, mem, outcomes));
  out.best = exact_win_probability(device, out.strategy, n, d, options.gamma);
  return out;
}

// ---------------------------------------------------------------------------
// Key Lemma harness

namespace {

struct TrialOutcome {
  std::int64_t evaluations = 0;
  double max_ratio = 0.0;
  double max_value = 0.0;
  double bound = 1.0;
  std::vector<KeyLemmaFailure> failures;
};

std::vector<AttackStrategy> strategy_families(int n, Index d, int angle_steps) {
  std::vector<AttackStrategy> out;
  const int steps = std::max(1, angle_steps);
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i) grid.push_back(kPi * i / steps);
  // Every assignment of grid angles to the measured rounds.
  auto assignments = [&](const std::vector<bool>& measured) {
    std::vector<std::vector<double>> all{std::vector<double>(static_cast<std::size_t>(n), 0.0)};
    for (int j = 0; j < n; ++j) {
      if (!measured[static_cast<std::size_t>(j)]) continue;
      std::vector<std::vector<double>> next;
      for (const auto& a : all)
        for (double g : grid) {
          auto b = a;
          b[static_cast<std::size_t>(j)] = g;
          next.push_back(std::move(b));
        }
      all = std::move(next);
    }
    return all;
  };
  for (auto& a : assignments(std::vector<bool>(static_cast<std::size_t>(n), true)))
    out.push_back(AttackStrategy::measure_all(std::move(a)));
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int kept_count = std::popcount(mask);
    if (int_pow(2, kept_count) > d) continue;
    std::vector<int> kept;
    std::vector<bool> measured(static_cast<std::size_t>(n), true);
    for (int j = 0; j < n; ++j)
      if ((mask >> j) & 1u) {
        kept.push_back(j);
        measured[static_cast<std::size_t>(j)] = false;
      }
    for (auto& a : assignments(measured)) out.push_back(AttackStrategy::store_subset(kept, std::move(a)));
  }
  return out;
}

TrialOutcome run_key_lemma_trial(const DeviceModel& device, std::int64_t trial, int n, Index d,
                                 double gamma, std::uint64_t seed, const KeyLemmaOptions& options) {
  TrialOutcome t;
  const auto dec = jordan::decompose_pair(device.alice_meas_0, device.alice_meas_1);
  const double eps = std::clamp(jordan::epsilon_plus_blocks(dec, device.sigma_a()), 0.0, 1.0);
  t.bound = bounds::bound_imperfect(n, static_cast<std::uint64_t>(d), eps, gamma);
  const auto tables = theta_tables(device, n, gamma);

  auto record = [&](const std::string& label, double value, const Instrument* ins) {
    ++t.evaluations;
    t.max_value = std::max(t.max_value, value);
    if (t.bound > 0.0) t.max_ratio = std::max(t.max_ratio, value / t.bound);
    if (value > t.bound + kSoundnessSlack) {
      KeyLemmaFailure f;
      f.trial = trial;
      f.strategy = label;
      f.value = value;
      f.bound = t.bound;
      f.eps_plus = eps;
      f.device = device_to_json(device);
      if (ins) f.device["strategy"] = strategy_to_json(AttackStrategy::general(*ins));
      t.failures.push_back(std::move(f));
    }
  };

  for (const auto& s : strategy_families(n, d, options.angle_steps)) {
    const auto g = evaluate_instrument(tables, s.to_instrument(n, device.dim_b, d), {});
    record(s.label(), g.win_prob, nullptr);
  }
  if (options.seesaw_restarts > 0 && n <= kMaxGeneralRounds) {
    SeesawOptions so;
    so.restarts = options.seesaw_restarts;
    so.steps = options.seesaw_steps;
    so.gamma = gamma;
    const auto ss = seesaw_search(device, n, d, child_seed(seed, 0x5ee5a3ULL), so);
    record("seesaw", ss.best.win_prob, &ss.strategy.instrument);
  }
  return t;
}

}  // namespace

KeyLemmaReport verify_key_lemma(std::int64_t trials, int n, Index d, double gamma,
                                std::uint64_t seed, const KeyLemmaOptions& options) {
  if (trials < 0) throw DomainError("verify_key_lemma: trials must be >= 0");
  if (n < 1 || n > 2) throw DomainError("verify_key_lemma: n must be 1 or 2");
  if (d < 1 || d > 2) throw DomainError("verify_key_lemma: d must be 1 or 2");
  if (!(gamma >= 0.0 && gamma <= 0.5)) throw DomainError("verify_key_lemma: gamma must lie in [0, 0.5]");

  KeyLemmaReport rep;
  rep.trials = trials;
  rep.n = n;
  rep.d = d;
  rep.gamma = gamma;

  const auto anchor = run_key_lemma_trial(ideal_bb84_device(), -1, n, d, gamma, seed, options);
  rep.anchor_value = anchor.max_value;
  rep.anchor_bound = anchor.bound;
  rep.evaluations += anchor.evaluations;
  rep.failures = anchor.failures;

  std::vector<TrialOutcome> slots(static_cast<std::size_t>(trials));
  parallel_for(slots.size(), options.threads, [&](std::size_t i) {
    const std::uint64_t s = child_seed(seed, i);
    RandomSuite rng(s);
    const auto dev = random_device(rng);
    slots[i] = run_key_lemma_trial(dev, static_cast<std::int64_t>(i), n, d, gamma, s, options);
  });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    rep.evaluations += slots[i].evaluations;
    if (slots[i].max_ratio > rep.max_ratio) {
      rep.max_ratio = slots[i].max_ratio;
      rep.max_ratio_trial = static_cast<std::int64_t>(i);
    }
    for (auto& f : slots[i].failures) rep.failures.push_back(std::move(f));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Norm-of-sum harness

NormLemmaInstance evaluate_norm_lemma(std::vector<ComplexMatrix> ops) {
  if (ops.empty()) throw DomainError("norm lemma: need at least one operator");
  const Index dim = ops[0].rows();
  const auto count = static_cast<Index>(ops.size());
  std::vector<ComplexMatrix> roots;
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (const auto& a : ops) {
    if (a.rows() != dim || a.cols() != dim) throw ShapeError("norm lemma: shape mismatch");
    roots.push_back(psd_sqrt(a));
    sum += a;
  }
  NormLemmaInstance inst;
  inst.lhs = max_eigenvalue(hermitian_part(sum));

  ComplexMatrix k(count * dim, count * dim);
  ComplexMatrix l = ComplexMatrix::Zero(count, count);
  for (Index i = 0; i < count; ++i)
    for (Index j = 0; j < count; ++j) {
      const ComplexMatrix prod = roots[static_cast<std::size_t>(i)] * roots[static_cast<std::size_t>(j)];
      k.block(i * dim, j * dim, dim, dim) = prod;
      l(i, j) = operator_norm(prod);
    }
  inst.k_norm = max_eigenvalue(hermitian_part(k));
  inst.l_norm = max_eigenvalue(hermitian_part(l));
  inst.holder = std::sqrt(induced_norm(l, InducedNorm::one) * induced_norm(l, InducedNorm::infinity));
  double rhs = 0.0;
  for (Index j = 0; j < count; ++j) rhs = std::max(rhs, l.col(j).real().sum());
  inst.rhs = rhs;
  inst.ops = std::move(ops);
  return inst;
}

NormLemmaReport verify_norm_lemma(std::int64_t trials, Index max_dim, int max_terms,
                                  std::uint64_t seed, unsigned threads) {
  if (trials < 0) throw DomainError("verify_norm_lemma: trials must be >= 0");
  if (max_dim < 1 || max_dim > 16) throw DomainError("verify_norm_lemma: max_dim must lie in [1, 16]");
  if (max_terms < 1 || max_terms > 8) throw DomainError("verify_norm_lemma: max_terms must lie in [1, 8]");
  struct Slot {
    double slack = 0.0;
    std::optional<LemmaFailure> failure;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(trials));
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    RandomSuite rng(child_seed(seed, i));
    const Index dim = rng.uniform_int(1, static_cast<int>(max_dim));
    const int terms = rng.uniform_int(1, max_terms);
    std::vector<ComplexMatrix> ops;
    for (int t = 0; t < terms; ++t) ops.push_back(rng.psd(dim, rng.uniform_int(1, static_cast<int>(dim))));
    const auto inst = evaluate_norm_lemma(std::move(ops));
    const double scale = std::max(1.0, inst.rhs);
    const double tol = 1e-9 * scale;
    Slot& s = slots[i];
    s.slack = inst.rhs - inst.lhs;
    std::string why;
    if (inst.lhs > inst.rhs + tol) why = "sum norm exceeds the bound";
    else if (std::abs(inst.k_norm - inst.lhs) > tol) why = "||K|| differs from ||sum A_i||";
    else if (inst.k_norm > inst.l_norm + tol) why = "||K|| exceeds ||L||";
    else if (inst.l_norm > inst.holder + tol) why = "||L|| exceeds the Holder bound";
    else if (std::abs(inst.holder - inst.rhs) > tol) why = "Holder bound differs from the column sum";
    if (!why.empty()) {
      nlohmann::ordered_json j;
      auto arr = nlohmann::ordered_json::array();
      for (const auto& a : inst.ops) arr.push_back(matrix_to_json(a));
      j["ops"] = arr;
      j["lhs"] = inst.lhs;
      j["rhs"] = inst.rhs;
      s.failure = LemmaFailure{static_cast<std::int64_t>(i), why, j};
    }
  });
  NormLemmaReport rep;
  rep.trials = trials;
  rep.min_slack = slots.empty() ? 0.0 : slots.front().slack;
  for (auto& s : slots) {
    rep.min_slack = std::min(rep.min_slack, s.slack);
    if (s.failure) rep.failures.push_back(std::move(*s.failure));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Overlap harness

std::vector<OverlapCheck> evaluate_overlap_lemma(const OverlapInstance& inst) {
  const int n = static_cast<int>(inst.beta.size());
  check_rounds(n);
  const std::uint32_t count = 1u << n;
  if (inst.povms.size() != count) throw ShapeError("overlap lemma: need one POVM per basis string");
  for (const auto& f : inst.povms)
    if (f.size() != count) throw ShapeError("overlap lemma: POVMs need 2^n outcomes");

  // Block projectors per round: [round][θ][x], with |0¹⟩ = cos β|0⁰⟩ + sin β|1⁰⟩.
  std::vector<std::array<std::array<ComplexMatrix, 2>, 2>> p(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double b = inst.beta[static_cast<std::size_t>(j)];
    ComplexVector e0(2), e1(2), f0(2), f1(2);
    e0 << 1.0, 0.0;
    e1 << 0.0, 1.0;
    f0 << std::cos(b), std::sin(b);
    f1 << -std::sin(b), std::cos(b);
    p[static_cast<std::size_t>(j)] = {{{projector_onto(e0), projector_onto(e1)},
                                       {projector_onto(f0), projector_onto(f1)}}};
  }
  std::vector<ComplexMatrix> roots;
  for (std::uint32_t th = 0; th < count; ++th) {
    ComplexMatrix pi = ComplexMatrix::Zero(int_pow(2, n) * inst.d, int_pow(2, n) * inst.d);
    for (std::uint32_t x = 0; x < count; ++x) {
      ComplexMatrix px = p[0][static_cast<std::size_t>(bit_of(th, 0, n))][static_cast<std::size_t>(bit_of(x, 0, n))];
      for (int j = 1; j < n; ++j)
        px = tensor_product(px, p[static_cast<std::size_t>(j)][static_cast<std::size_t>(bit_of(th, j, n))]
                                 [static_cast<std::size_t>(bit_of(x, j, n))]);
      pi += tensor_product(px, inst.povms[th][x]);
    }
    roots.push_back(psd_sqrt(hermitian_part(pi)));
  }
  const double sd = std::sqrt(static_cast<double>(inst.d));
  std::vector<OverlapCheck> out;
  for (std::uint32_t tp = 0; tp < count; ++tp)
    for (std::uint32_t th = 0; th < count; ++th) {
      OverlapCheck c;
      c.theta = th;
      c.theta_prime = tp;
      c.lhs = operator_norm(roots[tp] * roots[th]);
      double fa = sd, fe = sd;
      for (int j = 0; j < n; ++j) {
        if (bit_of(th ^ tp, j, n) == 0) continue;
        const double b = inst.beta[static_cast<std::size_t>(j)];
        fa *= std::max(std::cos(b), std::sin(b));
        fe *= std::sqrt((1.0 + std::abs(std::cos(2.0 * b))) / 2.0);
      }
      c.bound_angles = std::min(1.0, fa);
      c.bound_epsilon = std::min(1.0, fe);
      out.push_back(c);
    }
  return out;
}

OverlapLemmaReport verify_overlap_lemma(std::int64_t trials, int n, Index max_d, std::uint64_t seed,
                                        unsigned threads) {
  if (trials < 0) throw DomainError("verify_overlap_lemma: trials must be >= 0");
  if (n < 1 || n > 2) throw DomainError("verify_overlap_lemma: n must be 1 or 2");
  if (max_d < 1 || max_d > 3) throw DomainError("verify_overlap_lemma: d must lie in [1, 3]");
  struct Slot {
    std::int64_t checks = 0;
    double slack_a = 1.0, slack_e = 1.0, form_diff = 0.0;
    std::optional<LemmaFailure> failure;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(trials));
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    RandomSuite rng(child_seed(seed, i));
    OverlapInstance inst;
    inst.d = rng.uniform_int(1, static_cast<int>(max_d));
    for (int j = 0; j < n; ++j) {
      const double u = rng.uniform();
      // Mix in the exact special angles so the extreme cases are exercised.
      if (u < 0.05) inst.beta.push_back(0.0);
      else if (u < 0.10) inst.beta.push_back(kPi / 4);
      else if (u < 0.15) inst.beta.push_back(kPi / 2);
      else inst.beta.push_back(rng.uniform(0.0, kPi / 2));
    }
    const std::size_t outcomes = std::size_t{1} << n;
    for (std::size_t th = 0; th < outcomes; ++th) inst.povms.push_back(rng.povm(inst.d, outcomes).elements());
    Slot& s = slots[i];
    for (const auto& c : evaluate_overlap_lemma(inst)) {
      ++s.checks;
      s.slack_a = std::min(s.slack_a, c.bound_angles - c.lhs);
      s.slack_e = std::min(s.slack_e, c.bound_epsilon - c.lhs);
      s.form_diff = std::max(s.form_diff, std::abs(c.bound_angles - c.bound_epsilon));
    }
    std::string why;
    if (s.slack_a < -1e-9) why = "overlap exceeds the angle bound";
    else if (s.slack_e < -1e-9) why = "overlap exceeds the epsilon bound";
    else if (s.form_diff > 1e-12) why = "angle and epsilon forms disagree";
    if (!why.empty()) {
      nlohmann::ordered_json j;
      j["beta"] = inst.beta;
      j["d"] = inst.d;
      auto arr = nlohmann::ordered_json::array();
      for (const auto& povm : inst.povms) {
        auto el = nlohmann::ordered_json::array();
        for (const auto& f : povm) el.push_back(matrix_to_json(f));
        arr.push_back(el);
      }
      j["povms"] = arr;
      s.failure = LemmaFailure{static_cast<std::int64_t>(i), why, j};
    }
  });
  OverlapLemmaReport rep;
  rep.trials = trials;
  rep.min_slack_angles = 1.0;
  rep.min_slack_epsilon = 1.0;
  for (auto& s : slots) {
    rep.checks += s.checks;
    rep.min_slack_angles = std::min(rep.min_slack_angles, s.slack_a);
    rep.min_slack_epsilon = std::min(rep.min_slack_epsilon, s.slack_e);
    rep.max_form_difference = std::max(rep.max_form_difference, s.form_diff);
    if (s.failure) rep.failures.push_back(std::move(*s.failure));
  }
  return rep;
}

}  // namespace di2pc::adversary
