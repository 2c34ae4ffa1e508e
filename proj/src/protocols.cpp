#include "di2pc/protocols.hpp"

#include <algorithm>
#include <cmath>

#include "di2pc/bounds.hpp"
#include "di2pc/errors.hpp"
#include "di2pc/parallel.hpp"
#include "di2pc/random.hpp"

namespace di2pc::protocols {

namespace {

int sample4(const double* p, double u) {
  double c = p[0];
  if (u < c) return 0;
  c += p[1];
  if (u < c) return 1;
  c += p[2];
  if (u < c) return 2;
  return 3;
}

std::optional<TestRecord> run_test(const DeviceModel& device, const TestPhase& test,
                                   std::uint64_t seed) {
  if (test.rounds_per_setting <= 0) return std::nullopt;
  TestRecord rec;
  rec.estimate = chsh::estimate_chsh(device, test.rounds_per_setting, test.delta, seed);
  rec.zeta = rec.estimate.conservative_zeta();
  return rec;
}

}  // namespace

std::int64_t hamming_distance(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw ShapeError("hamming_distance: length mismatch");
  std::int64_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

bool WseTranscript::substring_matches() const {
  for (std::size_t j = 0; j < index_set.size(); ++j)
    if (x[static_cast<std::size_t>(index_set[j])] != substring[j]) return false;
  return true;
}

std::int64_t WseTranscript::matched_errors() const {
  std::int64_t errors = 0;
  for (std::size_t j = 0; j < index_set.size(); ++j)
    errors += x[static_cast<std::size_t>(index_set[j])] != substring[j];
  return errors;
}

double WseTranscript::matched_qber() const {
  if (index_set.empty()) return 0.0;
  return static_cast<double>(matched_errors()) / static_cast<double>(index_set.size());
}

JointTable joint_outcome_table(const DeviceModel& device) {
  device.validate();
  const ComplexMatrix rho = device.noisy_sigma_ab().mat();
  JointTable t{};
  for (int th = 0; th < 2; ++th)
    for (int thp = 0; thp < 2; ++thp) {
      double total = 0.0;
      for (int x = 0; x < 2; ++x)
        for (int xp = 0; xp < 2; ++xp) {
          const ComplexMatrix op =
              tensor_product(device.alice(th).outcome(x), device.bob(thp).outcome(xp));
          const double v = std::max(0.0, (op * rho).trace().real());
          t.p[th][thp][2 * x + xp] = v;
          total += v;
        }
      for (double& v : t.p[th][thp]) v /= total;
    }
  return t;
}

WseTranscript run_wse(const DeviceModel& device, std::int64_t n, std::uint64_t seed,
                      const TestPhase& test) {
  if (n < 1) throw DomainError("run_wse: n must be >= 1");
  const JointTable table = joint_outcome_table(device);
  WseTranscript tr;
  tr.test = run_test(device, test, child_seed(seed, 1));
  const auto len = static_cast<std::size_t>(n);
  tr.theta.resize(len);
  tr.x.resize(len);
  tr.theta_prime.resize(len);
  tr.x_prime.resize(len);

  RandomSuite rng(child_seed(seed, 0));
  for (std::size_t k = 0; k < len; ++k) {
    const std::uint64_t bits = rng.next_u64();
    const int th = static_cast<int>(bits & 1u);
    const int thp = static_cast<int>((bits >> 1) & 1u);
    const int o = sample4(table.p[th][thp], rng.uniform());
    tr.theta[k] = static_cast<std::uint8_t>(th);
    tr.theta_prime[k] = static_cast<std::uint8_t>(thp);
    tr.x[k] = static_cast<std::uint8_t>(o >> 1);
    tr.x_prime[k] = static_cast<std::uint8_t>(o & 1);
    if (th == thp) {
      tr.index_set.push_back(static_cast<std::int64_t>(k));
      tr.substring.push_back(tr.x_prime[k]);
    }
  }
  return tr;
}

void PvConfig::validate() const {
  if (!(pos_v1 < pos_claimed && pos_claimed < pos_v2))
    throw DomainError("pv: need pos_v1 < pos_claimed < pos_v2");
  if (n < 1) throw DomainError("pv: n must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 0.5)) throw DomainError("pv: gamma must lie in [0, 0.5]");
  if (!(delta_t >= 0.0) || !(time_tol >= 0.0)) throw DomainError("pv: delta_t and time_tol must be >= 0");
  if (prover_pos && !(*prover_pos >= pos_v1 && *prover_pos <= pos_v2))
    throw DomainError("pv: prover must sit between the verifiers");
}

PvTiming pv_timing(const PvConfig& cfg) {
  cfg.validate();
  const double p = cfg.prover_pos.value_or(cfg.pos_claimed);
  PvTiming t;
  t.dispatch_v1 = -(cfg.pos_claimed - cfg.pos_v1);
  t.dispatch_v2 = -(cfg.pos_v2 - cfg.pos_claimed);
  const double quantum_arrives = t.dispatch_v1 + (p - cfg.pos_v1);
  const double theta_arrives = t.dispatch_v2 + (cfg.pos_v2 - p);
  t.reply_time = std::max(quantum_arrives, theta_arrives);
  t.rt_v1 = t.reply_time + (p - cfg.pos_v1) - t.dispatch_v1;
  t.rt_v2 = t.reply_time + (cfg.pos_v2 - p) - t.dispatch_v2;
  return t;
}

PvTranscript run_pv(const DeviceModel& device, const PvConfig& cfg, std::uint64_t seed) {
  const PvTiming timing = pv_timing(cfg);
  const JointTable table = joint_outcome_table(device);
  PvTranscript tr;
  tr.test = run_test(device, cfg.test, child_seed(seed, 1));
  const auto len = static_cast<std::size_t>(cfg.n);
  tr.theta.resize(len);
  tr.x.resize(len);
  tr.y.resize(len);
  RandomSuite rng(child_seed(seed, 0));
  for (std::size_t k = 0; k < len; ++k) {
    const int th = static_cast<int>(rng.next_u64() & 1u);
    const int o = sample4(table.p[th][th], rng.uniform());
    tr.theta[k] = static_cast<std::uint8_t>(th);
    tr.x[k] = static_cast<std::uint8_t>(o >> 1);
    tr.y[k] = static_cast<std::uint8_t>(o & 1);
  }
  const std::int64_t errors = hamming_distance(tr.x, tr.y);
  tr.qber = static_cast<double>(errors) / static_cast<double>(cfg.n);
  tr.rt_v1 = timing.rt_v1;
  tr.rt_v2 = timing.rt_v2;
  tr.accepted = errors <= bounds::hamming_radius(cfg.n, cfg.gamma) &&
                tr.rt_v1 <= cfg.delta_t + cfg.time_tol && tr.rt_v2 <= cfg.delta_t + cfg.time_tol;
  return tr;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials) {
  if (trials < 1 || successes < 0 || successes > trials)
    throw DomainError("wilson_interval: need 0 <= successes <= trials, trials >= 1");
  constexpr double z = 1.959963984540054;
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nn;
  const double denom = 1.0 + z * z / nn;
  const double centre = (p + z * z / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
  // The end points are exact at p = 0 and p = 1; avoid rounding just inside.
  return {successes == 0 ? 0.0 : std::max(0.0, centre - half),
          successes == trials ? 1.0 : std::min(1.0, centre + half)};
}

CompletenessReport completeness_report(const DeviceModel& device, std::int64_t n, double gamma,
                                       std::int64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials < 1) throw DomainError("completeness_report: trials must be >= 1");
  PvConfig cfg;
  cfg.n = n;
  cfg.gamma = gamma;
  cfg.delta_t = cfg.pos_v2 - cfg.pos_v1;
  cfg.validate();

  struct Slot {
    bool match = false;
    bool accept = false;
    std::int64_t errors = 0;
    std::int64_t matched = 0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(trials));
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const auto wse = run_wse(device, n, child_seed(seed, 2 * i));
    const auto pv = run_pv(device, cfg, child_seed(seed, 2 * i + 1));
    Slot& s = slots[i];
    s.match = wse.substring_matches();
    s.accept = pv.accepted;
    s.matched = static_cast<std::int64_t>(wse.index_set.size());
    s.errors = wse.matched_errors();
  });

  CompletenessReport r;
  r.trials = trials;
  r.n = n;
  r.gamma = gamma;
  std::int64_t matches = 0, accepts = 0, errors = 0, matched = 0;
  for (const auto& s : slots) {
    matches += s.match;
    accepts += s.accept;
    errors += s.errors;
    matched += s.matched;
  }
  r.wse_match_rate = static_cast<double>(matches) / static_cast<double>(trials);
  r.wse_match_ci = wilson_interval(matches, trials);
  r.pv_accept_rate = static_cast<double>(accepts) / static_cast<double>(trials);
  r.pv_accept_ci = wilson_interval(accepts, trials);
  if (matched > 0) {
    r.empirical_qber = static_cast<double>(errors) / static_cast<double>(matched);
    r.qber_ci = wilson_interval(errors, matched);
  } else {
    r.qber_ci = {0.0, 1.0};
  }
  return r;
}

}  // namespace di2pc::protocols
