#pragma once

// Honest-party simulation of weak string erasure and one-dimensional
// position verification on i.i.d. devices.

#include <cstdint>
#include <optional>
#include <vector>

#include "di2pc/chsh.hpp"
#include "di2pc/device.hpp"

namespace di2pc::protocols {

using Bits = std::vector<std::uint8_t>;

std::int64_t hamming_distance(const Bits& a, const Bits& b);

/// Optional testing phase run before the main rounds.
struct TestPhase {
  std::int64_t rounds_per_setting = 0;  // 0 skips the test
  double delta = 0.01;
};

struct TestRecord {
  chsh::ChshEstimate estimate;
  chsh::ZetaCertificate zeta;  // from s_hat − half_width
};

struct WseTranscript {
  Bits theta;
  Bits x;
  Bits theta_prime;
  Bits x_prime;
  std::vector<std::int64_t> index_set;  // 0-based, ascending
  Bits substring;                       // x′ on index_set
  std::optional<TestRecord> test;

  /// x′_I == x_I.
  bool substring_matches() const;
  /// Positions of index_set where x and x′ differ.
  std::int64_t matched_errors() const;
  /// Fraction of index_set positions where x and x′ differ (0 for empty I).
  double matched_qber() const;
};

/// Joint outcome probabilities P(x, x′ | θ, θ′) on the noisy state, indexed
/// [θ][θ′][2x + x′].
struct JointTable {
  double p[2][2][4];
};

JointTable joint_outcome_table(const DeviceModel& device);

WseTranscript run_wse(const DeviceModel& device, std::int64_t n, std::uint64_t seed,
                      const TestPhase& test = {});

struct PvConfig {
  double pos_v1 = 0.0;
  double pos_v2 = 1.0;
  double pos_claimed = 0.5;
  std::int64_t n = 100;
  double gamma = 0.0;
  double delta_t = 1.0;
  double time_tol = 1e-9;
  /// Where the (single) prover actually sits; defaults to pos_claimed.
  std::optional<double> prover_pos;
  TestPhase test;

  /// Throws DomainError unless pos_v1 < pos_claimed < pos_v2, n ≥ 1,
  /// γ ∈ [0, ½], Δt ≥ 0, time_tol ≥ 0 and pos_v1 ≤ prover_pos ≤ pos_v2.
  void validate() const;
};

struct PvTranscript {
  Bits theta;
  Bits x;  // verifier-side outcomes (system A)
  Bits y;  // prover answers
  double qber = 0.0;
  double rt_v1 = 0.0;
  double rt_v2 = 0.0;
  bool accepted = false;
  std::optional<TestRecord> test;
};

/// Round-trip intervals measured by each verifier from its own dispatch,
/// with unit signal speed. Both signals reach pos_claimed at t = 0; the
/// prover replies the moment it holds both.
struct PvTiming {
  double dispatch_v1 = 0.0;
  double dispatch_v2 = 0.0;
  double reply_time = 0.0;
  double rt_v1 = 0.0;
  double rt_v2 = 0.0;
};

PvTiming pv_timing(const PvConfig& cfg);

PvTranscript run_pv(const DeviceModel& device, const PvConfig& cfg, std::uint64_t seed);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval at z = 1.959964 (95%).
Interval wilson_interval(std::int64_t successes, std::int64_t trials);

struct CompletenessReport {
  std::int64_t trials = 0;
  std::int64_t n = 0;
  double gamma = 0.0;
  double wse_match_rate = 0.0;
  Interval wse_match_ci;
  double pv_accept_rate = 0.0;
  Interval pv_accept_ci;
  double empirical_qber = 0.0;  // pooled over matched-basis WSE positions
  Interval qber_ci;
};

/// Runs `trials` independent WSE and PV instances (PV on the default
/// geometry with Δt = distance(V1, V2)); trial i uses child seeds derived
/// from (seed, i).
CompletenessReport completeness_report(const DeviceModel& device, std::int64_t n, double gamma,
                                       std::int64_t trials, std::uint64_t seed,
                                       unsigned threads = 1);

}  // namespace di2pc::protocols
