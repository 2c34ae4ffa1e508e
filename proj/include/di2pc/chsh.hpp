#pragma once

#include <cstdint>

#include "di2pc/device.hpp"
#include "di2pc/matcore.hpp"

namespace di2pc::chsh {

inline constexpr double kTsirelson = 2.8284271247461900976;  // 2√2

struct ChshSetup {
  BinaryObservable a0;
  BinaryObservable a1;
  BinaryObservable t0;
  BinaryObservable t1;
  DensityOperator state;  // on A ⊗ T

  /// Alice's main observables and the testing observables of a device,
  /// evaluated on its (noise-free) state.
  static ChshSetup from_device(const DeviceModel& device);
};

/// W = A0⊗T0 + A0⊗T1 + A1⊗T0 − A1⊗T1.
ComplexMatrix chsh_operator(const ChshSetup& setup);

/// tr(W ρ).
double chsh_value(const ChshSetup& setup);

struct ZetaCertificate {
  double zeta = 1.0;
  bool certified = false;  // false when s < 2: no Bell violation, zeta = 1
};

/// zeta = s/4 · √(8 − s²). Throws NonphysicalViolationError for
/// s > 2√2 + 1e-9.
ZetaCertificate zeta_from_violation(double s);

struct ChshEstimate {
  double s_hat = 0.0;
  std::int64_t rounds_per_setting = 0;
  double confidence_delta = 0.0;
  double half_width = 0.0;
  double correlators[2][2] = {{0, 0}, {0, 0}};  // [a][t], empirical E_at

  /// Certificate from the pessimistic end of the confidence interval.
  ZetaCertificate conservative_zeta() const;
};

/// Hoeffding half-width for the sum of four ±1 correlators, union bound
/// over the four settings: 4 · √(2 ln(8/δ) / R).
double hoeffding_half_width(std::int64_t rounds_per_setting, double delta);

/// Samples rounds_per_setting Born-rule outcomes for each of the four
/// (a, t) settings in turn and forms s_hat = E00 + E01 + E10 − E11.
ChshEstimate estimate_chsh(const DeviceModel& device, std::int64_t rounds_per_setting,
                           double delta, std::uint64_t seed);

}  // namespace di2pc::chsh
