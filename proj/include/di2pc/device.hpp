#pragma once

#include "di2pc/jordan.hpp"
#include "di2pc/matcore.hpp"
#include "di2pc/random.hpp"

namespace di2pc {

/// Single-round i.i.d. device: the shared state, Alice's two main
/// measurements, the honest receiver's measurements, the testing
/// observables on B and the depolarizing strength of the A→B wire.
struct DeviceModel {
  Index dim_a;
  Index dim_b;
  DensityOperator sigma_ab;
  jordan::BinaryMeasurement alice_meas_0;
  jordan::BinaryMeasurement alice_meas_1;
  jordan::BinaryMeasurement bob_meas_0;
  jordan::BinaryMeasurement bob_meas_1;
  BinaryObservable test_t0;
  BinaryObservable test_t1;
  double noise_q = 0.0;

  /// Checks every dimension and range invariant; throws ShapeError or
  /// DomainError.
  void validate() const;

  const jordan::BinaryMeasurement& alice(int theta) const {
    return theta == 0 ? alice_meas_0 : alice_meas_1;
  }
  const jordan::BinaryMeasurement& bob(int theta) const {
    return theta == 0 ? bob_meas_0 : bob_meas_1;
  }
  const BinaryObservable& test(int t) const { return t == 0 ? test_t0 : test_t1; }

  DensityOperator sigma_a() const;
  DensityOperator sigma_b() const;
  /// sigma_ab after depolarizing the B wire with strength noise_q.
  DensityOperator noisy_sigma_ab() const;
};

/// EPR pair, Z/X measurements on both sides, (Z ± X)/√2 testing
/// observables.
DeviceModel ideal_bb84_device(double noise_q = 0.0);

/// Random device for fuzzing: sigma_ab is the marginal of a Haar-random
/// pure state on A ⊗ B ⊗ C^ancilla; every measurement and testing
/// observable is a Haar-rotated projector of rank ⌈dim/2⌉.
DeviceModel random_device(RandomSuite& rng, Index dim_a = 2, Index dim_b = 2, Index ancilla = 2);

/// (1 - q) rho + q I/dim.
DensityOperator apply_depolarizing(const DensityOperator& state, double q);

/// Depolarizes the second factor of a bipartite state:
/// (1 - q) rho_AB + q rho_A ⊗ I/dim_b.
DensityOperator depolarize_subsystem_b(const DensityOperator& rho_ab, Index dim_a, Index dim_b,
                                       double q);

// Device JSON:
// {"dim_a", "dim_b", "sigma_ab", "alice_p0_b0", "alice_p0_b1", "bob_p0_b0",
//  "bob_p0_b1", "t0", "t1", "noise_q"}; P1 elements are implied.
nlohmann::ordered_json device_to_json(const DeviceModel& device);
DeviceModel device_from_json(const nlohmann::json& j, const Tolerances& tol = default_tolerances());
DeviceModel load_device(const std::string& path, const Tolerances& tol = default_tolerances());

}  // namespace di2pc
