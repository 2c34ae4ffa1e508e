#include "di2pc/device.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include "di2pc/errors.hpp"

namespace di2pc {

void DeviceModel::validate() const {
  if (dim_a < 1 || dim_b < 1) throw ShapeError("device: dimensions must be positive");
  if (sigma_ab.dim() != dim_a * dim_b) throw ShapeError("device: sigma_ab has wrong dimension");
  if (alice_meas_0.dim() != dim_a || alice_meas_1.dim() != dim_a)
    throw ShapeError("device: Alice measurements must act on A");
  if (bob_meas_0.dim() != dim_b || bob_meas_1.dim() != dim_b)
    throw ShapeError("device: Bob measurements must act on B");
  if (test_t0.dim() != dim_b || test_t1.dim() != dim_b)
    throw ShapeError("device: testing observables must act on B");
  if (!(noise_q >= 0.0 && noise_q <= 1.0)) throw DomainError("device: noise_q must lie in [0, 1]");
}

DensityOperator DeviceModel::sigma_a() const {
  const std::array<Index, 2> dims{dim_a, dim_b};
  const std::array<Index, 1> keep{0};
  return DensityOperator::make(partial_trace(sigma_ab.mat(), dims, keep));
}

DensityOperator DeviceModel::sigma_b() const {
  const std::array<Index, 2> dims{dim_a, dim_b};
  const std::array<Index, 1> keep{1};
  return DensityOperator::make(partial_trace(sigma_ab.mat(), dims, keep));
}

DensityOperator DeviceModel::noisy_sigma_ab() const {
  return depolarize_subsystem_b(sigma_ab, dim_a, dim_b, noise_q);
}

DeviceModel ideal_bb84_device(double noise_q) {
  ComplexVector phi = ComplexVector::Zero(4);
  phi(0) = phi(3) = 1.0 / std::numbers::sqrt2;
  const ComplexMatrix z_plus = diagonal({1.0, 0.0});
  const ComplexMatrix x_plus = 0.5 * (identity(2) + pauli::x());
  const ComplexMatrix t0 = (pauli::z() + pauli::x()) / std::numbers::sqrt2;
  const ComplexMatrix t1 = (pauli::z() - pauli::x()) / std::numbers::sqrt2;
  DeviceModel d{2,
                2,
                DensityOperator::pure(phi),
                jordan::BinaryMeasurement::from_projector(z_plus),
                jordan::BinaryMeasurement::from_projector(x_plus),
                jordan::BinaryMeasurement::from_projector(z_plus),
                jordan::BinaryMeasurement::from_projector(x_plus),
                BinaryObservable::make(t0),
                BinaryObservable::make(t1),
                noise_q};
  d.validate();
  return d;
}

DeviceModel random_device(RandomSuite& rng, Index dim_a, Index dim_b, Index ancilla) {
  if (dim_a < 1 || dim_b < 1 || ancilla < 1) throw ShapeError("random_device: dimensions must be positive");
  const Index dab = dim_a * dim_b;
  const ComplexVector psi = rng.pure_state(dab * ancilla);
  const std::array<Index, 2> dims{dab, ancilla};
  const std::array<Index, 1> keep{0};
  const ComplexMatrix sigma = hermitian_part(partial_trace(projector_onto(psi), dims, keep));
  auto meas = [&](Index d) {
    return jordan::BinaryMeasurement::from_projector(rng.projector(d, (d + 1) / 2));
  };
  auto obs = [&](Index d) {
    return BinaryObservable::make(2.0 * rng.projector(d, (d + 1) / 2) - identity(d));
  };
  auto a0 = meas(dim_a);
  auto a1 = meas(dim_a);
  auto b0 = meas(dim_b);
  auto b1 = meas(dim_b);
  auto t0 = obs(dim_b);
  auto t1 = obs(dim_b);
  DeviceModel d{dim_a, dim_b, DensityOperator::make(sigma), a0, a1, b0, b1, t0, t1, 0.0};
  d.validate();
  return d;
}

DensityOperator apply_depolarizing(const DensityOperator& state, double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("apply_depolarizing: q must lie in [0, 1]");
  const Index d = state.dim();
  return DensityOperator::make((1.0 - q) * state.mat() + q * identity(d) / static_cast<double>(d));
}

DensityOperator depolarize_subsystem_b(const DensityOperator& rho_ab, Index dim_a, Index dim_b,
                                       double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("depolarize: q must lie in [0, 1]");
  if (rho_ab.dim() != dim_a * dim_b) throw ShapeError("depolarize: dimension mismatch");
  if (q == 0.0) return rho_ab;
  const std::array<Index, 2> dims{dim_a, dim_b};
  const std::array<Index, 1> keep{0};
  const ComplexMatrix rho_a = partial_trace(rho_ab.mat(), dims, keep);
  const ComplexMatrix mixed =
      tensor_product(rho_a, identity(dim_b) / static_cast<double>(dim_b));
  return DensityOperator::make((1.0 - q) * rho_ab.mat() + q * mixed);
}

nlohmann::ordered_json device_to_json(const DeviceModel& device) {
  nlohmann::ordered_json j;
  j["dim_a"] = device.dim_a;
  j["dim_b"] = device.dim_b;
  j["sigma_ab"] = matrix_to_json(device.sigma_ab.mat());
  j["alice_p0_b0"] = matrix_to_json(device.alice_meas_0.p0());
  j["alice_p0_b1"] = matrix_to_json(device.alice_meas_1.p0());
  j["bob_p0_b0"] = matrix_to_json(device.bob_meas_0.p0());
  j["bob_p0_b1"] = matrix_to_json(device.bob_meas_1.p0());
  j["t0"] = matrix_to_json(device.test_t0.mat());
  j["t1"] = matrix_to_json(device.test_t1.mat());
  j["noise_q"] = device.noise_q;
  return j;
}

DeviceModel device_from_json(const nlohmann::json& j, const Tolerances& tol) {
  if (!j.is_object()) throw ParseError("device: expected a JSON object");
  for (const char* key : {"dim_a", "dim_b", "sigma_ab", "alice_p0_b0", "alice_p0_b1", "bob_p0_b0",
                          "bob_p0_b1", "t0", "t1"})
    if (!j.contains(key)) throw ParseError(std::string("device: missing field ") + key);
  if (!j["dim_a"].is_number_integer() || !j["dim_b"].is_number_integer())
    throw ParseError("device: dim_a/dim_b must be integers");
  const double q = j.contains("noise_q") ? j["noise_q"].get<double>() : 0.0;
  DeviceModel d{j["dim_a"].get<Index>(),
                j["dim_b"].get<Index>(),
                DensityOperator::make(matrix_from_json(j["sigma_ab"]), tol),
                jordan::BinaryMeasurement::from_projector(matrix_from_json(j["alice_p0_b0"]), tol),
                jordan::BinaryMeasurement::from_projector(matrix_from_json(j["alice_p0_b1"]), tol),
                jordan::BinaryMeasurement::from_projector(matrix_from_json(j["bob_p0_b0"]), tol),
                jordan::BinaryMeasurement::from_projector(matrix_from_json(j["bob_p0_b1"]), tol),
                BinaryObservable::make(matrix_from_json(j["t0"]), tol),
                BinaryObservable::make(matrix_from_json(j["t1"]), tol),
                q};
  d.validate();
  return d;
}

DeviceModel load_device(const std::string& path, const Tolerances& tol) {
  std::ifstream in(path);
  if (!in) throw ParseError("device: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("device: ") + e.what());
  }
  return device_from_json(j, tol);
}

}  // namespace di2pc
