#include "di2pc/chsh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "di2pc/errors.hpp"
#include "di2pc/random.hpp"

namespace di2pc::chsh {

ChshSetup ChshSetup::from_device(const DeviceModel& device) {
  return {BinaryObservable::make(device.alice_meas_0.observable()),
          BinaryObservable::make(device.alice_meas_1.observable()), device.test_t0, device.test_t1,
          device.sigma_ab};
}

namespace {

void check_shapes(const ChshSetup& s) {
  if (s.a0.dim() != s.a1.dim() || s.t0.dim() != s.t1.dim() ||
      s.state.dim() != s.a0.dim() * s.t0.dim())
    throw ShapeError("chsh: state dimension must equal dim(A) * dim(T)");
}

}  // namespace

ComplexMatrix chsh_operator(const ChshSetup& setup) {
  check_shapes(setup);
  const ComplexMatrix w = tensor_product(setup.a0.mat(), setup.t0.mat()) +
                          tensor_product(setup.a0.mat(), setup.t1.mat()) +
                          tensor_product(setup.a1.mat(), setup.t0.mat()) -
                          tensor_product(setup.a1.mat(), setup.t1.mat());
  if (operator_norm(w) > kTsirelson + 1e-9)
    throw DomainError("chsh_operator: norm exceeds the Tsirelson bound");
  return w;
}

double chsh_value(const ChshSetup& setup) {
  return (chsh_operator(setup) * setup.state.mat()).trace().real();
}

ZetaCertificate zeta_from_violation(double s) {
  if (!std::isfinite(s)) throw DomainError("zeta_from_violation: non-finite violation");
  if (s > kTsirelson + 1e-9) {
    std::ostringstream os;
    os << "zeta_from_violation: S = " << s << " exceeds 2*sqrt(2)";
    throw NonphysicalViolationError(os.str());
  }
  if (s < 2.0) return {1.0, false};
  const double z = s / 4.0 * std::sqrt(std::max(0.0, 8.0 - s * s));
  return {std::clamp(z, 0.0, 1.0), true};
}

ZetaCertificate ChshEstimate::conservative_zeta() const {
  return zeta_from_violation(std::min(s_hat - half_width, kTsirelson));
}

double hoeffding_half_width(std::int64_t rounds_per_setting, double delta) {
  if (rounds_per_setting < 1) throw DomainError("chsh: rounds_per_setting must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("chsh: delta must lie in (0, 1)");
  return 4.0 * std::sqrt(2.0 * std::log(8.0 / delta) / static_cast<double>(rounds_per_setting));
}

ChshEstimate estimate_chsh(const DeviceModel& device, std::int64_t rounds_per_setting,
                           double delta, std::uint64_t seed) {
  ChshEstimate est;
  est.half_width = hoeffding_half_width(rounds_per_setting, delta);
  est.rounds_per_setting = rounds_per_setting;
  est.confidence_delta = delta;

  RandomSuite rng(seed);
  const ComplexMatrix& rho = device.sigma_ab.mat();
  for (int a = 0; a < 2; ++a) {
    for (int t = 0; t < 2; ++t) {
      // Outcome order: (+,+), (+,-), (-,+), (-,-).
      std::array<double, 4> p{};
      int idx = 0;
      for (int sa : {+1, -1})
        for (int st : {+1, -1}) {
          const ComplexMatrix& pa = device.alice(a).outcome(sa > 0 ? 0 : 1);
          const ComplexMatrix pt = device.test(t).eigenprojector(st);
          p[static_cast<std::size_t>(idx++)] =
              std::max(0.0, (tensor_product(pa, pt) * rho).trace().real());
        }
      const double total = p[0] + p[1] + p[2] + p[3];
      for (auto& v : p) v /= total;
      const double c0 = p[0];
      const double c2 = p[0] + p[1] + p[2];
      std::int64_t agree = 0;
      for (std::int64_t r = 0; r < rounds_per_setting; ++r) {
        const double u = rng.uniform();
        agree += (u < c0 || u >= c2) ? 1 : -1;
      }
      est.correlators[a][t] = static_cast<double>(agree) / static_cast<double>(rounds_per_setting);
    }
  }
  est.s_hat = est.correlators[0][0] + est.correlators[0][1] + est.correlators[1][0] -
              est.correlators[1][1];
  return est;
}

}  // namespace di2pc::chsh
