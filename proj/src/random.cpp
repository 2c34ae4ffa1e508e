#include "di2pc/random.hpp"

#include <cmath>
#include <numbers>

#include "di2pc/errors.hpp"

namespace di2pc {

std::uint64_t child_seed(std::uint64_t master, std::uint64_t counter) noexcept {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RandomSuite::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomSuite::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int RandomSuite::uniform_int(int lo, int hi) {
  if (hi < lo) throw DomainError("uniform_int: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return lo + static_cast<int>(v % span);
}

bool RandomSuite::bernoulli(double p) { return uniform() < p; }

double RandomSuite::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

Complex RandomSuite::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

ComplexMatrix RandomSuite::ginibre(Index rows, Index cols) {
  ComplexMatrix g(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) g(r, c) = complex_normal();
  return g;
}

ComplexVector RandomSuite::pure_state(Index dim) {
  ComplexVector v = ginibre(dim, 1).col(0);
  return v / v.norm();
}

ComplexMatrix RandomSuite::haar_unitary(Index dim) {
  const ComplexMatrix z = ginibre(dim, dim);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < dim; ++i) {
    const Complex d = r(i, i);
    const double a = std::abs(d);
    q.col(i) *= a > 0 ? d / a : Complex(1.0);
  }
  return q;
}

DensityOperator RandomSuite::density(Index dim, Index rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  const ComplexMatrix g = ginibre(dim, rank);
  ComplexMatrix rho = g * g.adjoint();
  rho /= real_trace(rho);
  return DensityOperator::make(hermitian_part(rho));
}

ComplexMatrix RandomSuite::psd(Index dim, Index rank) {
  if (rank <= 0 || rank > dim) rank = dim;
  const ComplexMatrix g = ginibre(dim, rank);
  ComplexMatrix p = hermitian_part(g * g.adjoint());
  const double norm = operator_norm(p);
  return norm > 0 ? ComplexMatrix(p * (uniform(0.05, 1.0) / norm)) : p;
}

Povm RandomSuite::povm(Index dim, std::size_t outcomes) {
  if (outcomes == 0) throw ArityError("povm: need at least one outcome");
  std::vector<ComplexMatrix> raw;
  raw.reserve(outcomes);
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < outcomes; ++i) {
    const ComplexMatrix g = ginibre(dim, dim);
    raw.push_back(hermitian_part(g * g.adjoint()));
    total += raw.back();
  }
  const ComplexMatrix s = psd_inverse_sqrt(total);
  for (auto& e : raw) e = hermitian_part(s * e * s);
  return Povm::make(std::move(raw));
}

ComplexMatrix RandomSuite::projector(Index dim, Index rank) {
  if (rank < 0 || rank > dim) throw DomainError("projector: rank out of range");
  const ComplexMatrix u = haar_unitary(dim);
  const ComplexMatrix cols = u.leftCols(rank);
  return hermitian_part(cols * cols.adjoint());
}

BinaryObservable RandomSuite::binary_observable(Index dim) {
  const ComplexMatrix p = projector(dim, uniform_int(0, static_cast<int>(dim)));
  return BinaryObservable::make(2.0 * p - identity(dim));
}

}  // namespace di2pc
