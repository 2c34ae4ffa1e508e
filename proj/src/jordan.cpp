#include "di2pc/jordan.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "di2pc/errors.hpp"

namespace di2pc::jordan {

namespace {

void require_projector(const ComplexMatrix& p, const Tolerances& tol, const char* what) {
  if (!all_finite(p)) throw DomainError(std::string(what) + ": non-finite entry");
  if (!is_hermitian(p, tol.eq)) throw DomainError(std::string(what) + ": not Hermitian");
  if (max_abs_diff(p * p, p) > tol.eq) throw DomainError(std::string(what) + ": not idempotent");
}

// Orthonormal bases of the range (eigenvalue 1) and kernel of a projector.
std::pair<ComplexMatrix, ComplexMatrix> range_and_kernel(const ComplexMatrix& p) {
  const auto eig = eig_hermitian(p, 1e-8);
  const Index d = p.rows();
  Index rank = 0;
  for (Index i = 0; i < d; ++i)
    if (eig.values(i) > 0.5) ++rank;
  // Eigenvalues ascend, so the kernel comes first.
  return {eig.vectors.rightCols(rank), eig.vectors.leftCols(d - rank)};
}

}  // namespace

BinaryMeasurement BinaryMeasurement::make(ComplexMatrix p0, ComplexMatrix p1,
                                          const Tolerances& tol) {
  if (p0.rows() != p0.cols() || p1.rows() != p1.cols() || p0.rows() != p1.rows() ||
      p0.rows() == 0)
    throw ShapeError("BinaryMeasurement: elements must be square of equal size");
  require_projector(p0, tol, "BinaryMeasurement p0");
  require_projector(p1, tol, "BinaryMeasurement p1");
  if (max_abs_diff(p0 + p1, identity(p0.rows())) > tol.eq)
    throw DomainError("BinaryMeasurement: p0 + p1 differs from identity");
  return BinaryMeasurement(hermitian_part(p0), hermitian_part(p1));
}

BinaryMeasurement BinaryMeasurement::from_projector(ComplexMatrix p0, const Tolerances& tol) {
  if (p0.rows() != p0.cols()) throw ShapeError("BinaryMeasurement: p0 must be square");
  ComplexMatrix p1 = identity(p0.rows()) - p0;
  return make(std::move(p0), std::move(p1), tol);
}

BinaryMeasurement BinaryMeasurement::from_observable(const BinaryObservable& obs) {
  return make(obs.eigenprojector(+1), obs.eigenprojector(-1));
}

ComplexMatrix JordanBlock::p0_part(int theta) const {
  const Index d = basis.rows();
  if (block_dim == 1) {
    const int outcome = theta == 0 ? outcome0 : outcome1;
    return outcome == 0 ? ComplexMatrix(basis * basis.adjoint()) : ComplexMatrix::Zero(d, d);
  }
  if (theta == 0) return basis.col(0) * basis.col(0).adjoint();
  const ComplexVector v = std::cos(beta) * basis.col(0) + std::sin(beta) * basis.col(1);
  return v * v.adjoint();
}

double JordanBlock::epsilon() const { return std::abs(std::cos(2.0 * beta)); }

ComplexMatrix JordanDecomposition::reconstruct_p0(int theta) const {
  ComplexMatrix acc = ComplexMatrix::Zero(total_dim, total_dim);
  for (const auto& b : blocks) acc += b.p0_part(theta);
  return acc;
}

NaimarkDilation naimark_dilate(const Povm& povm) {
  if (povm.size() != 2) throw ArityError("naimark_dilate: POVM must have exactly two elements");
  const Index d = povm.dim();
  ComplexMatrix v(2 * d, d);
  v.topRows(d) = psd_sqrt(povm.elements()[0]);
  v.bottomRows(d) = psd_sqrt(povm.elements()[1]);
  ComplexMatrix p0 = ComplexMatrix::Zero(2 * d, 2 * d);
  p0.topLeftCorner(d, d) = identity(d);
  return {BinaryMeasurement::from_projector(std::move(p0)), std::move(v)};
}

JordanDecomposition decompose_pair(const BinaryMeasurement& m0, const BinaryMeasurement& m1,
                                   double angle_threshold) {
  if (m0.dim() != m1.dim()) throw ShapeError("decompose_pair: dimension mismatch");
  const Index dim = m0.dim();
  const ComplexMatrix& q = m1.p0();
  const auto [range, kernel] = range_and_kernel(m0.p0());

  JordanDecomposition dec;
  dec.total_dim = dim;
  auto push = [&](JordanBlock b) {
    b.index = static_cast<int>(dec.blocks.size());
    dec.blocks.push_back(std::move(b));
  };

  // Range of m0.p0: eigenvalues of the compression of m1.p0 are cos²(beta).
  std::vector<ComplexVector> partners;
  if (range.cols() > 0) {
    const ComplexMatrix h = hermitian_part(range.adjoint() * q * range);
    const auto eig = eig_hermitian(h, 1e-8);
    for (Index i = 0; i < eig.values.size(); ++i) {
      const double c = std::clamp(eig.values(i), 0.0, 1.0);
      ComplexVector v = range * eig.vectors.col(i);
      v /= v.norm();
      JordanBlock b;
      if (c > 1.0 - angle_threshold) {
        b.basis = v;
        b.beta = 0.0;
        b.outcome0 = 0;
        b.outcome1 = 0;
      } else if (c < angle_threshold) {
        b.basis = v;
        b.beta = std::numbers::pi / 2;
        b.outcome0 = 0;
        b.outcome1 = 1;
      } else {
        // Gram-Schmidt of m1.p0 |0⁰⟩ against |0⁰⟩ gives |1⁰⟩ with a real
        // nonnegative overlap ⟨1⁰|0¹⟩ = sin(beta).
        ComplexVector w = q * v - c * v;
        w -= v * (v.adjoint() * w)(0);
        w /= w.norm();
        b.block_dim = 2;
        b.basis.resize(dim, 2);
        b.basis.col(0) = v;
        b.basis.col(1) = w;
        b.beta = std::acos(std::sqrt(c));
        partners.push_back(w);
      }
      push(std::move(b));
    }
  }

  // Kernel of m0.p0 minus the partner vectors of the 2-dim blocks: what is
  // left splits into ker∩ran and ker∩ker of m1.p0.
  if (kernel.cols() > 0) {
    const Index k = kernel.cols();
    ComplexMatrix complement_basis = kernel;
    if (!partners.empty()) {
      ComplexMatrix g(k, static_cast<Index>(partners.size()));
      for (std::size_t i = 0; i < partners.size(); ++i)
        g.col(static_cast<Index>(i)) = kernel.adjoint() * partners[i];
      const ComplexMatrix c = identity(k) - g * g.adjoint();
      const auto eig = eig_hermitian(hermitian_part(c), 1e-6);
      const Index keep_count = k - static_cast<Index>(partners.size());
      complement_basis = kernel * eig.vectors.rightCols(std::max<Index>(keep_count, 0));
    }
    if (complement_basis.cols() > 0) {
      const ComplexMatrix h = hermitian_part(complement_basis.adjoint() * q * complement_basis);
      const auto eig = eig_hermitian(h, 1e-8);
      for (Index i = 0; i < eig.values.size(); ++i) {
        ComplexVector v = complement_basis * eig.vectors.col(i);
        v /= v.norm();
        JordanBlock b;
        b.basis = v;
        b.outcome0 = 1;
        if (eig.values(i) > 0.5) {
          b.outcome1 = 0;
          b.beta = std::numbers::pi / 2;
        } else {
          b.outcome1 = 1;
          b.beta = 0.0;
        }
        push(std::move(b));
      }
    }
  }
  return dec;
}

std::vector<double> block_probabilities(const JordanDecomposition& dec,
                                        const DensityOperator& sigma) {
  if (sigma.dim() != dec.total_dim) throw ShapeError("block_probabilities: dimension mismatch");
  std::vector<double> p;
  p.reserve(dec.blocks.size());
  for (const auto& b : dec.blocks) {
    const double v = (b.basis.adjoint() * sigma.mat() * b.basis).trace().real();
    p.push_back(std::max(0.0, v));
  }
  return p;
}

double epsilon_plus_direct(const BinaryMeasurement& m0, const BinaryMeasurement& m1,
                           const DensityOperator& sigma) {
  if (m0.dim() != m1.dim() || m0.dim() != sigma.dim())
    throw ShapeError("epsilon_plus_direct: dimension mismatch");
  const ComplexMatrix a0 = m0.observable();
  const ComplexMatrix a1 = m1.observable();
  const ComplexMatrix anti = hermitian_part(a0 * a1 + a1 * a0);
  const double v = 0.5 * (matrix_abs(anti) * sigma.mat()).trace().real();
  return std::clamp(v, 0.0, 1.0);
}

double epsilon_plus_blocks(const JordanDecomposition& dec, const DensityOperator& sigma) {
  const auto p = block_probabilities(dec, sigma);
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += p[j] * dec.blocks[j].epsilon();
  return std::clamp(acc, 0.0, 1.0);
}

}  // namespace di2pc::jordan
