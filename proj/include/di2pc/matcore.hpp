#pragma once

// Dense complex operator algebra used by every other module.
//
// Matrices are plain Eigen::MatrixXcd values. The validated wrappers
// (DensityOperator, BinaryObservable, Povm) check their invariants once at
// construction and are immutable afterwards.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace di2pc {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Tolerances {
  double herm = 1e-10;       // Hermiticity / PSD / trace structure checks
  double eq = 1e-9;          // reconstruction and idempotence checks
  double psd_clamp = 1e-10;  // eigenvalues in [-psd_clamp, 0) are treated as 0
  Index dim_cap = 4096;      // largest dimension any tensor product may reach

  static Tolerances strict();
};

const Tolerances& default_tolerances();

// ---------------------------------------------------------------------------
// Elementary constructors

ComplexMatrix identity(Index dim);
ComplexMatrix projector_onto(const ComplexVector& v);
ComplexMatrix diagonal(std::initializer_list<Complex> entries);

namespace pauli {
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

// ---------------------------------------------------------------------------
// Structure predicates

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
bool all_finite(const ComplexMatrix& m);
bool is_hermitian(const ComplexMatrix& m, double tol);
ComplexMatrix hermitian_part(const ComplexMatrix& m);
double real_trace(const ComplexMatrix& m);

// ---------------------------------------------------------------------------
// Products and reductions

/// Kronecker product a ⊗ b. Throws DimensionCapError when either resulting
/// dimension exceeds tol.dim_cap.
ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                             const Tolerances& tol = default_tolerances());

/// Left-to-right Kronecker product of a non-empty list.
ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors,
                             const Tolerances& tol = default_tolerances());

/// Reduced operator on the subsystems listed in `keep` (ascending order is
/// not required; output factors follow the original subsystem order).
ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const Index> dims,
                            std::span<const Index> keep);

// ---------------------------------------------------------------------------
// Spectral tools. Everything below is built on one Hermitian eigensolver.

struct HermitianEigen {
  RealVector values;     // ascending
  ComplexMatrix vectors;  // orthonormal columns, same order as values
};

/// Throws DomainError if m deviates from Hermitian by more than tol
/// (max entry deviation).
HermitianEigen eig_hermitian(const ComplexMatrix& m, double tol = 1e-9);

/// Singular values, descending.
RealVector singular_values(const ComplexMatrix& m);

/// Largest singular value.
double operator_norm(const ComplexMatrix& m);

enum class InducedNorm { one, infinity };

/// Induced vector-p operator norm: max absolute column sum (one) or row sum
/// (infinity).
double induced_norm(const ComplexMatrix& m, InducedNorm p);

/// Schatten p-norm for p >= 1; pass +infinity for the operator norm.
double schatten_norm(const ComplexMatrix& m, double p);
double trace_norm(const ComplexMatrix& m);

/// Square root of a PSD matrix. Eigenvalues in [-tol.psd_clamp, 0) are
/// clamped; anything more negative is a DomainError.
ComplexMatrix psd_sqrt(const ComplexMatrix& m, const Tolerances& tol = default_tolerances());

/// |M| = sqrt(M† M).
ComplexMatrix matrix_abs(const ComplexMatrix& m);

/// Moore-Penrose style inverse square root on the support (eigenvalues
/// above `cutoff`), zero on the kernel.
ComplexMatrix psd_inverse_sqrt(const ComplexMatrix& m, double cutoff = 1e-13);

double min_eigenvalue(const ComplexMatrix& hermitian);
double max_eigenvalue(const ComplexMatrix& hermitian);

// ---------------------------------------------------------------------------
// Validated value types

class DensityOperator {
 public:
  static DensityOperator make(ComplexMatrix mat, const Tolerances& tol = default_tolerances());
  static DensityOperator maximally_mixed(Index dim);
  static DensityOperator pure(const ComplexVector& psi);

  const ComplexMatrix& mat() const noexcept { return mat_; }
  Index dim() const noexcept { return mat_.rows(); }

 private:
  explicit DensityOperator(ComplexMatrix mat) : mat_(std::move(mat)) {}
  ComplexMatrix mat_;
};

class BinaryObservable {
 public:
  static BinaryObservable make(ComplexMatrix mat, const Tolerances& tol = default_tolerances());

  const ComplexMatrix& mat() const noexcept { return mat_; }
  Index dim() const noexcept { return mat_.rows(); }

  /// Spectral projector for outcome +1 (sign = +1) or -1 (sign = -1).
  ComplexMatrix eigenprojector(int sign) const;

 private:
  explicit BinaryObservable(ComplexMatrix mat) : mat_(std::move(mat)) {}
  ComplexMatrix mat_;
};

class Povm {
 public:
  static Povm make(std::vector<ComplexMatrix> elements,
                   const Tolerances& tol = default_tolerances());

  const std::vector<ComplexMatrix>& elements() const noexcept { return elements_; }
  std::size_t size() const noexcept { return elements_.size(); }
  Index dim() const noexcept { return elements_.front().rows(); }

 private:
  explicit Povm(std::vector<ComplexMatrix> elements) : elements_(std::move(elements)) {}
  std::vector<ComplexMatrix> elements_;
};

// ---------------------------------------------------------------------------
// JSON encoding: {"rows": R, "cols": C, "data": [[re, im], ...]} row-major.

nlohmann::ordered_json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace di2pc
