#include "di2pc/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "di2pc/errors.hpp"

namespace di2pc {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::domain: return "domain";
    case ErrorKind::dimension_cap: return "dimension_cap";
    case ErrorKind::round_cap: return "round_cap";
    case ErrorKind::arity: return "arity";
    case ErrorKind::nonphysical_violation: return "nonphysical_violation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::verification: return "verification";
  }
  return "unknown";
}

Tolerances Tolerances::strict() {
  Tolerances t;
  t.herm = 1e-12;
  t.eq = 1e-11;
  t.psd_clamp = 1e-12;
  return t;
}

const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

ComplexMatrix identity(Index dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix projector_onto(const ComplexVector& v) {
  const double n2 = v.squaredNorm();
  if (n2 == 0.0) throw DomainError("projector_onto: zero vector");
  return v * v.adjoint() / n2;
}

ComplexMatrix diagonal(std::initializer_list<Complex> entries) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(entries.size()),
                                        static_cast<Index>(entries.size()));
  Index i = 0;
  for (const auto& e : entries) {
    m(i, i) = e;
    ++i;
  }
  return m;
}

namespace pauli {
ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
ComplexMatrix y() {
  ComplexMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return m;
}
ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("max_abs_diff: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

bool all_finite(const ComplexMatrix& m) {
  for (Index i = 0; i < m.size(); ++i) {
    const Complex v = m.data()[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

double real_trace(const ComplexMatrix& m) { return m.trace().real(); }

ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b,
                             const Tolerances& tol) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  if (rows > tol.dim_cap || cols > tol.dim_cap) {
    std::ostringstream os;
    os << "tensor_product: dimension " << rows << "x" << cols << " exceeds cap "
       << tol.dim_cap;
    throw DimensionCapError(os.str());
  }
  ComplexMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix tensor_product(std::span<const ComplexMatrix> factors, const Tolerances& tol) {
  if (factors.empty()) throw ShapeError("tensor_product: empty factor list");
  ComplexMatrix acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = tensor_product(acc, factors[i], tol);
  return acc;
}

ComplexMatrix partial_trace(const ComplexMatrix& rho, std::span<const Index> dims,
                            std::span<const Index> keep) {
  if (rho.rows() != rho.cols()) throw ShapeError("partial_trace: operator is not square");
  Index total = 1;
  for (Index d : dims) {
    if (d < 1) throw ShapeError("partial_trace: subsystem dimension must be positive");
    total *= d;
  }
  if (total != rho.rows()) throw ShapeError("partial_trace: dims do not multiply to operator size");

  const auto m = static_cast<Index>(dims.size());
  std::vector<bool> kept(static_cast<std::size_t>(m), false);
  for (Index k : keep) {
    if (k < 0 || k >= m) throw ShapeError("partial_trace: keep index out of range");
    if (kept[static_cast<std::size_t>(k)]) throw ShapeError("partial_trace: duplicate keep index");
    kept[static_cast<std::size_t>(k)] = true;
  }

  // Map every full index onto (kept index, traced index).
  Index kept_dim = 1;
  for (Index s = 0; s < m; ++s)
    if (kept[static_cast<std::size_t>(s)]) kept_dim *= dims[static_cast<std::size_t>(s)];
  std::vector<Index> kept_of(static_cast<std::size_t>(total));
  std::vector<Index> traced_of(static_cast<std::size_t>(total));
  for (Index r = 0; r < total; ++r) {
    Index rem = r;
    Index k_idx = 0, t_idx = 0, k_stride = 1, t_stride = 1;
    for (Index s = m - 1; s >= 0; --s) {
      const Index d = dims[static_cast<std::size_t>(s)];
      const Index digit = rem % d;
      rem /= d;
      if (kept[static_cast<std::size_t>(s)]) {
        k_idx += digit * k_stride;
        k_stride *= d;
      } else {
        t_idx += digit * t_stride;
        t_stride *= d;
      }
    }
    kept_of[static_cast<std::size_t>(r)] = k_idx;
    traced_of[static_cast<std::size_t>(r)] = t_idx;
  }

  ComplexMatrix out = ComplexMatrix::Zero(kept_dim, kept_dim);
  for (Index r = 0; r < total; ++r)
    for (Index c = 0; c < total; ++c)
      if (traced_of[static_cast<std::size_t>(r)] == traced_of[static_cast<std::size_t>(c)])
        out(kept_of[static_cast<std::size_t>(r)], kept_of[static_cast<std::size_t>(c)]) += rho(r, c);
  return out;
}

HermitianEigen eig_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) throw ShapeError("eig_hermitian: operator is not square");
  if (!is_hermitian(m, tol)) throw DomainError("eig_hermitian: operator is not Hermitian");
  if (m.size() == 0) return {RealVector(0), ComplexMatrix(0, 0)};
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(m));
  if (solver.info() != Eigen::Success) throw DomainError("eig_hermitian: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

RealVector singular_values(const ComplexMatrix& m) {
  // Work on the smaller Gram matrix.
  const ComplexMatrix gram = m.rows() >= m.cols() ? ComplexMatrix(m.adjoint() * m)
                                                  : ComplexMatrix(m * m.adjoint());
  if (gram.size() == 0) return RealVector(0);
  const auto eig = eig_hermitian(gram, std::numeric_limits<double>::infinity());
  RealVector s(eig.values.size());
  for (Index i = 0; i < s.size(); ++i)
    s(i) = std::sqrt(std::max(0.0, eig.values(eig.values.size() - 1 - i)));
  return s;
}

double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m)(0);
}

double induced_norm(const ComplexMatrix& m, InducedNorm p) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXd a = m.cwiseAbs();
  return p == InducedNorm::one ? a.colwise().sum().maxCoeff() : a.rowwise().sum().maxCoeff();
}

double schatten_norm(const ComplexMatrix& m, double p) {
  if (!(p >= 1.0)) throw DomainError("schatten_norm: p must be >= 1");
  const RealVector s = singular_values(m);
  if (s.size() == 0) return 0.0;
  if (std::isinf(p)) return s(0);
  double acc = 0.0;
  for (Index i = 0; i < s.size(); ++i) acc += std::pow(s(i), p);
  return std::pow(acc, 1.0 / p);
}

double trace_norm(const ComplexMatrix& m) {
  // Hermitian inputs (the common case) avoid squaring the condition number.
  if (is_hermitian(m, 1e-12)) {
    const auto eig = eig_hermitian(m, 1e-12);
    return eig.values.cwiseAbs().sum();
  }
  return singular_values(m).sum();
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m, const Tolerances& tol) {
  const auto eig = eig_hermitian(m, tol.eq);
  RealVector root(eig.values.size());
  for (Index i = 0; i < root.size(); ++i) {
    const double v = eig.values(i);
    if (v < -tol.psd_clamp) throw DomainError("psd_sqrt: operator is not positive semidefinite");
    root(i) = std::sqrt(std::max(0.0, v));
  }
  return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix matrix_abs(const ComplexMatrix& m) {
  if (is_hermitian(m, 1e-12)) {
    const auto eig = eig_hermitian(m, 1e-12);
    return eig.vectors * eig.values.cwiseAbs().asDiagonal() * eig.vectors.adjoint();
  }
  const ComplexMatrix gram = m.adjoint() * m;
  const auto eig = eig_hermitian(gram, std::numeric_limits<double>::infinity());
  RealVector root(eig.values.size());
  for (Index i = 0; i < root.size(); ++i) root(i) = std::sqrt(std::max(0.0, eig.values(i)));
  return eig.vectors * root.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix psd_inverse_sqrt(const ComplexMatrix& m, double cutoff) {
  const auto eig = eig_hermitian(m, 1e-8);
  RealVector inv(eig.values.size());
  for (Index i = 0; i < inv.size(); ++i)
    inv(i) = eig.values(i) > cutoff ? 1.0 / std::sqrt(eig.values(i)) : 0.0;
  return eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
}

double min_eigenvalue(const ComplexMatrix& hermitian) {
  const auto eig = eig_hermitian(hermitian, 1e-8);
  return eig.values.size() ? eig.values(0) : 0.0;
}

double max_eigenvalue(const ComplexMatrix& hermitian) {
  const auto eig = eig_hermitian(hermitian, 1e-8);
  return eig.values.size() ? eig.values(eig.values.size() - 1) : 0.0;
}

// ---------------------------------------------------------------------------

DensityOperator DensityOperator::make(ComplexMatrix mat, const Tolerances& tol) {
  if (mat.rows() != mat.cols() || mat.rows() == 0)
    throw ShapeError("DensityOperator: matrix must be square and non-empty");
  if (!all_finite(mat)) throw DomainError("DensityOperator: non-finite entry");
  if (!is_hermitian(mat, tol.herm)) throw DomainError("DensityOperator: not Hermitian");
  if (std::abs(real_trace(mat) - 1.0) > tol.herm)
    throw DomainError("DensityOperator: trace differs from 1");
  ComplexMatrix h = hermitian_part(mat);
  if (min_eigenvalue(h) < -tol.herm)
    throw DomainError("DensityOperator: not positive semidefinite");
  return DensityOperator(std::move(h));
}

DensityOperator DensityOperator::maximally_mixed(Index dim) {
  if (dim < 1) throw ShapeError("DensityOperator: dimension must be positive");
  return DensityOperator(identity(dim) / static_cast<double>(dim));
}

DensityOperator DensityOperator::pure(const ComplexVector& psi) {
  return make(projector_onto(psi));
}

BinaryObservable BinaryObservable::make(ComplexMatrix mat, const Tolerances& tol) {
  if (mat.rows() != mat.cols() || mat.rows() == 0)
    throw ShapeError("BinaryObservable: matrix must be square and non-empty");
  if (!all_finite(mat)) throw DomainError("BinaryObservable: non-finite entry");
  if (!is_hermitian(mat, tol.herm)) throw DomainError("BinaryObservable: not Hermitian");
  ComplexMatrix h = hermitian_part(mat);
  if (max_abs_diff(h * h, identity(h.rows())) > tol.eq)
    throw DomainError("BinaryObservable: square differs from identity");
  return BinaryObservable(std::move(h));
}

ComplexMatrix BinaryObservable::eigenprojector(int sign) const {
  const ComplexMatrix id = identity(dim());
  return sign > 0 ? ComplexMatrix(0.5 * (id + mat_)) : ComplexMatrix(0.5 * (id - mat_));
}

Povm Povm::make(std::vector<ComplexMatrix> elements, const Tolerances& tol) {
  if (elements.empty()) throw ArityError("Povm: no elements");
  const Index dim = elements.front().rows();
  ComplexMatrix sum = ComplexMatrix::Zero(dim, dim);
  for (auto& e : elements) {
    if (e.rows() != dim || e.cols() != dim) throw ShapeError("Povm: element dimensions differ");
    if (!all_finite(e)) throw DomainError("Povm: non-finite entry");
    if (!is_hermitian(e, tol.herm)) throw DomainError("Povm: element not Hermitian");
    e = hermitian_part(e);
    if (min_eigenvalue(e) < -tol.herm) throw DomainError("Povm: element not PSD");
    sum += e;
  }
  if (max_abs_diff(sum, identity(dim)) > tol.eq)
    throw DomainError("Povm: elements do not sum to identity");
  return Povm(std::move(elements));
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto data = nlohmann::ordered_json::array();
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) data.push_back({m(r, c).real(), m(r, c).imag()});
  j["data"] = std::move(data);
  return j;
}

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("data"))
    throw ParseError("matrix: expected object with rows, cols, data");
  if (!j["rows"].is_number_integer() || !j["cols"].is_number_integer())
    throw ParseError("matrix: rows/cols must be integers");
  const auto rows = j["rows"].get<Index>();
  const auto cols = j["cols"].get<Index>();
  if (rows < 1 || cols < 1) throw ParseError("matrix: rows/cols must be positive");
  const auto& data = j["data"];
  if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols)
    throw ParseError("matrix: data length differs from rows*cols");
  ComplexMatrix m(rows, cols);
  for (Index k = 0; k < rows * cols; ++k) {
    const auto& e = data[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError("matrix: each entry must be [re, im]");
    const Complex v(e[0].get<double>(), e[1].get<double>());
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw ParseError("matrix: non-finite entry");
    m(k / cols, k % cols) = v;
  }
  return m;
}

}  // namespace di2pc
