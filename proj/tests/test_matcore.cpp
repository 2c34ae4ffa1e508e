#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "approx.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "di2pc/errors.hpp"
#include "di2pc/matcore.hpp"
#include "di2pc/random.hpp"

using namespace di2pc;

namespace {

ComplexMatrix random_matrix(RandomSuite& rng, Index r, Index c) { return rng.ginibre(r, c); }

ComplexMatrix random_hermitian(RandomSuite& rng, Index d) {
  const ComplexMatrix g = rng.ginibre(d, d);
  return 0.5 * (g + g.adjoint());
}

}  // namespace

TEST_CASE("tensor product") {
  CHECK(max_abs_diff(tensor_product(identity(2), identity(2)), identity(4)) == 0.0);
  CHECK(max_abs_diff(tensor_product(diagonal({1.0, 0.0}), diagonal({0.0, 1.0})),
                     diagonal({0.0, 1.0, 0.0, 0.0})) == 0.0);
  ComplexVector v00 = ComplexVector::Zero(4);
  v00(0) = 1.0;
  const ComplexMatrix zz = tensor_product(pauli::z(), pauli::z());
  CHECK(max_abs_diff(zz * projector_onto(v00), projector_onto(v00)) == 0.0);

  Tolerances tight;
  tight.dim_cap = 8;
  CHECK_THROWS_AS(tensor_product(identity(4), identity(4), tight), DimensionCapError);
  CHECK_THROWS_AS(tensor_product(identity(64), identity(128)), DimensionCapError);

  const std::array<ComplexMatrix, 3> f{pauli::x(), pauli::y(), pauli::z()};
  CHECK(max_abs_diff(tensor_product(f), tensor_product(tensor_product(f[0], f[1]), f[2])) == 0.0);
}

TEST_CASE("partial trace") {
  RandomSuite rng(11);
  const auto ra = rng.density(3).mat();
  const auto rb = rng.density(2).mat();
  const std::array<Index, 2> dims{3, 2};
  const std::array<Index, 1> keep_a{0}, keep_b{1};
  CHECK(max_abs_diff(partial_trace(tensor_product(ra, rb), dims, keep_a), ra) <= 1e-12);
  CHECK(max_abs_diff(partial_trace(tensor_product(ra, rb), dims, keep_b), rb) <= 1e-12);

  ComplexVector epr = ComplexVector::Zero(4);
  epr(0) = epr(3) = 1.0 / std::numbers::sqrt2;
  const std::array<Index, 2> qq{2, 2};
  CHECK(max_abs_diff(partial_trace(projector_onto(epr), qq, keep_b), identity(2) / 2.0) <= 1e-15);

  for (int i = 0; i < 100; ++i) {
    const auto rho = rng.density(12).mat();
    const std::array<Index, 3> d3{2, 3, 2};
    const std::array<Index, 2> keep{2, 0};
    CHECK(std::abs(real_trace(partial_trace(rho, d3, keep)) - 1.0) <= 1e-12);
  }

  // Three-factor product: keep the outer two in original order.
  const auto r1 = rng.density(2).mat(), r2 = rng.density(3).mat(), r3 = rng.density(2).mat();
  const std::array<ComplexMatrix, 3> facs{r1, r2, r3};
  const std::array<Index, 3> d3{2, 3, 2};
  const std::array<Index, 2> keep{2, 0};
  CHECK(max_abs_diff(partial_trace(tensor_product(facs), d3, keep), tensor_product(r1, r3)) <= 1e-12);

  const std::array<Index, 2> wrong{3, 3};
  CHECK_THROWS_AS(partial_trace(tensor_product(ra, rb), wrong, keep_a), ShapeError);
}

TEST_CASE("norms") {
  CHECK(operator_norm(identity(5)) == approx(1.0));
  CHECK(operator_norm(diagonal({3.0, -4.0})) == approx(4.0));
  ComplexMatrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  CHECK(induced_norm(m, InducedNorm::one) == approx(6.0));
  CHECK(induced_norm(m, InducedNorm::infinity) == approx(7.0));
  CHECK(induced_norm(identity(3), InducedNorm::one) == 1.0);
  CHECK(induced_norm(identity(3), InducedNorm::infinity) == 1.0);
  CHECK(schatten_norm(diagonal({3.0, -4.0}), 2.0) == approx(5.0));
  CHECK(trace_norm(diagonal({3.0, -4.0})) == approx(7.0));
  CHECK(schatten_norm(m, std::numeric_limits<double>::infinity()) ==
        approx(operator_norm(m)));

  RandomSuite rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Index r = rng.uniform_int(1, 8), c = rng.uniform_int(1, 8);
    const ComplexMatrix l = random_matrix(rng, r, c);
    const double n = operator_norm(l);
    CHECK(n <= std::sqrt(induced_norm(l, InducedNorm::one) * induced_norm(l, InducedNorm::infinity)) +
                   1e-12);
    CHECK(n * n == approx(operator_norm(l.adjoint() * l)).epsilon(1e-9));
    CHECK(n * n == approx(operator_norm(l * l.adjoint())).epsilon(1e-9));
    const ComplexMatrix h = random_hermitian(rng, r);
    CHECK(induced_norm(h, InducedNorm::one) ==
          approx(induced_norm(h, InducedNorm::infinity)).epsilon(1e-12));
  }
}

TEST_CASE("psd ordering implies norm ordering") {
  RandomSuite rng(6);
  for (int i = 0; i < 300; ++i) {
    const Index d = rng.uniform_int(1, 10);
    const ComplexMatrix a = rng.psd(d);
    // B = A − √A P √A with P a projector, so 0 ≤ B ≤ A.
    const ComplexMatrix sa = psd_sqrt(a);
    const ComplexMatrix b = a - sa * rng.projector(d, rng.uniform_int(0, static_cast<int>(d))) * sa;
    CHECK(operator_norm(a) >= operator_norm(b) - 1e-12);
  }
}

TEST_CASE("square root and absolute value") {
  CHECK(max_abs_diff(psd_sqrt(diagonal({4.0, 9.0})), diagonal({2.0, 3.0})) <= 1e-14);
  CHECK(max_abs_diff(matrix_abs(-2.0 * identity(3)), 2.0 * identity(3)) <= 1e-14);
  const ComplexMatrix ac = pauli::z() * pauli::x() + pauli::x() * pauli::z();
  CHECK(matrix_abs(ac).norm() <= 1e-14);
  CHECK_THROWS_AS(psd_sqrt(diagonal({1.0, -0.1})), DomainError);
  CHECK(max_abs_diff(psd_sqrt(diagonal({1.0, -1e-11})), diagonal({1.0, 0.0})) <= 1e-14);

  RandomSuite rng(9);
  for (int i = 0; i < 200; ++i) {
    const Index d = rng.uniform_int(1, 12);
    const ComplexMatrix a = rng.psd(d, rng.uniform_int(1, static_cast<int>(d)));
    const ComplexMatrix s = psd_sqrt(a);
    CHECK(max_abs_diff(s * s, a) <= 1e-9);
    const ComplexMatrix g = rng.ginibre(d, d);
    const ComplexMatrix ab = matrix_abs(g);
    CHECK(max_abs_diff(ab * ab, g.adjoint() * g) <= 1e-9);
    CHECK(min_eigenvalue(ab) >= -1e-10);
  }
}

TEST_CASE("hermitian eigensolver") {
  auto ez = eig_hermitian(pauli::z());
  CHECK(ez.values(0) == approx(-1.0));
  CHECK(ez.values(1) == approx(1.0));
  auto ex = eig_hermitian(pauli::x());
  CHECK(ex.values(0) == approx(-1.0));
  ComplexVector plus(2);
  plus << 1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2;
  CHECK(std::abs(std::abs(ex.vectors.col(1).dot(plus)) - 1.0) <= 1e-12);
  ComplexMatrix bad(2, 2);
  bad << 1.0, 1.0, 0.0, 1.0;
  CHECK_THROWS_AS(eig_hermitian(bad), DomainError);

  RandomSuite rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Index d = rng.uniform_int(1, 16);
    const ComplexMatrix h = random_hermitian(rng, d);
    const auto e = eig_hermitian(h);
    const ComplexMatrix rec = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CHECK(max_abs_diff(rec, h) <= 1e-10);
    CHECK(max_abs_diff(e.vectors.adjoint() * e.vectors, identity(d)) <= 1e-10);
    for (Index k = 1; k < d; ++k) CHECK(e.values(k) >= e.values(k - 1));
  }
}

TEST_CASE("validated types") {
  CHECK_THROWS_AS(DensityOperator::make(diagonal({0.6, 0.6})), DomainError);
  CHECK_THROWS_AS(DensityOperator::make(diagonal({1.2, -0.2})), DomainError);
  CHECK_THROWS_AS(DensityOperator::make(ComplexMatrix::Ones(2, 3)), ShapeError);
  ComplexMatrix nan = identity(2) / 2.0;
  nan(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(DensityOperator::make(nan));
  CHECK_NOTHROW(DensityOperator::make(diagonal({0.5, 0.5})));
  CHECK_THROWS_AS(BinaryObservable::make(diagonal({1.0, 0.5})), DomainError);
  const auto o = BinaryObservable::make(pauli::x());
  CHECK(max_abs_diff(o.eigenprojector(+1) - o.eigenprojector(-1), pauli::x()) <= 1e-12);
  CHECK_THROWS_AS(Povm::make({diagonal({1.0, 0.0}), diagonal({0.0, 0.5})}), DomainError);
  CHECK(Povm::make({diagonal({1.0, 0.0}), diagonal({0.0, 1.0})}).size() == 2);
}

TEST_CASE("random suite") {
  RandomSuite a(42), b(42);
  const ComplexMatrix ua = a.haar_unitary(4), ub = b.haar_unitary(4);
  CHECK(max_abs_diff(ua, ub) == 0.0);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(child_seed(42, 0) != child_seed(42, 1));
  CHECK(child_seed(42, 7) == child_seed(42, 7));

  RandomSuite rng(1234);
  for (int i = 0; i < 10000; ++i) {
    const Index d = rng.uniform_int(1, 6);
    CHECK_NOTHROW(DensityOperator::make(rng.density(d, rng.uniform_int(1, static_cast<int>(d))).mat()));
    const ComplexMatrix u = rng.haar_unitary(d);
    CHECK(max_abs_diff(u.adjoint() * u, identity(d)) <= 1e-10);
  }
  for (int i = 0; i < 500; ++i) {
    const Index d = rng.uniform_int(1, 8);
    CHECK_NOTHROW(Povm::make(rng.povm(d, rng.uniform_int(1, 5)).elements()));
    const int rank = rng.uniform_int(0, static_cast<int>(d));
    const ComplexMatrix p = rng.projector(d, rank);
    CHECK(max_abs_diff(p * p, p) <= 1e-10);
    CHECK(real_trace(p) == approx(rank));
    const ComplexMatrix q = rng.psd(d);
    CHECK(operator_norm(q) <= 1.0 + 1e-12);
    CHECK(min_eigenvalue(q) >= -1e-12);
  }
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += rng.normal();
  CHECK(std::abs(sum / 100000) < 0.02);
}

TEST_CASE("matrix json round trip") {
  RandomSuite rng(8);
  const ComplexMatrix m = rng.ginibre(3, 2);
  const auto j = matrix_to_json(m);
  CHECK(j["rows"] == 3);
  CHECK(j["cols"] == 2);
  CHECK(j["data"].size() == 6);
  CHECK(max_abs_diff(matrix_from_json(j), m) == 0.0);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse(R"({"rows":2,"cols":2,"data":[[1,0]]})")),
                  ParseError);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[1,2]")), ParseError);
}
