#pragma once

// Simultaneous block decomposition of two projectors into mutually
// orthogonal invariant subspaces of dimension one or two (Jordan's lemma),
// and the effective absolute anti-commutator computed two ways.

#include <vector>

#include "di2pc/matcore.hpp"

namespace di2pc::jordan {

/// Projective two-outcome measurement {p0, p1 = I - p0}.
class BinaryMeasurement {
 public:
  static BinaryMeasurement make(ComplexMatrix p0, ComplexMatrix p1,
                                const Tolerances& tol = default_tolerances());
  static BinaryMeasurement from_projector(ComplexMatrix p0,
                                          const Tolerances& tol = default_tolerances());
  /// {(I + O)/2, (I - O)/2}.
  static BinaryMeasurement from_observable(const BinaryObservable& obs);

  const ComplexMatrix& p0() const noexcept { return p0_; }
  const ComplexMatrix& p1() const noexcept { return p1_; }
  Index dim() const noexcept { return p0_.rows(); }
  /// p0 - p1.
  ComplexMatrix observable() const { return p0_ - p1_; }
  const ComplexMatrix& outcome(int x) const noexcept { return x == 0 ? p0_ : p1_; }

 private:
  BinaryMeasurement(ComplexMatrix p0, ComplexMatrix p1) : p0_(std::move(p0)), p1_(std::move(p1)) {}
  ComplexMatrix p0_;
  ComplexMatrix p1_;
};

struct JordanBlock {
  int index = 0;
  int block_dim = 1;   // 1 or 2
  double beta = 0.0;   // [0, pi/2]
  /// One column (1-dim block) or two columns |0⁰⟩, |1⁰⟩ where |0⁰⟩ spans the
  /// block's part of ran m0.p0 and
  /// |0¹⟩ = cos(beta)|0⁰⟩ + sin(beta)|1⁰⟩ spans its part of ran m1.p0.
  ComplexMatrix basis;
  /// For 1-dim blocks: the deterministic outcome of each measurement on the
  /// block vector. Unused (0) for 2-dim blocks.
  int outcome0 = 0;
  int outcome1 = 0;

  /// S_j, the projector onto the block.
  ComplexMatrix support() const { return basis * basis.adjoint(); }
  /// Restriction of m0.p0 (theta = 0) or m1.p0 (theta = 1) to the block.
  ComplexMatrix p0_part(int theta) const;
  double epsilon() const;  // |cos(2 beta)|
};

struct JordanDecomposition {
  std::vector<JordanBlock> blocks;
  Index total_dim = 0;

  /// Rebuilds m0.p0 (theta = 0) or m1.p0 (theta = 1) from the blocks.
  ComplexMatrix reconstruct_p0(int theta) const;
};

struct NaimarkDilation {
  BinaryMeasurement measurement;  // on C^2 ⊗ C^D (outcome register first)
  ComplexMatrix isometry;         // (2D) x D, V = [sqrt(E0); sqrt(E1)]
};

/// Projective realization of a two-element POVM. Throws ArityError unless
/// the POVM has exactly two elements.
NaimarkDilation naimark_dilate(const Povm& povm);

/// Angle-classification threshold on cos²(beta).
inline constexpr double kAngleThreshold = 1e-8;

JordanDecomposition decompose_pair(const BinaryMeasurement& m0, const BinaryMeasurement& m1,
                                   double angle_threshold = kAngleThreshold);

/// p_j = tr(S_j sigma), clamped at zero.
std::vector<double> block_probabilities(const JordanDecomposition& dec,
                                        const DensityOperator& sigma);

/// ½ tr(|{A0, A1}| sigma) with A_theta = P0 - P1.
double epsilon_plus_direct(const BinaryMeasurement& m0, const BinaryMeasurement& m1,
                           const DensityOperator& sigma);

/// Σ_j p_j |cos(2 beta_j)|.
double epsilon_plus_blocks(const JordanDecomposition& dec, const DensityOperator& sigma);

}  // namespace di2pc::jordan
