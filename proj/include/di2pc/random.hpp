#pragma once

#include <cstdint>
#include <random>

#include "di2pc/matcore.hpp"

namespace di2pc {

/// Derives an independent child seed from a master seed and a counter
/// (splitmix64 finalizer). Parallel workloads use child_seed(master, i) for
/// item i so results do not depend on scheduling.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t counter) noexcept;

/// Explicit-state random source for ensembles of operators.
///
/// Only the raw 64-bit output of mt19937_64 is consumed; uniforms and
/// Gaussians are derived here so streams are identical across standard
/// library implementations.
class RandomSuite {
 public:
  explicit RandomSuite(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  int uniform_int(int lo, int hi);  // inclusive
  bool bernoulli(double p);
  double normal();
  Complex complex_normal();

  ComplexMatrix ginibre(Index rows, Index cols);
  ComplexVector pure_state(Index dim);
  ComplexMatrix haar_unitary(Index dim);
  /// Rank-`rank` density operator from a Ginibre factor (rank = dim gives the
  /// Hilbert-Schmidt ensemble).
  DensityOperator density(Index dim, Index rank = 0);
  /// Random PSD operator with operator norm in (0, 1].
  ComplexMatrix psd(Index dim, Index rank = 0);
  Povm povm(Index dim, std::size_t outcomes);
  ComplexMatrix projector(Index dim, Index rank);
  BinaryObservable binary_observable(Index dim);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace di2pc
