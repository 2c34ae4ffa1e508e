#pragma once

// Exact guessing-game values for explicit bounded-storage attacks, a
// see-saw search over general encodings, and fuzzing harnesses for the
// three inequalities the security bound rests on.
//
// Bit strings of length n are packed into integers with round 0 in the most
// significant bit, matching the left-to-right tensor order of rounds.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "di2pc/device.hpp"
#include "di2pc/matcore.hpp"

namespace di2pc::adversary {

inline constexpr int kMaxRounds = 10;
inline constexpr int kMaxGeneralRounds = 3;

/// One classical outcome of an instrument and its operation elements.
using KrausList = std::vector<ComplexMatrix>;

/// Quantum instrument B^{⊗n} → C^{out_dim} with classical outcome labels.
struct Instrument {
  Index in_dim = 1;
  Index out_dim = 1;
  std::vector<KrausList> outcomes;

  /// Σ E†E = I within tol; throws DomainError otherwise.
  void validate(double tol = 1e-9) const;
};

enum class StrategyKind { measure_all, store_subset, general_encoding };

struct AttackStrategy {
  StrategyKind kind = StrategyKind::measure_all;
  /// measure_all: one angle per round; store_subset: angles of the rounds
  /// that are measured (entries of kept rounds are ignored). A round measured
  /// at angle φ uses the eigenbasis of cos φ Z + sin φ X (qubits only).
  std::vector<double> angles;
  std::vector<int> kept;  // store_subset, 0-based round indices
  Instrument instrument;  // general_encoding

  static AttackStrategy measure_all(std::vector<double> angles);
  /// Intermediate-basis measurement on every round (φ = π/4).
  static AttackStrategy breidbart(int n);
  static AttackStrategy store_subset(std::vector<int> kept, std::vector<double> angles);
  static AttackStrategy store_all(int n);
  static AttackStrategy general(Instrument instrument);

  std::string label() const;

  /// Lowers the strategy to an instrument on n rounds of a dim_b system.
  /// Throws DomainError for malformed parameters or memory above d.
  Instrument to_instrument(int n, Index dim_b, Index d) const;
};

nlohmann::ordered_json strategy_to_json(const AttackStrategy& s);
AttackStrategy strategy_from_json(const nlohmann::json& j);

/// Bob's unnormalized conditional operators tr_A[(P^θ_x ⊗ I) σ^{⊗n}],
/// indexed by x, for one basis string θ.
std::vector<ComplexMatrix> conditional_operators(const DeviceModel& device, int n,
                                                 std::uint32_t theta);

struct Branch {
  int label = 0;                      // classical outcome index of the instrument
  std::vector<ComplexMatrix> states;  // unnormalized ρ_{x,k}, indexed by x
};

struct Ensemble {
  int n = 1;
  std::uint32_t theta = 0;
  std::vector<double> q;  // Born probability of Alice's outcome x
  std::vector<Branch> branches;

  /// ρ_{x,k} / tr ρ_{x,k}; empty when the branch has zero weight.
  std::optional<ComplexMatrix> normalized(int branch, std::uint32_t x) const;
};

Ensemble post_measurement_ensemble(const DeviceModel& device, const AttackStrategy& strategy,
                                   int n, std::uint32_t theta, Index d);

struct DiscriminationOptions {
  int max_iterations = 10000;
  double tolerance = 1e-9;  // stop once the dual gap is below this
};

struct DiscriminationResult {
  double value = 0.0;  // Σ tr(F_y R_y) for the returned POVM
  double upper = 0.0;  // dual bound tr(Y)
  double gap = 0.0;    // upper − value
  int iterations = 0;
  bool converged = true;
  std::vector<ComplexMatrix> povm;
};

/// max over POVMs {F_y} of Σ_y tr(F_y R_y) for PSD operators R_y
/// (prior-weighted states). Exact for one-dimensional problems and two
/// hypotheses; otherwise a fixed-point iteration started from the pretty
/// good measurement, certified by Y = Σ R_y F_y lifted until Y ⪰ R_y.
DiscriminationResult optimal_discrimination(std::span<const ComplexMatrix> ops,
                                            const DiscriminationOptions& options = {});

/// Helstrom value ½(1 + ‖R_0 − R_1‖₁) for weighted states with total trace
/// one, written as (tr R_0 + tr R_1 + ‖R_0 − R_1‖₁)/2.
double helstrom_value(const ComplexMatrix& r0, const ComplexMatrix& r1);

struct GuessResult {
  double win_prob = 0.0;
  std::vector<double> per_theta;  // conditional win probability given θ
  double certified_gap = 0.0;     // θ-averaged dual gap
  bool converged = true;
  /// Bob's measurement for each (θ, branch): povms[θ][branch][y].
  std::vector<std::vector<std::vector<ComplexMatrix>>> povms;
};

/// Win probability of the guessing game with tolerance ⌊γ n⌋ on Hamming
/// distance, for one explicit strategy.
GuessResult exact_win_probability(const DeviceModel& device, const AttackStrategy& strategy, int n,
                                  Index d, double gamma,
                                  const DiscriminationOptions& options = {});

struct SeesawOptions {
  int restarts = 4;
  int steps = 60;      // outer iterations per restart
  int outcomes = 0;    // classical outcomes of the encoding; 0 picks 2⌈D_in/d⌉
  double gamma = 0.0;
};

struct SeesawResult {
  GuessResult best;
  AttackStrategy strategy;
  std::vector<double> restart_values;
};

/// Heuristic lower bound on the optimal attack: alternates optimal
/// discrimination for a fixed encoding with a polar-decomposition ascent
/// step on the encoding, plus Gaussian perturbations accepted on
/// improvement.
SeesawResult seesaw_search(const DeviceModel& device, int n, Index d, std::uint64_t seed,
                           const SeesawOptions& options = {});

// ---------------------------------------------------------------------------
// Verification harnesses

struct KeyLemmaOptions {
  int angle_steps = 8;      // measure_all grid per round over [0, π)
  int seesaw_restarts = 2;
  int seesaw_steps = 30;
  unsigned threads = 1;
};

struct KeyLemmaFailure {
  std::int64_t trial = 0;
  std::string strategy;
  double value = 0.0;
  double bound = 0.0;
  double eps_plus = 0.0;
  nlohmann::ordered_json device;
};

struct KeyLemmaReport {
  std::int64_t trials = 0;
  int n = 1;
  Index d = 1;
  double gamma = 0.0;
  std::int64_t evaluations = 0;
  double max_ratio = 0.0;  // max achieved value / bound over random devices
  std::int64_t max_ratio_trial = -1;
  double anchor_value = 0.0;  // best value on the ideal device
  double anchor_bound = 0.0;
  std::vector<KeyLemmaFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// For each trial: a random qubit device, its exact ε₊, then measure_all
/// on an angle grid, every store_subset that fits in d, and a see-saw run.
/// Every value must satisfy value ≤ B′(n, d, ε₊, γ) + 1e-6.
KeyLemmaReport verify_key_lemma(std::int64_t trials, int n, Index d, double gamma,
                                std::uint64_t seed, const KeyLemmaOptions& options = {});

struct NormLemmaInstance {
  std::vector<ComplexMatrix> ops;
  double lhs = 0.0;     // ‖Σ A_i‖
  double k_norm = 0.0;  // ‖K‖, K = Σ_jk |j⟩⟨k| ⊗ √A_j √A_k
  double l_norm = 0.0;  // ‖L‖, L_jk = ‖√A_j √A_k‖
  double holder = 0.0;  // √(‖L‖₁ᴵ ‖L‖∞ᴵ)
  double rhs = 0.0;     // max_j Σ_i ‖√A_i √A_j‖
};

NormLemmaInstance evaluate_norm_lemma(std::vector<ComplexMatrix> ops);

struct LemmaFailure {
  std::int64_t trial = 0;
  std::string detail;
  nlohmann::ordered_json instance;
};

struct NormLemmaReport {
  std::int64_t trials = 0;
  double min_slack = 0.0;  // min of rhs − lhs
  std::vector<LemmaFailure> failures;
  bool passed() const { return failures.empty(); }
};

NormLemmaReport verify_norm_lemma(std::int64_t trials, Index max_dim, int max_terms,
                                  std::uint64_t seed, unsigned threads = 1);

struct OverlapInstance {
  std::vector<double> beta;  // one Jordan angle per round
  Index d = 1;
  std::vector<std::vector<ComplexMatrix>> povms;  // [θ][x] on C^d
};

struct OverlapCheck {
  std::uint32_t theta = 0;
  std::uint32_t theta_prime = 0;
  double lhs = 0.0;            // ‖√Π^{θ′} √Π^θ‖
  double bound_angles = 0.0;   // min{1, √d Π max(cos β, sin β)^{w_k}}
  double bound_epsilon = 0.0;  // min{1, √d Π ((1+ε_k)/2)^{w_k/2}}
};

/// Π^θ = Σ_x P^θ_x ⊗ F^θ_x with P^θ built from 2-dim blocks at the given
/// angles; one check per (θ, θ′) pair.
std::vector<OverlapCheck> evaluate_overlap_lemma(const OverlapInstance& inst);

struct OverlapLemmaReport {
  std::int64_t trials = 0;
  std::int64_t checks = 0;
  double min_slack_angles = 0.0;
  double min_slack_epsilon = 0.0;
  double max_form_difference = 0.0;
  std::vector<LemmaFailure> failures;
  bool passed() const { return failures.empty(); }
};

/// n ≤ 2 and d ≤ 3; d is drawn uniformly from {1..max_d} per trial.
OverlapLemmaReport verify_overlap_lemma(std::int64_t trials, int n, Index max_d, std::uint64_t seed,
                                        unsigned threads = 1);

}  // namespace di2pc::adversary
