#pragma once

// Constrained / regularized IRALS. Each factor update is an ADMM solve of
//
//   min_F  1/2 ||weighted fit||^2 + lambda g(F)   s.t.  F in S
//
// split as F = F1 (least squares), F = F2 (proximal step on g) and a
// projection of their average onto S.

#include <array>
#include <optional>

#include "rcpd/solvers.hpp"

namespace rcpd {

// Regularizer g with weight lambda >= 0:
//   Ridge:  g(F) = 1/2 ||F||_F^2
//   Smooth: g(F) = 1/2 ||T F||_F^2, T the (rows - order) x rows finite-difference
//           operator (order 2 is the 1 -2 1 stencil)
//   L1:     g(F) = ||F||_1 (sum of absolute entries)
struct Regularizer {
  enum class Kind { None, Ridge, Smooth, L1 };
  Kind kind = Kind::None;
  double lambda = 0.0;
  int order = 2;  // Smooth only: 1 or 2

  static Regularizer none() { return {}; }
  static Regularizer ridge(double lambda) { return {Kind::Ridge, lambda, 2}; }
  static Regularizer smooth(double lambda, int order = 2) { return {Kind::Smooth, lambda, order}; }
  static Regularizer l1(double lambda) { return {Kind::L1, lambda, 2}; }
};

struct ConstraintSet {
  enum class Kind { Unconstrained, Nonnegative, Box };
  Kind kind = Kind::Unconstrained;
  double lo = 0.0;  // Box only, applied elementwise
  double hi = 0.0;

  static ConstraintSet unconstrained() { return {}; }
  static ConstraintSet nonnegative() { return {Kind::Nonnegative, 0.0, 0.0}; }
  static ConstraintSet box(double lo, double hi) { return {Kind::Box, lo, hi}; }
};

struct AdmmConfig {
  // Step size. When unset, the mean diagonal of the current subproblem gram.
  std::optional<double> rho;
  std::size_t max_inner_iters = 500;
  // Exit once ||F - F1||_F + ||F - F2||_F <= tol_split and the consensus
  // iterate moved by at most tol_split in the last step.
  double tol_split = 1e-3;
  // Keep scaled duals between outer sweeps.
  bool warm_start = true;
};

void validate(const Regularizer& reg);
void validate(const ConstraintSet& cons);
void validate(const AdmmConfig& acfg);

// (rows - order) x rows finite-difference operator.
Matrix difference_operator(Eigen::Index rows, int order);

// lambda * g(F).
double regularizer_value(const Regularizer& reg, const Matrix& F);

// argmin_X lambda g(X) + rho/2 ||X - V||_F^2.
Matrix prox(const Regularizer& reg, double rho, const Matrix& V);

// Euclidean projection onto the constraint set.
Matrix project(const ConstraintSet& cons, const Matrix& V);

// Scaled dual variables of one factor's ADMM, kept across outer sweeps.
struct AdmmState {
  Matrix dual_ls;    // U1: F = F1
  Matrix dual_prox;  // U2: F = F2
  double rho = 0.0;  // step the duals are scaled for; 0 before the first solve
};

struct AdmmOutcome {
  Matrix factor;
  std::size_t iterations = 0;
  double split_residual = 0.0;
  double step = 0.0;  // ||F_k - F_{k-1}||_F at exit
  double rho = 0.0;
};

struct FactorProblem {
  Regularizer reg;
  ConstraintSet cons;
};

// One ADMM solve for the factor selected by mode (Horizontal -> A,
// Lateral -> B, Frontal -> C), starting from the current value in f.
// The A subproblem is unweighted unless weighted_a is set.
AdmmOutcome admm_update(Mode mode, const Tensor3& t, const FactorTriple& f, const SlabWeights& w,
                        const FactorProblem& problem, const AdmmConfig& acfg, AdmmState& state,
                        bool weighted_a = false, double max_jitter = 1e-8);

AdmmOutcome admm_update_A(const Tensor3& t, const FactorTriple& f, const Regularizer& reg,
                          const ConstraintSet& cons, const AdmmConfig& acfg);
AdmmOutcome admm_update_B(const Tensor3& t, const FactorTriple& f, const SlabWeights& w,
                          const Regularizer& reg, const ConstraintSet& cons, const AdmmConfig& acfg);
AdmmOutcome admm_update_C(const Tensor3& t, const FactorTriple& f, const SlabWeights& w,
                          const Regularizer& reg, const ConstraintSet& cons, const AdmmConfig& acfg);

// Per-factor settings, indexed A, B, C.
struct ConstrainedProblem {
  std::array<FactorProblem, 3> factors{};
};

// 1/2 * reweighted cost + sum of lambda g over the three factors.
double constrained_objective(const Vector& residual_sq, const SlabWeights& w, const FactorTriple& f,
                             const ConstrainedProblem& problem, double p, double eps);

// IRALS with each factor update solved by ADMM. The initial factors are
// projected onto their constraint sets. cost_trace holds constrained_objective.
FitResult irals_constrained(const Tensor3& t, std::size_t rank, const SolverConfig& cfg,
                            const ConstrainedProblem& problem, const AdmmConfig& acfg);

}  // namespace rcpd
