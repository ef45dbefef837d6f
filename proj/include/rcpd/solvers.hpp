#pragma once

// Plain trilinear ALS and the iteratively reweighted ALS (IRALS) for
// CPD fitting with outlying horizontal slabs.

#include <cstdint>
#include <variant>
#include <vector>

#include "rcpd/cpd_model.hpp"
#include "rcpd/tensor.hpp"

namespace rcpd {

struct RandomInit {
  std::uint64_t seed = 0;
};
// Run `iters` TALS sweeps from RandomInit{seed} and start from the result.
struct TalsInit {
  std::size_t iters = 50;
  std::uint64_t seed = 0;
};
struct GivenInit {
  FactorTriple factors;
};
using InitStrategy = std::variant<RandomInit, TalsInit, GivenInit>;

struct SolverConfig {
  double p = 0.5;
  double eps = 1e-8;
  std::size_t max_iters = 1000;
  double tol_abs_cost = 1e-8;
  // Largest relative jitter tried when a gram is not numerically positive definite.
  double ridge_jitter = 1e-8;
  InitStrategy init = RandomInit{};
  // Solve the A subproblem with the slab weights. Identical to the unweighted
  // update unless a regularizer acts on A.
  bool weighted_a_update = false;
};

void validate(const SolverConfig& cfg);

struct FitResult {
  FactorTriple factors;
  SlabWeights weights;
  std::vector<double> cost_trace;  // initial cost followed by one entry per sweep
  std::size_t iterations = 0;
  bool converged = false;
};

// Normal equations gram * F^T = rhs of the (weighted) least-squares subproblem
// for the factor selected by `mode`: Lateral -> B, Frontal -> C, Horizontal -> A.
// The A subproblem is row-separable, so its equations carry no weights.
struct NormalEquations {
  Matrix gram;  // R x R
  Matrix rhs;   // R x rows(factor)
};
NormalEquations normal_equations(Mode mode, const Tensor3& t, const FactorTriple& f,
                                 const SlabWeights& w);

// Solves (gram + jitter) X = rhs by Cholesky. Jitter delta * trace(gram)/R * I
// is tried for delta in {0, 1e-12, max_jitter}; an all-zero gram yields the
// minimum-norm solution X = 0. Throws ErrorCode::Singular otherwise.
Matrix solve_gram(const Matrix& gram, const Matrix& rhs, double max_jitter = 1e-8);

// Exact minimizer of the weighted least-squares subproblem for one factor,
// optionally with a ridge term ridge * ||F||_F^2 / 2 added to the half-fit.
Matrix weighted_ls_factor(Mode mode, const Tensor3& t, const FactorTriple& f,
                          const SlabWeights& w, double ridge = 0.0, double max_jitter = 1e-8);

FactorTriple init_factors(const InitStrategy& strategy, const Tensor3& t, std::size_t rank);

// Entry checks shared by every solver: R >= 1 and R <= min(IJ, JK, IK).
void check_rank(const Tensor3& t, std::size_t rank);

// Least-squares CPD. Sweeps update A, B, C in turn; cost_trace holds
// ||X - [[A, B, C]]||_F^2.
FitResult tals(const Tensor3& t, std::size_t rank, const SolverConfig& cfg);

// Robust CPD by reweighting horizontal slabs. Each sweep updates A, B, C and
// then the weights; cost_trace holds the reweighted cost after every sweep.
FitResult irals(const Tensor3& t, std::size_t rank, const SolverConfig& cfg);

}  // namespace rcpd
