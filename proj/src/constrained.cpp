#include "rcpd/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rcpd/error.hpp"

namespace rcpd {

namespace {

Matrix& factor_of(FactorTriple& f, Mode mode) {
  switch (mode) {
    case Mode::Horizontal: return f.A;
    case Mode::Lateral: return f.B;
    case Mode::Frontal: return f.C;
  }
  fail(ErrorCode::InvalidArgument, "unknown mode");
}

const Matrix& factor_of(const FactorTriple& f, Mode mode) {
  return factor_of(const_cast<FactorTriple&>(f), mode);
}

std::size_t slot(Mode mode) {
  switch (mode) {
    case Mode::Horizontal: return 0;
    case Mode::Lateral: return 1;
    case Mode::Frontal: return 2;
  }
  return 0;
}

// Solves the F1 least-squares step of ADMM: one shared Cholesky factor, or one
// per row when the A subproblem carries slab weights.
class ShiftedGramSolver {
 public:
  ShiftedGramSolver(const Matrix& gram, double rho, const Vector* row_weights) {
    auto factorize = [&](const Matrix& g) {
      Matrix shifted = g;
      shifted.diagonal().array() += rho;
      Eigen::LLT<Matrix> llt(shifted);
      if (llt.info() != Eigen::Success) fail(ErrorCode::Singular, "ADMM: shifted gram is not positive definite");
      return llt;
    };
    if (row_weights == nullptr) {
      shared_.emplace_back(factorize(gram));
    } else {
      row_weights_ = *row_weights;
      for (Eigen::Index i = 0; i < row_weights_.size(); ++i) shared_.emplace_back(factorize(row_weights_(i) * gram));
    }
  }

  // rhs is R x n; returns the n x R solution.
  Matrix solve(const Matrix& mttkrp_rhs, const Matrix& prox_rhs) const {
    if (row_weights_.size() == 0) return shared_.front().solve(mttkrp_rhs + prox_rhs).transpose();
    Matrix out(mttkrp_rhs.cols(), mttkrp_rhs.rows());
    for (Eigen::Index i = 0; i < mttkrp_rhs.cols(); ++i)
      out.row(i) = shared_[static_cast<std::size_t>(i)]
                       .solve(row_weights_(i) * mttkrp_rhs.col(i) + prox_rhs.col(i))
                       .transpose();
    return out;
  }

 private:
  std::vector<Eigen::LLT<Matrix>> shared_;  // one entry, or one per row
  Vector row_weights_;
};

}  // namespace

void validate(const Regularizer& reg) {
  require(reg.lambda >= 0.0 && std::isfinite(reg.lambda), ErrorCode::InvalidArgument,
          "regularization weight must be finite and nonnegative");
  if (reg.kind == Regularizer::Kind::Smooth)
    require(reg.order == 1 || reg.order == 2, ErrorCode::InvalidArgument,
            "smoothness operator order must be 1 or 2");
}

void validate(const ConstraintSet& cons) {
  if (cons.kind == ConstraintSet::Kind::Box)
    require(std::isfinite(cons.lo) && std::isfinite(cons.hi) && cons.lo < cons.hi,
            ErrorCode::InvalidArgument, "box constraint requires lo < hi");
}

void validate(const AdmmConfig& acfg) {
  if (acfg.rho) require(*acfg.rho > 0.0, ErrorCode::InvalidArgument, "ADMM rho must be positive");
  require(acfg.max_inner_iters >= 1, ErrorCode::InvalidArgument, "max_inner_iters must be at least 1");
  require(acfg.tol_split > 0.0, ErrorCode::InvalidArgument, "tol_split must be positive");
}

Matrix difference_operator(Eigen::Index rows, int order) {
  require(order == 1 || order == 2, ErrorCode::InvalidArgument, "difference order must be 1 or 2");
  require(rows >= order + 1, ErrorCode::InvalidArgument,
          "smoothness regularizer needs more factor rows than the stencil order");
  Matrix T = Matrix::Zero(rows - order, rows);
  for (Eigen::Index r = 0; r < rows - order; ++r) {
    if (order == 1) {
      T(r, r) = -1.0;
      T(r, r + 1) = 1.0;
    } else {
      T(r, r) = 1.0;
      T(r, r + 1) = -2.0;
      T(r, r + 2) = 1.0;
    }
  }
  return T;
}

double regularizer_value(const Regularizer& reg, const Matrix& F) {
  switch (reg.kind) {
    case Regularizer::Kind::None: return 0.0;
    case Regularizer::Kind::Ridge: return reg.lambda * 0.5 * F.squaredNorm();
    case Regularizer::Kind::Smooth:
      return reg.lambda * 0.5 * (difference_operator(F.rows(), reg.order) * F).squaredNorm();
    case Regularizer::Kind::L1: return reg.lambda * F.cwiseAbs().sum();
  }
  return 0.0;
}

Matrix prox(const Regularizer& reg, double rho, const Matrix& V) {
  validate(reg);
  require(rho > 0.0, ErrorCode::InvalidArgument, "prox requires rho > 0");
  switch (reg.kind) {
    case Regularizer::Kind::None: return V;
    case Regularizer::Kind::Ridge: return rho / (reg.lambda + rho) * V;
    case Regularizer::Kind::Smooth: {
      const Matrix T = difference_operator(V.rows(), reg.order);
      Matrix lhs = reg.lambda * T.transpose() * T;
      lhs.diagonal().array() += rho;
      return Eigen::LLT<Matrix>(lhs).solve(rho * V);
    }
    case Regularizer::Kind::L1: {
      const double thresh = reg.lambda / rho;
      return V.unaryExpr([thresh](double v) {
        return v > thresh ? v - thresh : (v < -thresh ? v + thresh : 0.0);
      });
    }
  }
  return V;
}

Matrix project(const ConstraintSet& cons, const Matrix& V) {
  validate(cons);
  switch (cons.kind) {
    case ConstraintSet::Kind::Unconstrained: return V;
    case ConstraintSet::Kind::Nonnegative: return V.cwiseMax(0.0);
    case ConstraintSet::Kind::Box: return V.cwiseMax(cons.lo).cwiseMin(cons.hi);
  }
  return V;
}

AdmmOutcome admm_update(Mode mode, const Tensor3& t, const FactorTriple& f, const SlabWeights& w,
                        const FactorProblem& problem, const AdmmConfig& acfg, AdmmState& state,
                        bool weighted_a, double max_jitter) {
  validate(acfg);
  validate(problem.reg);
  validate(problem.cons);
  const NormalEquations ne = normal_equations(mode, t, f, w);
  const Eigen::Index R = ne.gram.rows();

  double rho = acfg.rho.value_or(ne.gram.trace() / static_cast<double>(R));
  if (!(rho > 0.0)) rho = 1.0;
  // Keep the shift above the jitter scale so the F1 system stays definite.
  rho = std::max(rho, max_jitter * std::abs(ne.gram.trace()) / static_cast<double>(R));

  Matrix X = factor_of(f, mode);
  const bool reuse = acfg.warm_start && state.rho > 0.0 && state.dual_ls.rows() == X.rows() &&
                     state.dual_ls.cols() == X.cols();
  if (reuse) {
    state.dual_ls *= state.rho / rho;
    state.dual_prox *= state.rho / rho;
  } else {
    state.dual_ls = Matrix::Zero(X.rows(), X.cols());
    state.dual_prox = Matrix::Zero(X.rows(), X.cols());
  }
  Matrix& U1 = state.dual_ls;
  Matrix& U2 = state.dual_prox;

  const bool per_row = mode == Mode::Horizontal && weighted_a;
  const ShiftedGramSolver solver(ne.gram, rho, per_row ? &w.values() : nullptr);

  AdmmOutcome out;
  for (std::size_t it = 1; it <= acfg.max_inner_iters; ++it) {
    const Matrix X1 = solver.solve(ne.rhs, rho * (X + U1).transpose());
    const Matrix X2 = prox(problem.reg, rho, X + U2);
    Matrix next = project(problem.cons, 0.5 * (X1 - U1 + X2 - U2));
    out.step = (next - X).norm();
    X = std::move(next);
    U1 += X - X1;
    U2 += X - X2;
    out.iterations = it;
    out.split_residual = (X - X1).norm() + (X - X2).norm();
    if (!std::isfinite(out.split_residual)) fail(ErrorCode::NonFinite, "ADMM produced non-finite iterates");
    if (out.split_residual <= acfg.tol_split && out.step <= acfg.tol_split) break;
  }
  state.rho = rho;
  out.factor = std::move(X);
  out.rho = rho;
  return out;
}

AdmmOutcome admm_update_A(const Tensor3& t, const FactorTriple& f, const Regularizer& reg,
                          const ConstraintSet& cons, const AdmmConfig& acfg) {
  AdmmState state;
  return admm_update(Mode::Horizontal, t, f, SlabWeights(t.dims().I), {reg, cons}, acfg, state);
}

AdmmOutcome admm_update_B(const Tensor3& t, const FactorTriple& f, const SlabWeights& w,
                          const Regularizer& reg, const ConstraintSet& cons, const AdmmConfig& acfg) {
  AdmmState state;
  return admm_update(Mode::Lateral, t, f, w, {reg, cons}, acfg, state);
}

AdmmOutcome admm_update_C(const Tensor3& t, const FactorTriple& f, const SlabWeights& w,
                          const Regularizer& reg, const ConstraintSet& cons, const AdmmConfig& acfg) {
  AdmmState state;
  return admm_update(Mode::Frontal, t, f, w, {reg, cons}, acfg, state);
}

double constrained_objective(const Vector& residual_sq, const SlabWeights& w, const FactorTriple& f,
                             const ConstrainedProblem& problem, double p, double eps) {
  return 0.5 * cost_weighted_from_residuals(residual_sq, w, p, eps) +
         regularizer_value(problem.factors[0].reg, f.A) +
         regularizer_value(problem.factors[1].reg, f.B) +
         regularizer_value(problem.factors[2].reg, f.C);
}

namespace {

// Flipping the signs of two columns of one component leaves the model
// unchanged. Orient B and C toward the positive orthant and absorb the
// parity into A so a sign constraint does not wipe out whole components.
void orient_components(FactorTriple& f) {
  for (Eigen::Index r = 0; r < f.A.cols(); ++r) {
    const bool flip_b = f.B.col(r).sum() < 0.0;
    const bool flip_c = f.C.col(r).sum() < 0.0;
    if (flip_b) f.B.col(r) *= -1.0;
    if (flip_c) f.C.col(r) *= -1.0;
    if (flip_b != flip_c) f.A.col(r) *= -1.0;
  }
}

}  // namespace

FitResult irals_constrained(const Tensor3& t, std::size_t rank, const SolverConfig& cfg,
                            const ConstrainedProblem& problem, const AdmmConfig& acfg) {
  validate(cfg);
  validate(acfg);
  for (const auto& fp : problem.factors) {
    validate(fp.reg);
    validate(fp.cons);
  }

  FitResult res;
  res.factors = init_factors(cfg.init, t, rank);
  FactorTriple& f = res.factors;
  const bool sign_constrained = std::any_of(problem.factors.begin(), problem.factors.end(), [](const FactorProblem& fp) {
    return fp.cons.kind != ConstraintSet::Kind::Unconstrained;
  });
  if (sign_constrained) orient_components(f);
  for (Mode m : {Mode::Horizontal, Mode::Lateral, Mode::Frontal})
    factor_of(f, m) = project(problem.factors[slot(m)].cons, factor_of(f, m));

  SlabWeights w(t.dims().I);
  std::array<AdmmState, 3> states;
  res.cost_trace.push_back(
      constrained_objective(slab_residual_sq_norms(t, f), w, f, problem, cfg.p, cfg.eps));

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    for (Mode m : {Mode::Horizontal, Mode::Lateral, Mode::Frontal}) {
      const std::size_t s = slot(m);
      factor_of(f, m) = admm_update(m, t, f, w, problem.factors[s], acfg, states[s],
                                    cfg.weighted_a_update, cfg.ridge_jitter)
                            .factor;
    }
    const Vector r2 = slab_residual_sq_norms(t, f);
    w = weight_update(r2, cfg.p, cfg.eps);
    res.cost_trace.push_back(constrained_objective(r2, w, f, problem, cfg.p, cfg.eps));
    res.iterations = it;
    const auto n = res.cost_trace.size();
    if (std::abs(res.cost_trace[n - 1] - res.cost_trace[n - 2]) < cfg.tol_abs_cost) {
      res.converged = true;
      break;
    }
  }
  res.weights = std::move(w);
  return res;
}

}  // namespace rcpd
