#include "rcpd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rcpd/error.hpp"

namespace rcpd {

namespace {

Matrix random_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

bool converged_step(const std::vector<double>& trace, double tol) {
  const auto n = trace.size();
  return n >= 2 && std::abs(trace[n - 1] - trace[n - 2]) < tol;
}

}  // namespace

void validate(const SolverConfig& cfg) {
  require(cfg.p > 0.0 && cfg.p <= 1.0, ErrorCode::InvalidArgument, "p must lie in (0, 1]");
  require(cfg.eps > 0.0, ErrorCode::InvalidArgument, "eps must be positive");
  require(cfg.tol_abs_cost > 0.0, ErrorCode::InvalidArgument, "tol_abs_cost must be positive");
  require(cfg.max_iters >= 1, ErrorCode::InvalidArgument, "max_iters must be at least 1");
  require(cfg.ridge_jitter >= 0.0, ErrorCode::InvalidArgument, "ridge_jitter must be nonnegative");
}

void check_rank(const Tensor3& t, std::size_t rank) {
  const auto [I, J, K] = t.dims();
  require(rank >= 1, ErrorCode::InvalidArgument, "rank must be at least 1");
  require(rank <= std::min({I * J, J * K, I * K}), ErrorCode::InvalidArgument,
          "rank exceeds min(IJ, JK, IK)");
}

NormalEquations normal_equations(Mode mode, const Tensor3& t, const FactorTriple& f,
                                 const SlabWeights& w) {
  validate(f, t.dims());
  require(w.size() == t.dims().I, ErrorCode::DimensionMismatch, "one weight per horizontal slab is required");
  switch (mode) {
    case Mode::Horizontal:
      return {(f.C.transpose() * f.C).cwiseProduct(f.B.transpose() * f.B),
              mttkrp(t, f.C, f.B, Mode::Horizontal)};
    case Mode::Lateral: {
      const Matrix wa = w.values().asDiagonal() * f.A;  // W^2 A
      return {(f.A.transpose() * wa).cwiseProduct(f.C.transpose() * f.C),
              mttkrp(t, wa, f.C, Mode::Lateral)};
    }
    case Mode::Frontal: {
      const Matrix wa = w.values().asDiagonal() * f.A;
      return {(f.B.transpose() * f.B).cwiseProduct(f.A.transpose() * wa),
              mttkrp(t, f.B, wa, Mode::Frontal)};
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown mode");
}

Matrix solve_gram(const Matrix& gram, const Matrix& rhs, double max_jitter) {
  require(gram.rows() == gram.cols() && gram.rows() == rhs.rows(), ErrorCode::DimensionMismatch,
          "solve_gram: incompatible shapes");
  require(gram.allFinite() && rhs.allFinite(), ErrorCode::NonFinite, "solve_gram: non-finite input");
  const Eigen::Index R = gram.rows();
  const double scale = gram.trace() / static_cast<double>(R);
  if (scale == 0.0 && gram.isZero(0.0)) return Matrix::Zero(R, rhs.cols());

  for (double delta : {0.0, 1e-12, max_jitter}) {
    if (delta > max_jitter) continue;
    Matrix shifted = gram;
    shifted.diagonal().array() += delta * std::abs(scale);
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Matrix x = llt.solve(rhs);
    if (x.allFinite()) return x;
  }
  fail(ErrorCode::Singular, "gram matrix is numerically singular");
}

Matrix weighted_ls_factor(Mode mode, const Tensor3& t, const FactorTriple& f,
                          const SlabWeights& w, double ridge, double max_jitter) {
  require(ridge >= 0.0, ErrorCode::InvalidArgument, "ridge must be nonnegative");
  auto ne = normal_equations(mode, t, f, w);
  ne.gram.diagonal().array() += ridge;
  return solve_gram(ne.gram, ne.rhs, max_jitter).transpose();
}

FactorTriple init_factors(const InitStrategy& strategy, const Tensor3& t, std::size_t rank) {
  check_rank(t, rank);
  const auto [I, J, K] = t.dims();
  const auto R = static_cast<Eigen::Index>(rank);
  return std::visit(
      [&](const auto& s) -> FactorTriple {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, RandomInit>) {
          std::mt19937_64 rng(s.seed);
          FactorTriple f;
          f.A = random_normal(static_cast<Eigen::Index>(I), R, rng);
          f.B = random_normal(static_cast<Eigen::Index>(J), R, rng);
          f.C = random_normal(static_cast<Eigen::Index>(K), R, rng);
          return f;
        } else if constexpr (std::is_same_v<S, TalsInit>) {
          SolverConfig cfg;
          cfg.init = RandomInit{s.seed};
          cfg.max_iters = std::max<std::size_t>(s.iters, 1);
          return tals(t, rank, cfg).factors;
        } else {
          validate(s.factors, t.dims());
          require(s.factors.rank() == rank, ErrorCode::DimensionMismatch,
                  "given initial factors have the wrong rank");
          return s.factors;
        }
      },
      strategy);
}

FitResult tals(const Tensor3& t, std::size_t rank, const SolverConfig& cfg) {
  validate(cfg);
  FitResult res;
  res.factors = init_factors(cfg.init, t, rank);
  const SlabWeights ones(t.dims().I);
  FactorTriple& f = res.factors;

  res.cost_trace.push_back(slab_residual_sq_norms(t, f).sum());
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    f.A = weighted_ls_factor(Mode::Horizontal, t, f, ones, 0.0, cfg.ridge_jitter);
    f.B = weighted_ls_factor(Mode::Lateral, t, f, ones, 0.0, cfg.ridge_jitter);
    f.C = weighted_ls_factor(Mode::Frontal, t, f, ones, 0.0, cfg.ridge_jitter);
    res.cost_trace.push_back(slab_residual_sq_norms(t, f).sum());
    res.iterations = it;
    if (converged_step(res.cost_trace, cfg.tol_abs_cost)) {
      res.converged = true;
      break;
    }
  }
  res.weights = ones;
  return res;
}

FitResult irals(const Tensor3& t, std::size_t rank, const SolverConfig& cfg) {
  validate(cfg);
  FitResult res;
  res.factors = init_factors(cfg.init, t, rank);
  FactorTriple& f = res.factors;
  SlabWeights w(t.dims().I);

  res.cost_trace.push_back(cost_weighted_from_residuals(slab_residual_sq_norms(t, f), w, cfg.p, cfg.eps));
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    // With no regularizer the A subproblem is row-separable, so the slab
    // weights do not change its minimizer.
    f.A = weighted_ls_factor(Mode::Horizontal, t, f, w, 0.0, cfg.ridge_jitter);
    f.B = weighted_ls_factor(Mode::Lateral, t, f, w, 0.0, cfg.ridge_jitter);
    f.C = weighted_ls_factor(Mode::Frontal, t, f, w, 0.0, cfg.ridge_jitter);
    const Vector r2 = slab_residual_sq_norms(t, f);
    w = weight_update(r2, cfg.p, cfg.eps);
    res.cost_trace.push_back(cost_weighted_from_residuals(r2, w, cfg.p, cfg.eps));
    res.iterations = it;
    if (converged_step(res.cost_trace, cfg.tol_abs_cost)) {
      res.converged = true;
      break;
    }
  }
  res.weights = std::move(w);
  return res;
}

}  // namespace rcpd
