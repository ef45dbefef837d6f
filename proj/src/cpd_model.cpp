#include "rcpd/cpd_model.hpp"

#include <cmath>
#include <limits>

#include "rcpd/error.hpp"

namespace rcpd {

namespace {

void check_p_eps(double p, double eps) {
  require(p > 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "p must lie in (0, 1]");
  require(eps > 0.0 && std::isfinite(eps), ErrorCode::InvalidArgument, "eps must be positive");
}

}  // namespace

void validate(const FactorTriple& f) {
  require(f.A.cols() >= 1 && f.A.cols() == f.B.cols() && f.A.cols() == f.C.cols(),
          ErrorCode::DimensionMismatch, "factor matrices must share a positive column count");
  require(f.A.allFinite() && f.B.allFinite() && f.C.allFinite(), ErrorCode::NonFinite,
          "factor matrices must be finite");
}

void validate(const FactorTriple& f, const Dims& dims) {
  validate(f);
  require(f.dims() == dims, ErrorCode::DimensionMismatch,
          "factor row counts do not match the tensor dimensions");
}

SlabWeights::SlabWeights(Vector w) : w_(std::move(w)) {
  require(w_.allFinite(), ErrorCode::NonFinite, "slab weights must be finite");
  require((w_.array() >= 0.0).all(), ErrorCode::InvalidArgument, "slab weights must be nonnegative");
}

Tensor3 reconstruct(const FactorTriple& f) {
  validate(f);
  Tensor3 t(f.dims());
  for (Eigen::Index k = 0; k < f.C.rows(); ++k)
    t.frontal(static_cast<std::size_t>(k)) = f.A * f.C.row(k).asDiagonal() * f.B.transpose();
  return t;
}

Vector slab_residual_sq_norms(const Tensor3& t, const FactorTriple& f) {
  validate(f, t.dims());
  Vector acc = Vector::Zero(f.A.rows());
  for (Eigen::Index k = 0; k < f.C.rows(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    Matrix res = t.frontal(kk) - f.A * f.C.row(k).asDiagonal() * f.B.transpose();
    acc += res.rowwise().squaredNorm();
  }
  return acc;
}

Vector slab_residual_norms(const Tensor3& t, const FactorTriple& f) {
  return slab_residual_sq_norms(t, f).array().sqrt();
}

double cost_lp_from_residuals(const Vector& residual_sq, double p, double eps) {
  check_p_eps(p, eps);
  return (residual_sq.array() + eps).pow(p / 2.0).sum();
}

double cost_lp(const Tensor3& t, const FactorTriple& f, double p, double eps) {
  return cost_lp_from_residuals(slab_residual_sq_norms(t, f), p, eps);
}

double phi_p(double w, double p, double eps) {
  require(w > 0.0, ErrorCode::InvalidArgument, "phi_p requires w > 0");
  require(p > 0.0 && p < 2.0, ErrorCode::InvalidArgument, "phi_p requires 0 < p < 2");
  require(eps >= 0.0, ErrorCode::InvalidArgument, "phi_p requires eps >= 0");
  return (2.0 - p) / 2.0 * std::pow(2.0 / p * w, p / (p - 2.0)) + eps * w;
}

double cost_weighted_from_residuals(const Vector& residual_sq, const SlabWeights& w, double p,
                                    double eps) {
  check_p_eps(p, eps);
  require(w.size() == static_cast<std::size_t>(residual_sq.size()), ErrorCode::DimensionMismatch,
          "one weight per horizontal slab is required");
  double total = 0.0;
  for (Eigen::Index i = 0; i < residual_sq.size(); ++i) {
    const double wi = w.values()(i);
    require(wi > 0.0, ErrorCode::InvalidArgument, "cost_weighted requires positive weights");
    total += wi * residual_sq(i) + phi_p(wi, p, eps);
  }
  return total;
}

double cost_weighted(const Tensor3& t, const FactorTriple& f, const SlabWeights& w, double p,
                     double eps) {
  return cost_weighted_from_residuals(slab_residual_sq_norms(t, f), w, p, eps);
}

double weight_update(double x_norm_sq, double p, double eps) {
  return p / 2.0 * std::pow(x_norm_sq + eps, (p - 2.0) / 2.0);
}

SlabWeights weight_update(const Vector& residual_sq, double p, double eps) {
  check_p_eps(p, eps);
  Vector w(residual_sq.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = weight_update(residual_sq(i), p, eps);
  return SlabWeights(std::move(w));
}

std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
  // Shortest augmenting path with row/column potentials, O(n^3).
  require(cost.rows() == cost.cols(), ErrorCode::DimensionMismatch, "assignment needs a square cost matrix");
  const auto n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);  // match[col] = row, 1-based, 0 = free
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[col0] = true;
      const std::size_t r0 = match[col0];
      double delta = inf;
      std::size_t col1 = 0;
      for (std::size_t c = 1; c <= n; ++c) {
        if (used[c]) continue;
        const double cur = cost(static_cast<Eigen::Index>(r0 - 1), static_cast<Eigen::Index>(c - 1)) - u[r0] - v[c];
        if (cur < minv[c]) {
          minv[c] = cur;
          way[c] = col0;
        }
        if (minv[c] < delta) {
          delta = minv[c];
          col1 = c;
        }
      }
      for (std::size_t c = 0; c <= n; ++c) {
        if (used[c]) {
          u[match[c]] += delta;
          v[c] -= delta;
        } else {
          minv[c] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<std::size_t> assign(n);
  for (std::size_t c = 1; c <= n; ++c) assign[match[c] - 1] = c - 1;
  return assign;
}

Alignment align_columns(const Matrix& truth, const Matrix& estimate) {
  require(truth.rows() == estimate.rows() && truth.cols() == estimate.cols(),
          ErrorCode::DimensionMismatch, "align_and_mse: shapes differ");
  require(truth.cols() >= 1, ErrorCode::InvalidArgument, "align_and_mse: no columns");
  const Eigen::Index R = truth.cols();
  Matrix t = truth, e = estimate;
  for (Eigen::Index r = 0; r < R; ++r) {
    const double nt = t.col(r).norm(), ne = e.col(r).norm();
    require(nt > 0.0 && ne > 0.0, ErrorCode::InvalidArgument, "align_and_mse: zero-norm column");
    t.col(r) /= nt;
    e.col(r) /= ne;
  }
  Matrix cost(R, R);
  Eigen::MatrixXi sign(R, R);
  for (Eigen::Index a = 0; a < R; ++a) {
    for (Eigen::Index b = 0; b < R; ++b) {
      const double plus = (t.col(a) - e.col(b)).squaredNorm();
      const double minus = (t.col(a) + e.col(b)).squaredNorm();
      cost(a, b) = std::min(plus, minus);
      sign(a, b) = plus <= minus ? 1 : -1;
    }
  }
  Alignment out;
  out.permutation = min_cost_assignment(cost);
  out.signs.resize(static_cast<std::size_t>(R));
  double total = 0.0;
  for (Eigen::Index a = 0; a < R; ++a) {
    const auto b = static_cast<Eigen::Index>(out.permutation[static_cast<std::size_t>(a)]);
    total += cost(a, b);
    out.signs[static_cast<std::size_t>(a)] = sign(a, b);
  }
  out.mse = total / static_cast<double>(R);
  return out;
}

double align_and_mse(const Matrix& truth, const Matrix& estimate) {
  return align_columns(truth, estimate).mse;
}

double mse_to_db(double mse) {
  if (std::isnan(mse)) return mse;
  if (!(mse > 0.0)) return kMseFloorDb;
  return std::max(kMseFloorDb, 10.0 * std::log10(mse));
}

}  // namespace rcpd
