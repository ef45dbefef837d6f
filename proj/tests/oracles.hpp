#pragma once

// Reference implementations used only by the tests. Everything here works
// from element-wise definitions and dense materialized systems, never from
// the library's structured kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rcpd/cpd_model.hpp"
#include "rcpd/tensor.hpp"

namespace oracle {

using rcpd::Dims;
using rcpd::FactorTriple;
using rcpd::Matrix;
using rcpd::Mode;
using rcpd::Tensor3;
using rcpd::Vector;

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = n(rng);
  return m;
}

inline Tensor3 random_tensor(Dims d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor3 t(d);
  for (double& x : t.data()) x = n(rng);
  return t;
}

inline FactorTriple random_factors(Dims d, Eigen::Index R, std::mt19937_64& rng) {
  FactorTriple f;
  f.A = random_matrix(static_cast<Eigen::Index>(d.I), R, rng);
  f.B = random_matrix(static_cast<Eigen::Index>(d.J), R, rng);
  f.C = random_matrix(static_cast<Eigen::Index>(d.K), R, rng);
  return f;
}

inline Tensor3 build(const FactorTriple& f) {
  const Dims d{static_cast<std::size_t>(f.A.rows()), static_cast<std::size_t>(f.B.rows()),
               static_cast<std::size_t>(f.C.rows())};
  Tensor3 t(d);
  for (std::size_t i = 0; i < d.I; ++i)
    for (std::size_t j = 0; j < d.J; ++j)
      for (std::size_t k = 0; k < d.K; ++k) {
        double s = 0.0;
        for (Eigen::Index r = 0; r < f.A.cols(); ++r)
          s += f.A(static_cast<Eigen::Index>(i), r) * f.B(static_cast<Eigen::Index>(j), r) *
               f.C(static_cast<Eigen::Index>(k), r);
        t(i, j, k) = s;
      }
  return t;
}

// Column r is the Kronecker product U(:,r) (x) V(:,r).
inline Matrix kron_columns(const Matrix& U, const Matrix& V) {
  Matrix out(U.rows() * V.rows(), U.cols());
  for (Eigen::Index r = 0; r < U.cols(); ++r)
    for (Eigen::Index a = 0; a < U.rows(); ++a)
      for (Eigen::Index b = 0; b < V.rows(); ++b) out(a * V.rows() + b, r) = U(a, r) * V(b, r);
  return out;
}

// Unfoldings by their element definitions:
//   lateral    (KI x J): row i*K + k, column j
//   frontal    (IJ x K): row j*I + i, column k
//   horizontal (JK x I): row k*J + j, column i
inline Matrix unfold(const Tensor3& t, Mode mode) {
  const auto [I, J, K] = t.dims();
  Matrix m;
  switch (mode) {
    case Mode::Lateral: m.resize(static_cast<Eigen::Index>(K * I), static_cast<Eigen::Index>(J)); break;
    case Mode::Frontal: m.resize(static_cast<Eigen::Index>(I * J), static_cast<Eigen::Index>(K)); break;
    case Mode::Horizontal: m.resize(static_cast<Eigen::Index>(J * K), static_cast<Eigen::Index>(I)); break;
  }
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < K; ++k) {
        const double x = t(i, j, k);
        switch (mode) {
          case Mode::Lateral: m(static_cast<Eigen::Index>(i * K + k), static_cast<Eigen::Index>(j)) = x; break;
          case Mode::Frontal: m(static_cast<Eigen::Index>(j * I + i), static_cast<Eigen::Index>(k)) = x; break;
          case Mode::Horizontal: m(static_cast<Eigen::Index>(k * J + j), static_cast<Eigen::Index>(i)) = x; break;
        }
      }
  return m;
}

// Weighted least squares for one factor with the other two fixed, solved as a
// dense row-scaled regression with a QR factorization. Every tensor entry
// (i,j,k) contributes one equation scaled by sqrt(w_i).
inline Matrix weighted_ls(Mode mode, const Tensor3& t, const FactorTriple& f, const Vector& w) {
  const auto [I, J, K] = t.dims();
  const Eigen::Index R = f.A.cols();
  const std::size_t n = mode == Mode::Horizontal ? I : mode == Mode::Lateral ? J : K;
  Matrix out(static_cast<Eigen::Index>(n), R);
  for (std::size_t target = 0; target < n; ++target) {
    std::vector<std::array<std::size_t, 3>> cells;
    for (std::size_t i = 0; i < I; ++i)
      for (std::size_t j = 0; j < J; ++j)
        for (std::size_t k = 0; k < K; ++k) {
          const std::size_t idx = mode == Mode::Horizontal ? i : mode == Mode::Lateral ? j : k;
          if (idx == target) cells.push_back({i, j, k});
        }
    Matrix design(static_cast<Eigen::Index>(cells.size()), R);
    Vector y(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t e = 0; e < cells.size(); ++e) {
      const auto [i, j, k] = cells[e];
      const double s = std::sqrt(w(static_cast<Eigen::Index>(i)));
      const auto ei = static_cast<Eigen::Index>(e);
      for (Eigen::Index r = 0; r < R; ++r) {
        const double a = f.A(static_cast<Eigen::Index>(i), r);
        const double b = f.B(static_cast<Eigen::Index>(j), r);
        const double c = f.C(static_cast<Eigen::Index>(k), r);
        design(ei, r) = s * (mode == Mode::Horizontal ? b * c : mode == Mode::Lateral ? a * c : a * b);
      }
      y(ei) = s * t(i, j, k);
    }
    out.row(static_cast<Eigen::Index>(target)) =
        design.colPivHouseholderQr().solve(y).transpose();
  }
  return out;
}

// sum_i w_i ||X(i,:,:) - model(i,:,:)||^2 evaluated entry by entry.
inline double weighted_residual(const Tensor3& t, const FactorTriple& f, const Vector& w) {
  const Tensor3 m = build(f);
  const auto [I, J, K] = t.dims();
  double s = 0.0;
  for (std::size_t i = 0; i < I; ++i)
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t k = 0; k < K; ++k) {
        const double d = t(i, j, k) - m(i, j, k);
        s += w(static_cast<Eigen::Index>(i)) * d * d;
      }
  return s;
}

// Exhaustive search over permutations and column signs; R small.
inline double exhaustive_mse(const Matrix& truth, const Matrix& est) {
  const Eigen::Index R = truth.cols();
  std::vector<int> perm(static_cast<std::size_t>(R));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    for (unsigned mask = 0; mask < (1u << R); ++mask) {
      double s = 0.0;
      for (Eigen::Index r = 0; r < R; ++r) {
        const double sign = (mask >> r) & 1u ? -1.0 : 1.0;
        const Vector e = est.col(perm[static_cast<std::size_t>(r)]);
        s += (truth.col(r) / truth.col(r).norm() - sign * e / e.norm()).squaredNorm();
      }
      best = std::min(best, s / static_cast<double>(R));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Coarse log-spaced grid followed by golden-section refinement on the best
// bracket. Returns {argmin, min}.
inline std::pair<double, double> grid_refined_min(const std::function<double(double)>& g, double lo, double hi,
                                                  int grid = 400) {
  const double llo = std::log(lo), lhi = std::log(hi);
  int best = 0;
  double best_v = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= grid; ++n) {
    const double v = g(std::exp(llo + (lhi - llo) * n / grid));
    if (v < best_v) {
      best_v = v;
      best = n;
    }
  }
  double a = llo + (lhi - llo) * std::max(best - 1, 0) / grid;
  double b = llo + (lhi - llo) * std::min(best + 1, grid) / grid;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto h = [&](double x) { return g(std::exp(x)); };
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = h(x2);
    }
  }
  const double x = std::exp(0.5 * (a + b));
  return {x, g(x)};
}

// Accelerated projected gradient for min_X tr(X G X^T) - 2 tr(X H) over
// X >= 0, where G is R x R positive semidefinite and H is R x n. Step 1/L
// with momentum restarted whenever the objective goes up.
inline Matrix projected_gradient_nnls(const Matrix& G, const Matrix& H, int iters = 500000, double tol = 1e-15) {
  const double L = 2.0 * Eigen::SelfAdjointEigenSolver<Matrix>(G).eigenvalues().maxCoeff();
  auto objective = [&](const Matrix& X) { return (X * G * X.transpose()).trace() - 2.0 * (X * H).trace(); };
  Matrix X = Matrix::Zero(H.cols(), G.rows());
  Matrix Y = X;
  double t = 1.0;
  double fx = objective(X);
  for (int it = 0; it < iters; ++it) {
    const Matrix grad = 2.0 * (Y * G - H.transpose());
    const Matrix next = (Y - grad / L).cwiseMax(0.0);
    const double fn = objective(next);
    if (fn > fx) {
      Y = X;
      t = 1.0;
      continue;
    }
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double moved = (next - X).norm();
    Y = next + ((t - 1.0) / tn) * (next - X);
    X = next;
    t = tn;
    fx = fn;
    if (moved <= tol * (1.0 + X.norm())) break;
  }
  return X;
}

}  // namespace oracle
