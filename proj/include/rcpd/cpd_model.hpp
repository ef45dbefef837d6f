#pragma once

// CPD factor container, model reconstruction, the smoothed lp slab cost and
// its reweighted form, and the permutation/sign aligned factor MSE.

#include <cstddef>
#include <vector>

#include "rcpd/tensor.hpp"

namespace rcpd {

// Loading matrices of X = sum_r A(:,r) o B(:,r) o C(:,r).
struct FactorTriple {
  Matrix A;  // I x R
  Matrix B;  // J x R
  Matrix C;  // K x R

  std::size_t rank() const { return static_cast<std::size_t>(A.cols()); }
  Dims dims() const {
    return {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(B.rows()),
            static_cast<std::size_t>(C.rows())};
  }
};

// Throws unless the three matrices share a positive column count and are finite.
void validate(const FactorTriple& f);
// validate() plus row counts matching the tensor dimensions.
void validate(const FactorTriple& f, const Dims& dims);

// Per horizontal slab weights w_i; the solvers scale slab i by sqrt(w_i).
class SlabWeights {
 public:
  SlabWeights() = default;
  // All weights equal to one.
  explicit SlabWeights(std::size_t n) : w_(Vector::Ones(static_cast<Eigen::Index>(n))) {}
  // Requires finite w_i >= 0.
  explicit SlabWeights(Vector w);

  const Vector& values() const { return w_; }
  Vector sqrt_values() const { return w_.array().sqrt(); }
  std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
  double operator[](std::size_t i) const { return w_(static_cast<Eigen::Index>(i)); }

 private:
  Vector w_;
};

Tensor3 reconstruct(const FactorTriple& f);

// ||X^(3)(:,i) - (C kr B) A(i,:)^T||_2^2 for every i, computed from the
// elementwise residual (no expansion of the square).
Vector slab_residual_sq_norms(const Tensor3& t, const FactorTriple& f);
Vector slab_residual_norms(const Tensor3& t, const FactorTriple& f);

// sum_i (r_i^2 + eps)^(p/2). Requires 0 < p <= 1 and eps > 0.
double cost_lp(const Tensor3& t, const FactorTriple& f, double p, double eps);
double cost_lp_from_residuals(const Vector& residual_sq, double p, double eps);

// sum_i w_i r_i^2 + phi_p(w_i). Every w_i must be strictly positive.
double cost_weighted(const Tensor3& t, const FactorTriple& f, const SlabWeights& w, double p,
                     double eps);
double cost_weighted_from_residuals(const Vector& residual_sq, const SlabWeights& w, double p,
                                    double eps);

// phi_p(w) = (2-p)/2 * ((2/p) w)^(p/(p-2)) + eps*w, for w > 0, 0 < p < 2, eps >= 0.
double phi_p(double w, double p, double eps);

// Minimizer of w*x^2 + phi_p(w): (p/2) (x^2 + eps)^((p-2)/2).
double weight_update(double x_norm_sq, double p, double eps);
SlabWeights weight_update(const Vector& residual_sq, double p, double eps);

// Factor-recovery error between two loading matrices of equal shape:
// min over column permutations and signs of
//   (1/R) sum_r || t_r/||t_r|| - c_r e_pi(r)/||e_pi(r)|| ||^2.
// The permutation is found by optimal assignment on the R x R cost matrix.
double align_and_mse(const Matrix& truth, const Matrix& estimate);

struct Alignment {
  double mse = 0.0;
  std::vector<std::size_t> permutation;  // truth column r matched to estimate column permutation[r]
  std::vector<int> signs;
};
Alignment align_columns(const Matrix& truth, const Matrix& estimate);

// 10 log10(mse), floored at kMseFloorDb.
inline constexpr double kMseFloorDb = -300.0;
double mse_to_db(double mse);

// Minimum-cost perfect matching on a square cost matrix; returns the column
// assigned to each row.
std::vector<std::size_t> min_cost_assignment(const Matrix& cost);

}  // namespace rcpd
