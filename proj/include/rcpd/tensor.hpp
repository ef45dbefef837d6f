#pragma once

// Dense three-way tensors and the unfolding / Khatri-Rao kernels used by the
// CPD solvers.
//
// Storage layout
// --------------
// Element (i, j, k) of an I x J x K tensor lives at offset i + I*(j + J*k):
// the first index is fastest. Frontal slabs X(:, :, k) are therefore
// contiguous I x J column-major blocks.
//
// Unfoldings
// ----------
// The three unfoldings are defined so that, for X = sum_r A(:,r) o B(:,r) o C(:,r),
//
//   unfold(X, Lateral)    = (A kr C) B^T   (KI x J),  row i*K + k, column j
//   unfold(X, Frontal)    = (B kr A) C^T   (IJ x K),  row j*I + i, column k
//   unfold(X, Horizontal) = (C kr B) A^T   (JK x I),  row k*J + j, column i
//
// where "kr" is the Khatri-Rao product with the left operand's row index
// varying slowest. Column n of each unfolding is the column-major
// vectorization of the corresponding slab returned by slab().

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rcpd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Slab / unfolding type. Lateral fixes j (mode 1), Frontal fixes k (mode 2),
// Horizontal fixes i (mode 3).
enum class Mode { Lateral = 1, Frontal = 2, Horizontal = 3 };

Mode mode_from_int(int mode);

struct Dims {
  std::size_t I = 0;
  std::size_t J = 0;
  std::size_t K = 0;

  std::size_t numel() const { return I * J * K; }
  bool operator==(const Dims&) const = default;
};

class Tensor3 {
 public:
  Tensor3() = default;
  // Zero tensor. All dimensions must be positive.
  explicit Tensor3(Dims dims);
  // Takes ownership of data laid out as documented above. Entries must be finite.
  Tensor3(Dims dims, std::vector<double> data);

  const Dims& dims() const { return dims_; }
  std::size_t size() const { return data_.size(); }

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i + dims_.I * (j + dims_.J * k)];
  }
  double& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i + dims_.I * (j + dims_.J * k)];
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  // Zero-copy I x J view of frontal slab k.
  Eigen::Map<const Matrix> frontal(std::size_t k) const {
    return {data_.data() + k * dims_.I * dims_.J, static_cast<Eigen::Index>(dims_.I),
            static_cast<Eigen::Index>(dims_.J)};
  }
  Eigen::Map<Matrix> frontal(std::size_t k) {
    return {data_.data() + k * dims_.I * dims_.J, static_cast<Eigen::Index>(dims_.I),
            static_cast<Eigen::Index>(dims_.J)};
  }

  double squared_norm() const;

 private:
  Dims dims_{};
  std::vector<double> data_;
};

// Lateral j -> K x I, Frontal k -> I x J, Horizontal i -> J x K.
Matrix slab(const Tensor3& t, Mode mode, std::size_t index);

Matrix unfold(const Tensor3& t, Mode mode);
Tensor3 fold(const Matrix& m, Mode mode, Dims dims);

// Column-wise Kronecker product; column r is U(:,r) kron V(:,r).
Matrix khatri_rao(const Matrix& U, const Matrix& V);

// Matricized tensor times Khatri-Rao product, returned as (U kr V)^T unfold(t, mode)
// without materializing either operand:
//   Lateral:    U is I x R, V is K x R, result R x J
//   Frontal:    U is J x R, V is I x R, result R x K
//   Horizontal: U is K x R, V is J x R, result R x I
Matrix mttkrp(const Tensor3& t, const Matrix& U, const Matrix& V, Mode mode);

// Largest k such that every k columns are linearly independent. Numerical
// rank uses the threshold 1e-9 * sigma_max. Exhaustive over column subsets,
// so limited to matrices with at most kKruskalRankMaxCols columns.
inline constexpr std::size_t kKruskalRankMaxCols = 12;
std::size_t kruskal_rank(const Matrix& M);

}  // namespace rcpd
