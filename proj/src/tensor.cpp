#include "rcpd/tensor.hpp"

#include <cmath>
#include <string>

#include "rcpd/error.hpp"

namespace rcpd {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

void check_dims(const Dims& d) {
  require(d.I > 0 && d.J > 0 && d.K > 0, ErrorCode::InvalidArgument,
          "tensor dimensions must be positive");
}

// Numerical rank with threshold 1e-9 * sigma_max.
Eigen::Index numerical_rank(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double thresh = 1e-9 * s(0);
  Eigen::Index r = 0;
  for (Eigen::Index n = 0; n < s.size(); ++n)
    if (s(n) > thresh) ++r;
  return r;
}

// Visits all k-subsets of {0..n-1} in lexicographic order until f returns false.
template <typename F>
bool all_subsets(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> pick(k);
  for (std::size_t q = 0; q < k; ++q) pick[q] = q;
  while (true) {
    if (!f(pick)) return false;
    std::size_t q = k;
    while (q > 0 && pick[q - 1] == n - k + (q - 1)) --q;
    if (q == 0) return true;
    ++pick[q - 1];
    for (std::size_t s = q; s < k; ++s) pick[s] = pick[s - 1] + 1;
  }
}

}  // namespace

Mode mode_from_int(int mode) {
  switch (mode) {
    case 1: return Mode::Lateral;
    case 2: return Mode::Frontal;
    case 3: return Mode::Horizontal;
    default: fail(ErrorCode::InvalidArgument, "mode must be 1, 2 or 3, got " + std::to_string(mode));
  }
}

Tensor3::Tensor3(Dims dims) : dims_(dims) {
  check_dims(dims_);
  data_.assign(dims_.numel(), 0.0);
}

Tensor3::Tensor3(Dims dims, std::vector<double> data) : dims_(dims), data_(std::move(data)) {
  check_dims(dims_);
  require(data_.size() == dims_.numel(), ErrorCode::DimensionMismatch,
          "tensor data length does not match I*J*K");
  for (double v : data_)
    require(std::isfinite(v), ErrorCode::NonFinite, "tensor entries must be finite");
}

double Tensor3::squared_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return s;
}

Matrix slab(const Tensor3& t, Mode mode, std::size_t index) {
  const auto [I, J, K] = t.dims();
  switch (mode) {
    case Mode::Lateral: {
      require(index < J, ErrorCode::InvalidArgument, "lateral slab index out of range");
      Matrix m(idx(K), idx(I));
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < I; ++i) m(idx(k), idx(i)) = t(i, index, k);
      return m;
    }
    case Mode::Frontal:
      require(index < K, ErrorCode::InvalidArgument, "frontal slab index out of range");
      return t.frontal(index);
    case Mode::Horizontal: {
      require(index < I, ErrorCode::InvalidArgument, "horizontal slab index out of range");
      Matrix m(idx(J), idx(K));
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j) m(idx(j), idx(k)) = t(index, j, k);
      return m;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown mode");
}

Matrix unfold(const Tensor3& t, Mode mode) {
  const auto [I, J, K] = t.dims();
  switch (mode) {
    case Mode::Lateral: {
      Matrix m(idx(K * I), idx(J));
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) m(idx(i * K + k), idx(j)) = t(i, j, k);
      return m;
    }
    case Mode::Frontal:
      // The storage layout is exactly the IJ x K column-major frontal unfolding.
      return Eigen::Map<const Matrix>(t.data().data(), idx(I * J), idx(K));
    case Mode::Horizontal: {
      Matrix m(idx(J * K), idx(I));
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) m(idx(k * J + j), idx(i)) = t(i, j, k);
      return m;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown mode");
}

Tensor3 fold(const Matrix& m, Mode mode, Dims dims) {
  check_dims(dims);
  const auto [I, J, K] = dims;
  Tensor3 t(dims);
  switch (mode) {
    case Mode::Lateral:
      require(m.rows() == idx(K * I) && m.cols() == idx(J), ErrorCode::DimensionMismatch,
              "fold: lateral unfolding must be KI x J");
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) t(i, j, k) = m(idx(i * K + k), idx(j));
      break;
    case Mode::Frontal:
      require(m.rows() == idx(I * J) && m.cols() == idx(K), ErrorCode::DimensionMismatch,
              "fold: frontal unfolding must be IJ x K");
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) t(i, j, k) = m(idx(j * I + i), idx(k));
      break;
    case Mode::Horizontal:
      require(m.rows() == idx(J * K) && m.cols() == idx(I), ErrorCode::DimensionMismatch,
              "fold: horizontal unfolding must be JK x I");
      for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
          for (std::size_t i = 0; i < I; ++i) t(i, j, k) = m(idx(k * J + j), idx(i));
      break;
  }
  for (double v : t.data())
    require(std::isfinite(v), ErrorCode::NonFinite, "fold: entries must be finite");
  return t;
}

Matrix khatri_rao(const Matrix& U, const Matrix& V) {
  require(U.cols() == V.cols(), ErrorCode::DimensionMismatch,
          "khatri_rao: operands must have the same number of columns");
  Matrix out(U.rows() * V.rows(), U.cols());
  for (Eigen::Index r = 0; r < U.cols(); ++r)
    for (Eigen::Index a = 0; a < U.rows(); ++a)
      out.col(r).segment(a * V.rows(), V.rows()) = U(a, r) * V.col(r);
  return out;
}

Matrix mttkrp(const Tensor3& t, const Matrix& U, const Matrix& V, Mode mode) {
  const auto [I, J, K] = t.dims();
  require(U.cols() == V.cols(), ErrorCode::DimensionMismatch,
          "mttkrp: factor column counts differ");
  const Eigen::Index R = U.cols();

  switch (mode) {
    case Mode::Lateral: {
      require(U.rows() == idx(I) && V.rows() == idx(K), ErrorCode::DimensionMismatch,
              "mttkrp(lateral): expected U with I rows and V with K rows");
      Matrix acc = Matrix::Zero(idx(J), R);
      for (std::size_t k = 0; k < K; ++k) {
        Matrix s = t.frontal(k).transpose() * U;  // J x R
        acc.array() += s.array().rowwise() * V.row(idx(k)).array();
      }
      return acc.transpose();
    }
    case Mode::Frontal: {
      require(U.rows() == idx(J) && V.rows() == idx(I), ErrorCode::DimensionMismatch,
              "mttkrp(frontal): expected U with J rows and V with I rows");
      Matrix out(R, idx(K));
      for (std::size_t k = 0; k < K; ++k) {
        Matrix s = t.frontal(k) * U;  // I x R
        out.col(idx(k)) = (s.array() * V.array()).colwise().sum().transpose();
      }
      return out;
    }
    case Mode::Horizontal: {
      require(U.rows() == idx(K) && V.rows() == idx(J), ErrorCode::DimensionMismatch,
              "mttkrp(horizontal): expected U with K rows and V with J rows");
      Matrix acc = Matrix::Zero(idx(I), R);
      for (std::size_t k = 0; k < K; ++k) {
        Matrix s = t.frontal(k) * V;  // I x R
        acc.array() += s.array().rowwise() * U.row(idx(k)).array();
      }
      return acc.transpose();
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown mode");
}

std::size_t kruskal_rank(const Matrix& M) {
  const auto n = static_cast<std::size_t>(M.cols());
  require(n <= kKruskalRankMaxCols, ErrorCode::InvalidArgument,
          "kruskal_rank: too many columns for exhaustive search");
  const auto max_k = std::min<std::size_t>(n, static_cast<std::size_t>(M.rows()));
  std::size_t krank = 0;
  for (std::size_t k = 1; k <= max_k; ++k) {
    const bool ok = all_subsets(n, k, [&](const std::vector<std::size_t>& cols) {
      Matrix sub(M.rows(), idx(k));
      for (std::size_t q = 0; q < k; ++q) sub.col(idx(q)) = M.col(idx(cols[q]));
      return numerical_rank(sub) == idx(k);
    });
    if (!ok) break;
    krank = k;
  }
  return krank;
}

}  // namespace rcpd
