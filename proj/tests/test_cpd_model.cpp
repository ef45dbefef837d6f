#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rcpd/cpd_model.hpp"
#include "rcpd/error.hpp"

using namespace rcpd;

TEST_CASE("reconstruct") {
  FactorTriple f;
  f.A = (Matrix(2, 1) << 1, 2).finished();
  f.B = (Matrix(1, 1) << 3).finished();
  f.C = (Matrix(1, 1) << 4).finished();
  const Tensor3 t = reconstruct(f);
  CHECK(t(0, 0, 0) == 12.0);
  CHECK(t(1, 0, 0) == 24.0);

  std::mt19937_64 rng(1);
  auto g = oracle::random_factors({3, 4, 5}, 2, rng);
  const Tensor3 r = reconstruct(g);
  const Tensor3 o = oracle::build(g);
  for (std::size_t n = 0; n < r.size(); ++n) CHECK(r.data()[n] == doctest::Approx(o.data()[n]).epsilon(1e-14));

  g.B.setZero();
  CHECK(reconstruct(g).squared_norm() == 0.0);
}

TEST_CASE("factor validation") {
  FactorTriple f{Matrix::Ones(2, 2), Matrix::Ones(3, 2), Matrix::Ones(4, 3)};
  CHECK_THROWS_AS(validate(f), Error);
  f.C = Matrix::Ones(4, 2);
  CHECK_NOTHROW(validate(f));
  CHECK_THROWS_AS(validate(f, Dims{2, 3, 5}), Error);
  f.A(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate(f), Error);
}

TEST_CASE("slab weights") {
  CHECK(SlabWeights(3).values() == Vector::Ones(3));
  CHECK_THROWS_AS(SlabWeights((Vector(2) << 1.0, -1.0).finished()), Error);
  const SlabWeights w((Vector(2) << 4.0, 9.0).finished());
  CHECK(w.sqrt_values()(1) == 3.0);
}

TEST_CASE("slab residual norms") {
  std::mt19937_64 rng(2);
  const auto f = oracle::random_factors({5, 4, 3}, 2, rng);
  Tensor3 t = reconstruct(f);
  CHECK(slab_residual_norms(t, f).maxCoeff() <= 1e-10);

  const Matrix O = oracle::random_matrix(4, 3, rng);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = 0; k < 3; ++k) t(2, j, k) += O(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  const Vector r = slab_residual_norms(t, f);
  CHECK(r(2) == doctest::Approx(O.norm()).epsilon(1e-12));
  for (Eigen::Index i : {0, 1, 3, 4}) CHECK(r(i) <= 1e-10);

  const FactorTriple z{Matrix::Zero(5, 2), Matrix::Zero(4, 2), Matrix::Zero(3, 2)};
  CHECK(slab_residual_norms(Tensor3(Dims{5, 4, 3}), z).isZero(0.0));
  CHECK_THROWS_AS(slab_residual_norms(Tensor3(Dims{5, 4, 2}), z), Error);
}

TEST_CASE("lp cost") {
  std::mt19937_64 rng(3);
  const auto f = oracle::random_factors({4, 3, 2}, 2, rng);
  const Tensor3 exact = reconstruct(f);
  CHECK(cost_lp(exact, f, 0.5, 1e-8) == doctest::Approx(4 * std::pow(1e-8, 0.25)).epsilon(1e-6));

  Tensor3 one = exact;
  one(1, 0, 0) += 1.0;
  CHECK(cost_lp(one, f, 1.0, 1e-300) == doctest::Approx(1.0).epsilon(1e-12));

  const Tensor3 noisy = oracle::random_tensor({4, 3, 2}, rng);
  const Matrix res = oracle::unfold(noisy, Mode::Horizontal) - oracle::kron_columns(f.C, f.B) * f.A.transpose();
  double expected = 0.0;
  for (Eigen::Index i = 0; i < res.cols(); ++i) expected += std::pow(res.col(i).squaredNorm() + 0.01, 0.35);
  CHECK(cost_lp(noisy, f, 0.7, 0.01) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(cost_lp(noisy, f, 0.7, 0.01) >= 4 * std::pow(0.01, 0.35));

  CHECK_THROWS_AS(cost_lp(noisy, f, 0.0, 1e-8), Error);
  CHECK_THROWS_AS(cost_lp(noisy, f, 1.5, 1e-8), Error);
  CHECK_THROWS_AS(cost_lp(noisy, f, 0.5, 0.0), Error);
}

TEST_CASE("phi_p by hand") {
  CHECK(phi_p(0.5, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(phi_p(0.5, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(phi_p(0.0, 0.5, 1e-8), Error);
}

TEST_CASE("weighted cost") {
  // One slab, zero residual, eps = 1, p = 1, w = 1/2.
  const Vector zero = Vector::Zero(1);
  CHECK(cost_weighted_from_residuals(zero, SlabWeights((Vector(1) << 0.5).finished()), 1.0, 1.0) ==
        doctest::Approx(1.0));

  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto f = oracle::random_factors({6, 3, 4}, 2, rng);
    const Tensor3 t = oracle::random_tensor({6, 3, 4}, rng);
    const double p = 0.3 + 0.7 * rep / 20.0;
    const double eps = std::pow(10.0, -1 - rep % 6);
    const Vector r2 = slab_residual_sq_norms(t, f);
    const SlabWeights best = weight_update(r2, p, eps);
    const double lp = cost_lp(t, f, p, eps);
    CHECK(cost_weighted(t, f, best, p, eps) == doctest::Approx(lp).epsilon(1e-10));

    Vector off = best.values();
    off(rep % 6) *= 1.5;
    CHECK(cost_weighted(t, f, SlabWeights(off), p, eps) > lp);
  }
  CHECK_THROWS_AS(cost_weighted_from_residuals(Vector::Ones(2), SlabWeights(Vector::Zero(2)), 0.5, 1e-8), Error);
}

TEST_CASE("weight update examples") {
  CHECK(weight_update(1.0 - 1e-8, 0.5, 1e-8) == doctest::Approx(0.25));
  CHECK(weight_update(0.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(weight_update(1e6, 0.5, 1e-8) == doctest::Approx(0.25 * std::pow(1e6, -0.75)).epsilon(1e-9));
  CHECK(weight_update(1e6, 0.5, 1e-8) == doctest::Approx(7.9e-6).epsilon(0.01));
  CHECK(weight_update(0.0, 0.5, 1e-8) > 0.0);
}

TEST_CASE("weight update minimizes the scalar surrogate") {
  // x = 2, p = 0.5, eps = 0.01.
  const double x2 = 4.0, p = 0.5, eps = 0.01;
  const auto [w, v] = oracle::grid_refined_min([&](double w) { return w * x2 + phi_p(w, p, eps); }, 1e-8, 1e4);
  CHECK(v == doctest::Approx(std::pow(x2 + eps, p / 2)).epsilon(1e-9));
  CHECK(w == doctest::Approx(weight_update(x2, p, eps)).epsilon(1e-4));
}

TEST_CASE("min cost assignment") {
  Matrix c(3, 3);
  c << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  const auto perm = min_cost_assignment(c);
  double total = 0.0;
  for (std::size_t r = 0; r < 3; ++r) total += c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(perm[r]));
  CHECK(total == 5.0);
}

TEST_CASE("align_and_mse") {
  std::mt19937_64 rng(5);
  const Matrix truth = oracle::random_matrix(6, 3, rng);
  CHECK(align_and_mse(truth, truth) <= 1e-30);

  Matrix scrambled(6, 3);
  scrambled.col(0) = -3.0 * truth.col(2);
  scrambled.col(1) = 0.5 * truth.col(0);
  scrambled.col(2) = -3.0 * truth.col(1);
  CHECK(align_and_mse(truth, scrambled) <= 1e-30);
  CHECK(mse_to_db(align_and_mse(truth, scrambled)) == kMseFloorDb);

  const Alignment al = align_columns(truth, scrambled);
  CHECK(al.permutation == std::vector<std::size_t>{1, 2, 0});

  const Matrix I2 = Matrix::Identity(2, 2);
  Matrix e(2, 2);
  e << 1, 1, 1, 1;
  e /= std::sqrt(2.0);
  CHECK(align_and_mse(I2, e) == doctest::Approx(oracle::exhaustive_mse(I2, e)).epsilon(1e-14));

  Matrix zero_col = truth;
  zero_col.col(1).setZero();
  CHECK_THROWS_AS(align_and_mse(truth, zero_col), Error);
  CHECK_THROWS_AS(align_and_mse(truth, truth.leftCols(2)), Error);
}

TEST_CASE("align_and_mse agrees with exhaustive search") {
  std::mt19937_64 rng(6);
  for (Eigen::Index R = 1; R <= 6; ++R)
    for (int rep = 0; rep < 8; ++rep) {
      const Matrix truth = oracle::random_matrix(7, R, rng);
      Matrix est = oracle::random_matrix(7, R, rng);
      if (rep % 2 == 0) est = truth + 0.3 * est;
      CHECK(align_and_mse(truth, est) == doctest::Approx(oracle::exhaustive_mse(truth, est)).epsilon(1e-12));

      const Vector scale = (oracle::random_matrix(R, 1, rng).array().abs() + 0.5).matrix();
      const Matrix scaled = est * scale.asDiagonal();
      CHECK(align_and_mse(truth, scaled) == doctest::Approx(align_and_mse(truth, est)).epsilon(1e-12));
    }
}

TEST_CASE("mse_to_db") {
  CHECK(mse_to_db(0.01) == doctest::Approx(-20.0));
  CHECK(mse_to_db(0.0) == kMseFloorDb);
  CHECK(mse_to_db(1e-40) == kMseFloorDb);
  CHECK(std::isnan(mse_to_db(std::numeric_limits<double>::quiet_NaN())));
}
