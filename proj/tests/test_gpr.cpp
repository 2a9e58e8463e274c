#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "pnn/gpr.hpp"
#include "pnn/linalg.hpp"

using namespace pnn;

namespace {

Dataset grid_dataset(std::size_t n, double lo, double hi,
                     const std::function<double(double)>& f) {
  Dataset ds;
  ds.inputs = Matrix(n, 1);
  ds.outputs.resize(n);
  ds.group_keys.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    ds.inputs(i, 0) = x;
    ds.outputs[i] = f(x);
    ds.group_keys[i] = i;
  }
  return ds;
}

// dense inverse by Gauss-Jordan, used as an oracle for the Cholesky solves
Matrix dense_inverse(Matrix a) {
  const std::size_t n = a.rows();
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
    }
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(col, j), a(pivot, j));
      std::swap(inv(col, j), inv(pivot, j));
    }
    const double d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a(r, col);
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= factor * a(col, j);
        inv(r, j) -= factor * inv(col, j);
      }
    }
  }
  return inv;
}

Matrix kernel_matrix(const Dataset& ds, double length_scale, double diag_add) {
  const std::size_t n = ds.size();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      k(i, j) = sq_exp_kernel(ds.inputs.row(i), ds.inputs.row(j), length_scale);
    }
    k(i, i) += diag_add;
  }
  return k;
}

}  // namespace

TEST_CASE("squared-exponential kernel closed forms") {
  CHECK(sq_exp_kernel({0.3}, {0.3}, 2.0) == 1.0);
  CHECK(sq_exp_kernel({0.0}, {1.0}, 1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(sq_exp_kernel({0.0}, {1.0}, 1.0) == doctest::Approx(0.606531).epsilon(1e-5));
  CHECK(sq_exp_kernel({0.0, 0.0}, {3.0, 4.0}, 1.0) ==
        doctest::Approx(std::exp(-12.5)).epsilon(1e-12));
  CHECK(sq_exp_kernel({0.0}, {100.0}, 1.0) < 1e-300);
  CHECK_THROWS_AS(sq_exp_kernel({0.0}, {0.0, 1.0}, 1.0), ShapeError);
  CHECK_THROWS_AS(sq_exp_kernel({0.0}, {0.0}, 0.0), DomainError);
}

TEST_CASE("single training pair with zero noise reproduces the target") {
  Dataset ds;
  ds.inputs = Matrix(1, 1, 0.4);
  ds.outputs = {2.5};
  ds.group_keys = {0};
  GprConfig cfg;
  cfg.noise_variance = 0.0;
  const GprModel model = gpr_fit(ds, cfg);
  CHECK(model.weights[0] == doctest::Approx(2.5 / (1.0 + kGprJitter)).epsilon(1e-12));
  const GaussianPrediction at_train = gpr_predict(model, {0.4});
  CHECK(at_train.mean == doctest::Approx(2.5).epsilon(1e-8));
  CHECK(at_train.variance < 1e-8);
}

TEST_CASE("posterior matches the dense-inverse oracle") {
  const Dataset ds = grid_dataset(10, -1.0, 1.0, [](double x) { return std::sin(3 * x); });
  GprConfig cfg;
  cfg.length_scale = 0.6;
  cfg.noise_variance = 0.05;
  const GprModel model = gpr_fit(ds, cfg);

  const Matrix inv = dense_inverse(kernel_matrix(ds, 0.6, 0.05 + kGprJitter));
  for (double x : {-0.77, 0.123, 0.9}) {
    Vector kstar(10);
    for (std::size_t i = 0; i < 10; ++i) {
      kstar[i] = sq_exp_kernel({x}, ds.inputs.row(i), 0.6);
    }
    double mean = 0.0;  // k*^T K^-1 y
    double quad = 0.0;  // k*^T K^-1 k*
    for (std::size_t i = 0; i < 10; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 10; ++j) acc += inv(i, j) * kstar[j];
      mean += acc * ds.outputs[i];  // inv is symmetric
      quad += kstar[i] * acc;
    }
    const GaussianPrediction pred = gpr_predict(model, {x});
    CHECK(pred.mean == doctest::Approx(mean).epsilon(1e-8));
    CHECK(pred.variance == doctest::Approx(1.0 - quad).epsilon(1e-8));
  }
}

TEST_CASE("log marginal likelihood matches the explicit formula") {
  const Dataset ds = grid_dataset(20, -2.0, 2.0, [](double x) { return x * x - 1.0; });
  GprConfig cfg;
  cfg.length_scale = 0.8;
  cfg.noise_variance = 0.1;
  const GprModel model = gpr_fit(ds, cfg);

  const Matrix k = kernel_matrix(ds, 0.8, 0.1 + kGprJitter);
  const Matrix inv = dense_inverse(k);
  const Matrix chol = cholesky(k);
  double quad = 0.0;
  double logdet = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    logdet += 2.0 * std::log(chol(i, i));
    for (std::size_t j = 0; j < 20; ++j) quad += ds.outputs[i] * inv(i, j) * ds.outputs[j];
  }
  const double expected =
      -0.5 * quad - 0.5 * logdet - 10.0 * std::log(2.0 * std::numbers::pi);
  CHECK(gpr_log_marginal_likelihood(model) == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("length-scale tuning recovers the generating scale") {
  // draw one function from a GP prior with l* = 0.5, then tune on noisy values
  const std::size_t n = 40;
  Dataset ds = grid_dataset(n, -2.0, 2.0, [](double) { return 0.0; });
  const Matrix k = kernel_matrix(ds, 0.5, 1e-8);
  const Matrix chol = cholesky(k);
  Rng rng(202);
  const Vector z = sample_standard_normal(rng, n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= i; ++j) acc += chol(i, j) * z[j];
    ds.outputs[i] = acc + 0.01 * rng.normal();
  }
  GprConfig cfg;
  cfg.noise_variance = 1e-4;
  cfg.tune_length_scale = true;
  cfg.length_scale_bounds = {1e-2, 1e2};
  const GprModel model = gpr_fit(ds, cfg);
  CHECK(model.config.length_scale > 0.25);
  CHECK(model.config.length_scale < 1.0);
}

TEST_CASE("posterior reverts to the prior far from the data") {
  const Dataset ds = grid_dataset(15, -1.0, 1.0, [](double x) { return 2.0 * x; });
  GprConfig cfg;
  cfg.length_scale = 0.5;
  cfg.noise_variance = 0.01;
  const GprModel model = gpr_fit(ds, cfg);
  const GaussianPrediction far = gpr_predict(model, {50.0});
  CHECK(std::fabs(far.mean) < 1e-10);
  CHECK(far.variance == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("predictive variance never exceeds the prior variance") {
  const Dataset ds = grid_dataset(25, -1.0, 1.0, [](double x) { return std::cos(4 * x); });
  GprConfig cfg;
  cfg.length_scale = 0.3;
  cfg.noise_variance = 0.05;
  const GprModel model = gpr_fit(ds, cfg);
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    const GaussianPrediction pred = gpr_predict(model, {rng.uniform(-3, 3)});
    CHECK(pred.variance <= 1.0 + 1e-9);
    CHECK(pred.variance >= 0.0);
  }
}

TEST_CASE("conditioning on more data never inflates the variance") {
  const Dataset full = grid_dataset(20, -1.0, 1.0, [](double x) { return std::sin(2 * x); });
  Dataset half;
  half.inputs = Matrix(10, 1);
  half.outputs.resize(10);
  half.group_keys.resize(10);
  for (std::size_t i = 0; i < 10; ++i) {
    half.inputs(i, 0) = full.inputs(i, 0);
    half.outputs[i] = full.outputs[i];
    half.group_keys[i] = i;
  }
  GprConfig cfg;
  cfg.length_scale = 0.4;
  cfg.noise_variance = 0.0;
  const GprModel small = gpr_fit(half, cfg);
  const GprModel big = gpr_fit(full, cfg);
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(-1.5, 1.5);
    CHECK(gpr_predict(big, {x}).variance <= gpr_predict(small, {x}).variance + 1e-8);
  }
}

TEST_CASE("noise tuning over a singleton grid") {
  const Dataset train = gen_cubic({40, 5, 31});
  const Dataset test = gen_cubic({15, 5, 32});
  const EmpiricalStats emp = group_replicates(test);
  const GprTuneResult result = gpr_tune_noise(train, emp, {1.0}, {0.5}, 1);
  REQUIRE(result.cells.size() == 1);
  CHECK(result.cells[0].valid);
  CHECK(result.cells[0].noise_variance == 0.5);
  CHECK(result.best_index == 0);
  CHECK(std::isfinite(result.cells[0].kl));
  CHECK(result.best_model.config.noise_variance == 0.5);
  CHECK(result.best_model.config.length_scale_bounds.first ==
        doctest::Approx(1.0 / 1000.0).epsilon(1e-12));
}

TEST_CASE("gpr config validation") {
  GprConfig bad;
  bad.noise_variance = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.length_scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.length_scale_bounds = {1.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}
