#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "pnn/dataset.hpp"
#include "pnn/modelsel.hpp"

namespace pnn {

struct GprConfig {
  double length_scale = 1.0;
  std::pair<double, double> length_scale_bounds{1e-3, 1e3};
  double noise_variance = 0.1;
  bool tune_length_scale = false;

  void validate() const;
};

inline constexpr double kGprJitter = 1e-10;

/// Squared-exponential kernel exp(-||x - x'||^2 / (2 l^2)).
double sq_exp_kernel(const Vector& a, const Vector& b, double length_scale);

/// Zero-mean GP posterior over a fixed training set.
struct GprModel {
  GprConfig config;              // config.length_scale holds the selected value
  Matrix train_inputs;
  Vector train_outputs;
  Matrix chol_factor;            // Cholesky of K + (noise + jitter) I
  Vector weights;                // (K + noise I)^-1 y
  double log_marginal = 0.0;
};

/// Builds and factorizes the training covariance. When tune_length_scale is
/// set, the length scale maximizing the exact log marginal likelihood over a
/// 50-point log-spaced grid inside the bounds is selected.
GprModel gpr_fit(const Dataset& train_set, const GprConfig& config);

/// Posterior mean and variance at one test input (variance clamped at 0).
GaussianPrediction gpr_predict(const GprModel& model, const Vector& x);

double gpr_log_marginal_likelihood(const GprModel& model);

struct GprTuneCell {
  double length_scale_upper = 0.0;
  double noise_variance = 0.0;
  double kl = 0.0;
  bool valid = false;
};

struct GprTuneResult {
  std::vector<GprTuneCell> cells;
  std::size_t best_index = 0;
  GprModel best_model;
};

/// Fits one GPR per (length-scale upper bound, noise variance) cell, tuning
/// the length scale within [upper/1000, upper], and scores each by mean KL
/// against the empirical test moments.
GprTuneResult gpr_tune_noise(const Dataset& train_set, const EmpiricalStats& test_emp,
                             const std::vector<double>& length_scale_uppers,
                             const std::vector<double>& noise_grid, std::size_t jobs = 0);

void write_gpr_grid_csv(const GprTuneResult& result, const std::filesystem::path& path);

}  // namespace pnn
