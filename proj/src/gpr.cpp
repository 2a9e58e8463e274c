#include "pnn/gpr.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

#include "pnn/csv.hpp"
#include "pnn/errors.hpp"
#include "pnn/parallel.hpp"

namespace pnn {

void GprConfig::validate() const {
  if (!(length_scale > 0.0)) throw DomainError("gpr: length_scale must be > 0");
  if (!(length_scale_bounds.first > 0.0) ||
      !(length_scale_bounds.first <= length_scale_bounds.second)) {
    throw DomainError("gpr: length_scale_bounds must be positive and ordered");
  }
  if (noise_variance < 0.0) throw DomainError("gpr: noise_variance must be >= 0");
}

double sq_exp_kernel(const Vector& a, const Vector& b, double length_scale) {
  if (a.size() != b.size()) throw ShapeError("kernel: dimension mismatch");
  if (!(length_scale > 0.0)) throw DomainError("kernel: length_scale must be > 0");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * length_scale * length_scale));
}

namespace {

Matrix kernel_matrix(const Matrix& inputs, double length_scale, double diag_add) {
  const std::size_t n = inputs.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0 + diag_add;
    const Vector xi = inputs.row(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = sq_exp_kernel(xi, inputs.row(j), length_scale);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

struct Factorized {
  Matrix chol;
  Vector weights;
  double log_marginal;
};

Factorized factorize(const Matrix& inputs, const Vector& y, double length_scale,
                     double noise_variance) {
  const Matrix k = kernel_matrix(inputs, length_scale, noise_variance + kGprJitter);
  Matrix chol;
  try {
    chol = cholesky(k);
  } catch (const FactorizationError& e) {
    throw FactorizationError(std::string(e.what()) +
                             " (try a larger noise_variance)");
  }
  Vector weights = solve_cholesky(chol, y);
  double log_det_half = 0.0;
  for (std::size_t i = 0; i < chol.rows(); ++i) log_det_half += std::log(chol(i, i));
  double quad = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) quad += y[i] * weights[i];
  const double lml = -0.5 * quad - log_det_half -
                     0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
  return {std::move(chol), std::move(weights), lml};
}

}  // namespace

GprModel gpr_fit(const Dataset& train_set, const GprConfig& config) {
  config.validate();
  if (train_set.size() < 1) throw DomainError("gpr_fit: empty training set");

  GprModel model;
  model.config = config;
  model.train_inputs = train_set.inputs;
  model.train_outputs = train_set.outputs;

  double length_scale = config.length_scale;
  if (config.tune_length_scale) {
    const double lo = config.length_scale_bounds.first;
    const double hi = config.length_scale_bounds.second;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      throw DomainError("gpr_fit: tuning requires finite length_scale_bounds");
    }
    constexpr std::size_t kGridPoints = 50;
    double best_lml = -std::numeric_limits<double>::infinity();
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    for (std::size_t i = 0; i < kGridPoints; ++i) {
      const double frac = kGridPoints == 1
                              ? 0.0
                              : static_cast<double>(i) / static_cast<double>(kGridPoints - 1);
      const double candidate = std::exp(log_lo + frac * (log_hi - log_lo));
      const Factorized f =
          factorize(model.train_inputs, model.train_outputs, candidate, config.noise_variance);
      if (f.log_marginal > best_lml) {
        best_lml = f.log_marginal;
        length_scale = candidate;
      }
    }
  }

  Factorized f =
      factorize(model.train_inputs, model.train_outputs, length_scale, config.noise_variance);
  model.config.length_scale = length_scale;
  model.chol_factor = std::move(f.chol);
  model.weights = std::move(f.weights);
  model.log_marginal = f.log_marginal;
  return model;
}

GaussianPrediction gpr_predict(const GprModel& model, const Vector& x) {
  const std::size_t n = model.train_inputs.rows();
  if (x.size() != model.train_inputs.cols()) {
    throw ShapeError("gpr_predict: input dimension mismatch");
  }
  Vector k_star(n);
  for (std::size_t i = 0; i < n; ++i) {
    k_star[i] = sq_exp_kernel(x, model.train_inputs.row(i), model.config.length_scale);
  }
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += k_star[i] * model.weights[i];

  const Vector v = solve_cholesky(model.chol_factor, k_star);
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += k_star[i] * v[i];
  double variance = 1.0 - quad;  // prior variance k(x,x) = 1
  if (variance < 0.0) variance = 0.0;  // round-off only; Eq. subtracts a PSD form
  return {mean, variance};
}

double gpr_log_marginal_likelihood(const GprModel& model) { return model.log_marginal; }

GprTuneResult gpr_tune_noise(const Dataset& train_set, const EmpiricalStats& test_emp,
                             const std::vector<double>& length_scale_uppers,
                             const std::vector<double>& noise_grid, std::size_t jobs) {
  if (length_scale_uppers.empty() || noise_grid.empty()) {
    throw DomainError("gpr_tune_noise: empty grids");
  }
  GprTuneResult result;
  const std::size_t n_cells = length_scale_uppers.size() * noise_grid.size();
  result.cells.resize(n_cells);
  std::vector<GprModel> models(n_cells);

  parallel_for(n_cells, jobs, [&](std::size_t idx) {
    const double upper = length_scale_uppers[idx / noise_grid.size()];
    const double noise = noise_grid[idx % noise_grid.size()];
    GprTuneCell& cell = result.cells[idx];
    cell.length_scale_upper = upper;
    cell.noise_variance = noise;
    try {
      GprConfig cfg;
      cfg.length_scale_bounds = {upper / 1000.0, upper};
      cfg.length_scale = upper;
      cfg.noise_variance = noise;
      cfg.tune_length_scale = true;
      GprModel model = gpr_fit(train_set, cfg);
      std::vector<GaussianPrediction> preds;
      preds.reserve(test_emp.groups.size());
      for (const auto& g : test_emp.groups) {
        GaussianPrediction p = gpr_predict(model, g.input);
        if (!(p.variance > 0.0)) p.variance = kGprJitter;
        preds.push_back(p);
      }
      const double kl = score_predictions(preds, test_emp);
      if (std::isfinite(kl)) {
        cell.kl = kl;
        cell.valid = true;
        models[idx] = std::move(model);
      }
    } catch (const FactorizationError&) {
      // flagged invalid; search continues
    }
  });

  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < n_cells; ++idx) {
    if (result.cells[idx].valid && result.cells[idx].kl < best) {
      best = result.cells[idx].kl;
      result.best_index = idx;
      found = true;
    }
  }
  if (!found) throw FactorizationError("gpr_tune_noise: every cell failed");
  result.best_model = std::move(models[result.best_index]);
  return result;
}

void write_gpr_grid_csv(const GprTuneResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("gpr grid: cannot write " + path.string());
  out << "length_scale_bound,noise_variance,kl,status\n";
  for (const auto& cell : result.cells) {
    out << format_double(cell.length_scale_upper) << ","
        << format_double(cell.noise_variance) << ","
        << (cell.valid ? format_double(cell.kl) : "nan") << ","
        << (cell.valid ? "ok" : "failed") << "\n";
  }
}

}  // namespace pnn
