#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "pnn/modelsel.hpp"

namespace pnn {

/// Two-sided 90% Gaussian interval half-width multiplier.
inline constexpr double kZ90 = 1.6448536269514722;

/// 1 - SS_res / SS_tot.
double r_squared(const Vector& actual, const Vector& predicted);

/// Sample Pearson correlation.
double pearson(const Vector& a, const Vector& b);

/// mean +/- z * sqrt(variance).
std::pair<double, double> interval_90(const GaussianPrediction& pred);

inline double interval_90_width(const GaussianPrediction& pred) {
  const auto [lo, hi] = interval_90(pred);
  return hi - lo;
}

struct ScatterRow {
  double emp_mean = 0.0;
  double pred_mean = 0.0;
  double emp_interval = 0.0;   // replicate range (max - min)
  double pred_interval = 0.0;  // 90% interval width
  bool degenerate = false;
};

struct EvalReport {
  double r_squared = 0.0;            // on group means, all groups
  double interval_correlation = 0.0; // Pearson, non-degenerate groups
  double mean_kl = 0.0;              // non-degenerate groups
  std::vector<ScatterRow> rows;
};

/// One prediction per unique test input, paired with its empirical moments.
EvalReport evaluate(const std::vector<GaussianPrediction>& preds,
                    const EmpiricalStats& emp);

void write_report_json(const EvalReport& report, const std::filesystem::path& path);
/// `emp_mean,pred_mean` and `emp_interval,pred_interval` scatter files.
void write_scatter_csvs(const EvalReport& report,
                        const std::filesystem::path& mean_path,
                        const std::filesystem::path& interval_path);

}  // namespace pnn
