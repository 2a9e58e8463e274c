#include "pnn/metrics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pnn/csv.hpp"
#include "pnn/errors.hpp"

namespace pnn {

double r_squared(const Vector& actual, const Vector& predicted) {
  if (actual.size() != predicted.size()) throw ShapeError("r_squared: length mismatch");
  if (actual.size() < 2) throw DomainError("r_squared: need at least 2 pairs");
  double mean = 0.0;
  for (double y : actual) mean += y;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    const double d = actual[i] - mean;
    ss_res += r * r;
    ss_tot += d * d;
  }
  if (!(ss_tot > 0.0)) throw DomainError("r_squared: actual values are constant");
  return 1.0 - ss_res / ss_tot;
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw ShapeError("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw DomainError("pearson: need at least 2 pairs");
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= static_cast<double>(n);
  mean_b /= static_cast<double>(n);
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (!(var_a > 0.0) || !(var_b > 0.0)) throw DomainError("pearson: constant input");
  return cov / std::sqrt(var_a * var_b);
}

std::pair<double, double> interval_90(const GaussianPrediction& pred) {
  if (!(pred.variance >= 0.0)) throw DomainError("interval_90: negative variance");
  const double half = kZ90 * std::sqrt(pred.variance);
  return {pred.mean - half, pred.mean + half};
}

EvalReport evaluate(const std::vector<GaussianPrediction>& preds,
                    const EmpiricalStats& emp) {
  if (preds.size() != emp.groups.size()) {
    throw ShapeError("evaluate: one prediction per group required");
  }
  if (emp.groups.size() < 2) throw DomainError("evaluate: need at least 2 groups");

  EvalReport report;
  Vector emp_means;
  Vector pred_means;
  Vector emp_intervals;
  Vector pred_intervals;
  for (std::size_t g = 0; g < emp.groups.size(); ++g) {
    const GroupStats& gs = emp.groups[g];
    ScatterRow row;
    row.emp_mean = gs.mean;
    row.pred_mean = preds[g].mean;
    row.emp_interval = gs.range();
    row.pred_interval = interval_90_width(preds[g]);
    row.degenerate = gs.degenerate();
    report.rows.push_back(row);

    emp_means.push_back(gs.mean);
    pred_means.push_back(preds[g].mean);
    if (!gs.degenerate()) {
      emp_intervals.push_back(row.emp_interval);
      pred_intervals.push_back(row.pred_interval);
    }
  }
  report.r_squared = r_squared(emp_means, pred_means);
  report.interval_correlation = pearson(emp_intervals, pred_intervals);
  report.mean_kl = score_predictions(preds, emp);
  return report;
}

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
  nlohmann::json j;
  j["r_squared"] = report.r_squared;
  j["interval_correlation"] = report.interval_correlation;
  j["mean_kl"] = report.mean_kl;
  j["group_count"] = report.rows.size();
  std::size_t degenerate = 0;
  for (const auto& r : report.rows) degenerate += r.degenerate ? 1 : 0;
  j["degenerate_group_count"] = degenerate;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("report: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

void write_scatter_csvs(const EvalReport& report,
                        const std::filesystem::path& mean_path,
                        const std::filesystem::path& interval_path) {
  std::ofstream means(mean_path, std::ios::binary);
  if (!means) throw IoError("scatter: cannot write " + mean_path.string());
  means << "emp_mean,pred_mean\n";
  for (const auto& r : report.rows) {
    means << format_double(r.emp_mean) << "," << format_double(r.pred_mean) << "\n";
  }
  std::ofstream intervals(interval_path, std::ios::binary);
  if (!intervals) throw IoError("scatter: cannot write " + interval_path.string());
  intervals << "emp_interval,pred_interval\n";
  for (const auto& r : report.rows) {
    if (r.degenerate) continue;
    intervals << format_double(r.emp_interval) << "," << format_double(r.pred_interval) << "\n";
  }
}

}  // namespace pnn
