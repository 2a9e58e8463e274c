#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pnn/dataset.hpp"
#include "pnn/train.hpp"

namespace pnn {

/// Moments of the replicate outputs observed at one unique input.
struct GroupStats {
  Vector input;
  double mean = 0.0;
  double variance = 0.0;  // unbiased, n-1 divisor
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;

  double range() const { return max - min; }
  /// Groups without a usable spread estimate are excluded from KL scoring.
  bool degenerate() const { return count < 2 || !(variance > 0.0); }
};

struct EmpiricalStats {
  std::vector<GroupStats> groups;

  std::size_t non_degenerate_count() const;
};

/// One GroupStats row per unique input, in group-key order.
EmpiricalStats group_replicates(const Dataset& dataset);

/// D_KL( N(emp_mean, emp_var) || N(pred_mean, pred_var) ), closed form.
double kl_gaussian(double emp_mean, double emp_var, double pred_mean, double pred_var);

/// Mean KL over non-degenerate groups given one prediction per group.
double score_predictions(const std::vector<GaussianPrediction>& preds,
                         const EmpiricalStats& emp);

/// Network predictions at each unique input, scored with score_predictions.
double score_model(const NetworkParameters& params, const Architecture& arch,
                   const EmpiricalStats& emp);

struct GridSpec {
  std::vector<std::size_t> depths;
  std::vector<std::size_t> widths;
  std::size_t seeds_per_cell = 1;

  void validate() const;
};

struct GridCell {
  std::size_t depth = 0;
  std::size_t width = 0;
  std::size_t seed_index = 0;
  double kl = 0.0;
  bool valid = false;
  double seconds = 0.0;
  NetworkParameters params;
};

struct GridResult {
  std::vector<GridCell> cells;          // depth-major, then width, then seed
  std::size_t best_depth = 0;           // argmin of per-(depth,width) mean KL
  std::size_t best_width = 0;
  double best_kl = 0.0;
  std::size_t best_cell_index = 0;      // best single run within the best cell
};

/// Trains and scores one model per (depth, width, seed). Diverging cells are
/// flagged invalid and the search continues. Ties break toward fewer
/// parameters, then lower depth, then lower width.
GridResult grid_search(const Dataset& train_set, const Dataset& test_set,
                       const GridSpec& spec, const TrainConfig& tc,
                       const OptimizerConfig& oc, const Rng& rng,
                       const Architecture& base_arch, std::size_t jobs = 0);

/// depth,width,seed,kl,status rows; timings go to a separate sidecar so the
/// grid file is byte-stable across runs.
void write_grid_csv(const GridResult& result, const std::filesystem::path& path);
void write_grid_timings_csv(const GridResult& result, const std::filesystem::path& path);

}  // namespace pnn
