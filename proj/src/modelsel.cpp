#include "pnn/modelsel.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "pnn/csv.hpp"
#include "pnn/errors.hpp"
#include "pnn/parallel.hpp"

namespace pnn {

std::size_t EmpiricalStats::non_degenerate_count() const {
  std::size_t count = 0;
  for (const auto& g : groups) {
    if (!g.degenerate()) ++count;
  }
  return count;
}

EmpiricalStats group_replicates(const Dataset& dataset) {
  if (dataset.size() == 0) throw DomainError("group_replicates: empty dataset");
  const std::size_t n_groups = dataset.group_count();
  EmpiricalStats stats;
  stats.groups.resize(n_groups);

  std::vector<bool> seen(n_groups, false);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::size_t g = dataset.group_keys[i];
    GroupStats& gs = stats.groups[g];
    const double y = dataset.outputs[i];
    if (!seen[g]) {
      seen[g] = true;
      gs.input = dataset.inputs.row(i);
      gs.min = gs.max = y;
    } else {
      gs.min = std::min(gs.min, y);
      gs.max = std::max(gs.max, y);
    }
    gs.mean += y;
    gs.count += 1;
  }
  for (auto& gs : stats.groups) gs.mean /= static_cast<double>(gs.count);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    GroupStats& gs = stats.groups[dataset.group_keys[i]];
    const double d = dataset.outputs[i] - gs.mean;
    gs.variance += d * d;
  }
  for (auto& gs : stats.groups) {
    gs.variance = gs.count >= 2 ? gs.variance / static_cast<double>(gs.count - 1) : 0.0;
  }
  return stats;
}

double kl_gaussian(double emp_mean, double emp_var, double pred_mean, double pred_var) {
  if (!(emp_var > 0.0) || !(pred_var > 0.0)) {
    throw DomainError("kl_gaussian: variances must be positive");
  }
  const double d = emp_mean - pred_mean;
  return 0.5 * std::log(pred_var / emp_var) + (emp_var + d * d) / (2.0 * pred_var) - 0.5;
}

double score_predictions(const std::vector<GaussianPrediction>& preds,
                         const EmpiricalStats& emp) {
  if (preds.size() != emp.groups.size()) {
    throw ShapeError("score_predictions: one prediction per group required");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t g = 0; g < emp.groups.size(); ++g) {
    const GroupStats& gs = emp.groups[g];
    if (gs.degenerate()) continue;
    acc += kl_gaussian(gs.mean, gs.variance, preds[g].mean, preds[g].variance);
    ++count;
  }
  if (count == 0) throw DomainError("score_predictions: all groups are degenerate");
  return acc / static_cast<double>(count);
}

double score_model(const NetworkParameters& params, const Architecture& arch,
                   const EmpiricalStats& emp) {
  std::vector<GaussianPrediction> preds;
  preds.reserve(emp.groups.size());
  for (const auto& g : emp.groups) preds.push_back(forward(params, arch, g.input));
  return score_predictions(preds, emp);
}

void GridSpec::validate() const {
  if (depths.empty() || widths.empty()) throw DomainError("grid: empty depth/width list");
  if (seeds_per_cell < 1) throw DomainError("grid: seeds_per_cell must be >= 1");
  for (auto d : depths) {
    if (d < 1) throw DomainError("grid: depths must be >= 1");
  }
  for (auto w : widths) {
    if (w < 1) throw DomainError("grid: widths must be >= 1");
  }
}

GridResult grid_search(const Dataset& train_set, const Dataset& test_set,
                       const GridSpec& spec, const TrainConfig& tc,
                       const OptimizerConfig& oc, const Rng& rng,
                       const Architecture& base_arch, std::size_t jobs) {
  spec.validate();
  const EmpiricalStats emp = group_replicates(test_set);

  GridResult result;
  const std::size_t n_cells =
      spec.depths.size() * spec.widths.size() * spec.seeds_per_cell;
  result.cells.resize(n_cells);

  parallel_for(n_cells, jobs, [&](std::size_t idx) {
    const std::size_t seed_index = idx % spec.seeds_per_cell;
    const std::size_t wi = (idx / spec.seeds_per_cell) % spec.widths.size();
    const std::size_t di = idx / (spec.seeds_per_cell * spec.widths.size());

    GridCell& cell = result.cells[idx];
    cell.depth = spec.depths[di];
    cell.width = spec.widths[wi];
    cell.seed_index = seed_index;

    Architecture arch = base_arch;
    arch.input_dim = train_set.input_dim();
    arch.depth = cell.depth;
    arch.width = cell.width;

    const auto t0 = std::chrono::steady_clock::now();
    try {
      FitResult fitted = fit(train_set, arch, tc, oc, rng.split(idx));
      const double kl = score_model(fitted.params, arch, emp);
      if (std::isfinite(kl)) {
        cell.kl = kl;
        cell.valid = true;
        cell.params = std::move(fitted.params);
      }
    } catch (const TrainingError&) {
      // diverged; cell stays invalid and the search continues
    }
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  // per-(depth,width) mean KL over seeds, then argmin with deterministic ties
  bool found = false;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t best_param_count = 0;
  for (std::size_t di = 0; di < spec.depths.size(); ++di) {
    for (std::size_t wi = 0; wi < spec.widths.size(); ++wi) {
      double acc = 0.0;
      std::size_t valid = 0;
      for (std::size_t s = 0; s < spec.seeds_per_cell; ++s) {
        const GridCell& cell =
            result.cells[(di * spec.widths.size() + wi) * spec.seeds_per_cell + s];
        if (cell.valid) {
          acc += cell.kl;
          ++valid;
        }
      }
      if (valid == 0) continue;
      const double score = acc / static_cast<double>(valid);
      Architecture arch = base_arch;
      arch.input_dim = train_set.input_dim();
      arch.depth = spec.depths[di];
      arch.width = spec.widths[wi];
      const std::size_t params = arch.parameter_count();
      const bool better =
          !found || score < best_score ||
          (score == best_score &&
           (params < best_param_count ||
            (params == best_param_count &&
             (spec.depths[di] < result.best_depth ||
              (spec.depths[di] == result.best_depth && spec.widths[wi] < result.best_width)))));
      if (better) {
        found = true;
        best_score = score;
        best_param_count = params;
        result.best_depth = spec.depths[di];
        result.best_width = spec.widths[wi];
        result.best_kl = score;
      }
    }
  }
  if (!found) throw TrainingError("grid_search: every cell diverged");

  // best single run within the winning cell
  double best_run = std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < n_cells; ++idx) {
    const GridCell& cell = result.cells[idx];
    if (cell.valid && cell.depth == result.best_depth && cell.width == result.best_width &&
        cell.kl < best_run) {
      best_run = cell.kl;
      result.best_cell_index = idx;
    }
  }
  return result;
}

void write_grid_csv(const GridResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("grid: cannot write " + path.string());
  out << "depth,width,seed,kl,status\n";
  for (const auto& cell : result.cells) {
    out << cell.depth << "," << cell.width << "," << cell.seed_index << ","
        << (cell.valid ? format_double(cell.kl) : "nan") << ","
        << (cell.valid ? "ok" : "diverged") << "\n";
  }
}

void write_grid_timings_csv(const GridResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("grid: cannot write " + path.string());
  out << "depth,width,seed,seconds\n";
  for (const auto& cell : result.cells) {
    out << cell.depth << "," << cell.width << "," << cell.seed_index << ","
        << format_double(cell.seconds) << "\n";
  }
}

}  // namespace pnn
