#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "pnn/linalg.hpp"

namespace pnn {

enum class Provenance { Cubic, Ishigami, Csv };

/// Replicated-input regression dataset. Rows sharing a group key carry
/// bit-identical input vectors and replicate the same unique input.
struct Dataset {
  Matrix inputs;                        // n x D
  Vector outputs;                       // n
  std::vector<std::size_t> group_keys;  // n, dense ids starting at 0
  Provenance provenance = Provenance::Csv;

  std::size_t size() const { return outputs.size(); }
  std::size_t input_dim() const { return inputs.cols(); }
  std::size_t group_count() const;
};

struct CubicSpec {
  std::size_t n_unique = 100;
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
  // inputs uniform on [-1, 1]; noise std 0.1*(2+x)
};

struct IshigamiSpec {
  double a = 7.0;
  double b = 0.1;
  std::size_t n_unique = 300;
  std::size_t replicates = 10;
  std::uint64_t seed = 0;
  // inputs uniform on [-pi, pi]^3; noise variance 0.2*|f(x)|
};

/// y = x^3 + 0.1*(2+x)*eps with eps ~ N(0,1).
Dataset gen_cubic(const CubicSpec& spec);

double ishigami(double x1, double x2, double x3, double a = 7.0, double b = 0.1);

/// y = f(x) + eps with eps ~ N(0, 0.2*|f(x)|); zero noise variance is legal
/// when f(x) == 0 (the group is emitted with exact outputs).
Dataset gen_ishigami(const IshigamiSpec& spec);

enum class GroupMode { Exact, Column };

/// Loads a replicated-input CSV with header `x1,...,xD,y[,group]`. With
/// GroupMode::Exact rows are grouped by bitwise equality of the parsed input
/// tuple; with GroupMode::Column the trailing `group` column is used.
Dataset load_csv(const std::filesystem::path& path, GroupMode mode = GroupMode::Exact);

/// Writes the CSV schema above with 17 significant digits (round-trip exact).
void write_csv(const Dataset& ds, const std::filesystem::path& path,
               bool include_group_column = true);

/// Group-level split: every replicate of a unique input lands on one side.
/// Test side receives max(1, floor(group_count * test_fraction)) groups.
std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed);

/// Per-column z-score parameters for ingested data.
struct Standardizer {
  Vector means;
  Vector stds;  // columns with zero spread keep std 1
};

Standardizer fit_standardizer(const Dataset& ds);
Dataset apply_standardizer(const Standardizer& st, const Dataset& ds);

}  // namespace pnn
