#include "pnn/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pnn/csv.hpp"
#include "pnn/rng.hpp"

namespace pnn {

std::size_t Dataset::group_count() const {
  if (group_keys.empty()) return 0;
  return *std::max_element(group_keys.begin(), group_keys.end()) + 1;
}

Dataset gen_cubic(const CubicSpec& spec) {
  if (spec.n_unique < 1 || spec.replicates < 1) {
    throw DomainError("gen_cubic: n_unique and replicates must be >= 1");
  }
  Rng rng(spec.seed);
  Rng input_rng = rng.split(0);
  Rng noise_rng = rng.split(1);

  const std::size_t n = spec.n_unique * spec.replicates;
  Dataset ds;
  ds.inputs = Matrix(n, 1);
  ds.outputs.resize(n);
  ds.group_keys.resize(n);
  ds.provenance = Provenance::Cubic;

  std::size_t row = 0;
  for (std::size_t g = 0; g < spec.n_unique; ++g) {
    const double x = input_rng.uniform(-1.0, 1.0);
    for (std::size_t r = 0; r < spec.replicates; ++r, ++row) {
      const double eps = noise_rng.normal();
      ds.inputs(row, 0) = x;
      ds.outputs[row] = x * x * x + 0.1 * (2.0 + x) * eps;
      ds.group_keys[row] = g;
    }
  }
  return ds;
}

double ishigami(double x1, double x2, double x3, double a, double b) {
  const double s2 = std::sin(x2);
  return std::sin(x1) + a * s2 * s2 + b * x3 * x3 * x3 * x3 * std::sin(x1);
}

Dataset gen_ishigami(const IshigamiSpec& spec) {
  if (spec.n_unique < 1 || spec.replicates < 1) {
    throw DomainError("gen_ishigami: n_unique and replicates must be >= 1");
  }
  Rng rng(spec.seed);
  Rng input_rng = rng.split(0);
  Rng noise_rng = rng.split(1);

  const std::size_t n = spec.n_unique * spec.replicates;
  Dataset ds;
  ds.inputs = Matrix(n, 3);
  ds.outputs.resize(n);
  ds.group_keys.resize(n);
  ds.provenance = Provenance::Ishigami;

  constexpr double pi = std::numbers::pi;
  std::size_t row = 0;
  for (std::size_t g = 0; g < spec.n_unique; ++g) {
    const double x1 = input_rng.uniform(-pi, pi);
    const double x2 = input_rng.uniform(-pi, pi);
    const double x3 = input_rng.uniform(-pi, pi);
    const double f = ishigami(x1, x2, x3, spec.a, spec.b);
    const double noise_std = std::sqrt(0.2 * std::fabs(f));
    for (std::size_t r = 0; r < spec.replicates; ++r, ++row) {
      ds.inputs(row, 0) = x1;
      ds.inputs(row, 1) = x2;
      ds.inputs(row, 2) = x3;
      ds.outputs[row] = f + noise_std * noise_rng.normal();
      ds.group_keys[row] = g;
    }
  }
  return ds;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_field(const std::string& s, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("csv: cannot parse '" + s + "' as a number on line " +
                  std::to_string(line_no));
  }
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, GroupMode mode) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty file " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_line(line);
  const bool has_group = !header.empty() && header.back() == "group";
  const std::size_t dim = header.size() - 1 - (has_group ? 1 : 0);
  if (dim < 1 || header[dim] != "y") {
    throw IoError("csv: header must be x1,...,xD,y[,group] in " + path.string());
  }
  if (mode == GroupMode::Column && !has_group) {
    throw IoError("csv: group column requested but absent in " + path.string());
  }

  std::vector<Vector> rows;
  Vector outputs;
  std::vector<std::size_t> explicit_groups;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_line(line);
    if (fields.size() != header.size()) {
      throw IoError("csv: ragged row on line " + std::to_string(line_no) + " (" +
                    std::to_string(fields.size()) + " fields, expected " +
                    std::to_string(header.size()) + ")");
    }
    Vector x(dim);
    for (std::size_t j = 0; j < dim; ++j) x[j] = parse_field(fields[j], line_no);
    rows.push_back(std::move(x));
    outputs.push_back(parse_field(fields[dim], line_no));
    if (has_group) {
      explicit_groups.push_back(
          static_cast<std::size_t>(parse_field(fields[dim + 1], line_no)));
    }
  }
  if (rows.empty()) throw IoError("csv: no data rows in " + path.string());

  Dataset ds;
  ds.provenance = Provenance::Csv;
  ds.inputs = Matrix(rows.size(), dim);
  ds.outputs = std::move(outputs);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) ds.inputs(i, j) = rows[i][j];
  }

  if (mode == GroupMode::Column) {
    // renumber to dense ids in first-appearance order
    std::map<std::size_t, std::size_t> remap;
    ds.group_keys.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto [it, inserted] = remap.try_emplace(explicit_groups[i], remap.size());
      ds.group_keys[i] = it->second;
    }
  } else {
    // bitwise-exact input equality
    std::map<std::vector<std::uint64_t>, std::size_t> seen;
    ds.group_keys.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<std::uint64_t> key(dim);
      for (std::size_t j = 0; j < dim; ++j) key[j] = std::bit_cast<std::uint64_t>(ds.inputs(i, j));
      auto [it, inserted] = seen.try_emplace(std::move(key), seen.size());
      ds.group_keys[i] = it->second;
    }
  }
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path,
               bool include_group_column) {
  std::ofstream out(path, std::ios::binary);  // LF endings on every platform
  if (!out) throw IoError("csv: cannot write " + path.string());
  const std::size_t dim = ds.input_dim();
  for (std::size_t j = 0; j < dim; ++j) out << "x" << (j + 1) << ",";
  out << "y";
  if (include_group_column) out << ",group";
  out << "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) out << format_double(ds.inputs(i, j)) << ",";
    out << format_double(ds.outputs[i]);
    if (include_group_column) out << "," << ds.group_keys[i];
    out << "\n";
  }
  if (!out) throw IoError("csv: write failed for " + path.string());
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction,
                                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("split: test_fraction must be in (0, 1)");
  }
  const std::size_t n_groups = ds.group_count();
  if (n_groups < 2) throw DomainError("split: need at least 2 groups");

  std::vector<std::size_t> order(n_groups);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n_groups - 1; i > 0; --i) {
    const std::size_t j = rng.next_u64() % (i + 1);
    std::swap(order[i], order[j]);
  }
  const std::size_t n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(static_cast<double>(n_groups) * test_fraction)));

  std::vector<bool> is_test(n_groups, false);
  for (std::size_t i = 0; i < n_test; ++i) is_test[order[i]] = true;

  auto gather = [&](bool want_test) {
    Dataset out;
    out.provenance = ds.provenance;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (is_test[ds.group_keys[i]] == want_test) rows.push_back(i);
    }
    out.inputs = Matrix(rows.size(), ds.input_dim());
    out.outputs.resize(rows.size());
    out.group_keys.resize(rows.size());
    std::map<std::size_t, std::size_t> remap;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t i = rows[r];
      for (std::size_t j = 0; j < ds.input_dim(); ++j) out.inputs(r, j) = ds.inputs(i, j);
      out.outputs[r] = ds.outputs[i];
      auto [it, inserted] = remap.try_emplace(ds.group_keys[i], remap.size());
      out.group_keys[r] = it->second;
    }
    return out;
  };
  return {gather(false), gather(true)};
}

Standardizer fit_standardizer(const Dataset& ds) {
  const std::size_t dim = ds.input_dim();
  const std::size_t n = ds.size();
  if (n == 0) throw DomainError("fit_standardizer: empty dataset");
  Standardizer st;
  st.means.assign(dim, 0.0);
  st.stds.assign(dim, 1.0);
  for (std::size_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ds.inputs(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = ds.inputs(i, j) - mean;
      ss += d * d;
    }
    const double std_dev = std::sqrt(ss / static_cast<double>(n));
    st.means[j] = mean;
    if (std_dev > 0.0) st.stds[j] = std_dev;
  }
  return st;
}

Dataset apply_standardizer(const Standardizer& st, const Dataset& ds) {
  if (st.means.size() != ds.input_dim()) {
    throw ShapeError("apply_standardizer: dimension mismatch");
  }
  Dataset out = ds;
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = 0; j < out.input_dim(); ++j) {
      out.inputs(i, j) = (out.inputs(i, j) - st.means[j]) / st.stds[j];
    }
  }
  return out;
}

}  // namespace pnn
