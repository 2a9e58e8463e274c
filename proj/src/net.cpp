#include "pnn/net.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "pnn/errors.hpp"

namespace pnn {

void Architecture::validate() const {
  if (input_dim < 1) throw DomainError("architecture: input_dim must be >= 1");
  if (depth < 1) throw DomainError("architecture: depth must be >= 1");
  if (width < 1) throw DomainError("architecture: width must be >= 1");
  if (!(variance_floor > 0.0)) throw DomainError("architecture: variance_floor must be > 0");
}

std::size_t Architecture::parameter_count() const {
  std::size_t count = 0;
  std::size_t fan_in = input_dim;
  for (std::size_t l = 0; l < depth; ++l) {
    count += width * fan_in + width;
    fan_in = width;
  }
  count += 2 * fan_in + 2;
  return count;
}

namespace {

std::size_t layer_rows(const Architecture& arch, std::size_t layer) {
  return layer == arch.depth ? 2 : arch.width;
}

std::size_t layer_cols(const Architecture& arch, std::size_t layer) {
  return layer == 0 ? arch.input_dim : arch.width;
}

}  // namespace

NetworkParameters init_parameters(const Architecture& arch, Rng& rng) {
  arch.validate();
  NetworkParameters p;
  for (std::size_t l = 0; l <= arch.depth; ++l) {
    const std::size_t rows = layer_rows(arch, l);
    const std::size_t cols = layer_cols(arch, l);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix w(rows, cols);
    for (auto& e : w.data()) e = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(rows, 0.0);
  }
  return p;
}

NetworkParameters zeros_like(const Architecture& arch) {
  NetworkParameters p;
  for (std::size_t l = 0; l <= arch.depth; ++l) {
    p.weights.emplace_back(layer_rows(arch, l), layer_cols(arch, l));
    p.biases.emplace_back(layer_rows(arch, l), 0.0);
  }
  return p;
}

ForwardTrace forward_trace(const NetworkParameters& params, const Architecture& arch,
                           const Vector& x) {
  if (x.size() != arch.input_dim) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) +
                     " entries, architecture expects " + std::to_string(arch.input_dim));
  }
  if (params.weights.size() != arch.depth + 1 || params.biases.size() != arch.depth + 1) {
    throw ShapeError("forward: parameter layer count disagrees with architecture");
  }
  ForwardTrace trace;
  trace.activations.push_back(x);
  Vector a = x;
  for (std::size_t l = 0; l <= arch.depth; ++l) {
    Vector z = matvec(params.weights[l], a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += params.biases[l][i];
    trace.preacts.push_back(z);
    if (l < arch.depth) {
      for (auto& v : z) v = elu(v);
      trace.activations.push_back(z);
      a = std::move(z);
    } else {
      trace.prediction.mean = z[0];
      trace.prediction.variance = softplus(z[1]) + arch.variance_floor;
    }
  }
  return trace;
}

GaussianPrediction forward(const NetworkParameters& params, const Architecture& arch,
                           const Vector& x) {
  return forward_trace(params, arch, x).prediction;
}

void backward_accumulate(const NetworkParameters& params, const Architecture& arch,
                         const ForwardTrace& trace, const OutputGradient& upstream,
                         NetworkParameters& grads) {
  // delta at the probabilistic layer: mean head is identity, variance head
  // goes through softplus (the additive floor has zero derivative)
  Vector delta = {upstream.d_mean,
                  upstream.d_variance * softplus_derivative(trace.preacts[arch.depth][1])};
  for (std::size_t li = arch.depth + 1; li-- > 0;) {
    const Vector& a_prev = trace.activations[li];
    Matrix& gw = grads.weights[li];
    Vector& gb = grads.biases[li];
    for (std::size_t i = 0; i < delta.size(); ++i) {
      gb[i] += delta[i];
      for (std::size_t j = 0; j < a_prev.size(); ++j) gw(i, j) += delta[i] * a_prev[j];
    }
    if (li == 0) break;
    const Vector& z_prev = trace.preacts[li - 1];
    Vector next(a_prev.size(), 0.0);
    for (std::size_t j = 0; j < a_prev.size(); ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < delta.size(); ++i) acc += params.weights[li](i, j) * delta[i];
      next[j] = acc * elu_derivative(z_prev[j]);
    }
    delta = std::move(next);
  }
}

NetworkParameters backward(const NetworkParameters& params, const Architecture& arch,
                           const Vector& x, const OutputGradient& upstream) {
  NetworkParameters grads = zeros_like(arch);
  backward_accumulate(params, arch, forward_trace(params, arch, x), upstream, grads);
  return grads;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  nlohmann::json j;
  j["format"] = "pnn-checkpoint";
  j["version"] = 1;
  j["architecture"] = {{"input_dim", ck.arch.input_dim},
                       {"depth", ck.arch.depth},
                       {"width", ck.arch.width},
                       {"hidden_activation", "elu"},
                       {"variance_floor", ck.arch.variance_floor}};
  j["seed"] = ck.seed;
  nlohmann::json weights = nlohmann::json::array();
  nlohmann::json biases = nlohmann::json::array();
  for (std::size_t l = 0; l < ck.params.weights.size(); ++l) {
    const Matrix& w = ck.params.weights[l];
    weights.push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"data", w.data()}});
    biases.push_back(ck.params.biases[l]);
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  if (ck.standardized) {
    j["standardize"] = {{"means", ck.standardize_means}, {"stds", ck.standardize_stds}};
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("checkpoint: cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("checkpoint: invalid JSON in " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "pnn-checkpoint") {
    throw IoError("checkpoint: unrecognized format in " + path.string());
  }
  Checkpoint ck;
  const auto& a = j.at("architecture");
  ck.arch.input_dim = a.at("input_dim").get<std::size_t>();
  ck.arch.depth = a.at("depth").get<std::size_t>();
  ck.arch.width = a.at("width").get<std::size_t>();
  ck.arch.variance_floor = a.at("variance_floor").get<double>();
  ck.seed = j.value("seed", std::uint64_t{0});
  for (const auto& wj : j.at("weights")) {
    Matrix w(wj.at("rows").get<std::size_t>(), wj.at("cols").get<std::size_t>());
    w.data() = wj.at("data").get<std::vector<double>>();
    if (w.data().size() != w.rows() * w.cols()) {
      throw IoError("checkpoint: weight entry count disagrees with shape");
    }
    ck.params.weights.push_back(std::move(w));
  }
  for (const auto& bj : j.at("biases")) ck.params.biases.push_back(bj.get<Vector>());
  if (j.contains("standardize")) {
    ck.standardized = true;
    ck.standardize_means = j["standardize"].at("means").get<Vector>();
    ck.standardize_stds = j["standardize"].at("stds").get<Vector>();
  }
  return ck;
}

}  // namespace pnn
