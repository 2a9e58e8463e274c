#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pnn/linalg.hpp"
#include "pnn/rng.hpp"

namespace pnn {

enum class Activation { Elu };

/// Feed-forward trunk of `depth` hidden layers of uniform `width`, ending in a
/// 2-unit probabilistic layer (raw mean, raw variance).
struct Architecture {
  std::size_t input_dim = 1;
  std::size_t depth = 1;
  std::size_t width = 1;
  Activation hidden_activation = Activation::Elu;
  double variance_floor = 1e-6;

  void validate() const;
  std::size_t layer_count() const { return depth + 1; }
  std::size_t parameter_count() const;
};

/// Weights and biases for every layer; the output layer has exactly 2 rows.
struct NetworkParameters {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

struct GaussianPrediction {
  double mean = 0.0;
  double variance = 0.0;
};

inline double elu(double z) { return z > 0.0 ? z : std::expm1(z); }
inline double elu_derivative(double z) { return z > 0.0 ? 1.0 : std::exp(z); }

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 30.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}
inline double softplus_derivative(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Glorot-uniform weights, zero biases.
NetworkParameters init_parameters(const Architecture& arch, Rng& rng);

/// Zero-valued parameters of the right shapes (gradient / optimizer buffers).
NetworkParameters zeros_like(const Architecture& arch);

GaussianPrediction forward(const NetworkParameters& params, const Architecture& arch,
                           const Vector& x);

/// Per-layer activations and pre-activations kept for backpropagation.
struct ForwardTrace {
  std::vector<Vector> activations;  // a^(0) = x, ..., a^(L)
  std::vector<Vector> preacts;      // z^(1), ..., z^(L+1)
  GaussianPrediction prediction;
};

ForwardTrace forward_trace(const NetworkParameters& params, const Architecture& arch,
                           const Vector& x);

struct OutputGradient {
  double d_mean = 0.0;
  double d_variance = 0.0;
};

/// Exact reverse-mode gradients of upstream.d_mean * mean + upstream.d_variance
/// * variance with respect to every weight and bias, accumulated into `grads`.
void backward_accumulate(const NetworkParameters& params, const Architecture& arch,
                         const ForwardTrace& trace, const OutputGradient& upstream,
                         NetworkParameters& grads);

NetworkParameters backward(const NetworkParameters& params, const Architecture& arch,
                           const Vector& x, const OutputGradient& upstream);

/// Versioned JSON checkpoint (architecture, row-major weights, biases, seed).
struct Checkpoint {
  Architecture arch;
  NetworkParameters params;
  std::uint64_t seed = 0;
  bool standardized = false;
  Vector standardize_means;
  Vector standardize_stds;
};

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pnn
