#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pnn/dataset.hpp"
#include "pnn/net.hpp"

namespace pnn {

struct OptimizerConfig {
  double learning_rate = 0.001;
  double decay = 0.9;
  double epsilon = 1e-7;

  void validate() const;
};

/// Per-parameter moving average of squared gradients.
struct OptimizerState {
  NetworkParameters s;
};

enum class LossKind { HeteroscedasticNll, Mse };

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  LossKind loss = LossKind::HeteroscedasticNll;

  void validate() const;
};

/// Gaussian negative log-likelihood of one observation:
///   0.5*log(2*pi*var) + (y - mean)^2 / (2*var)
double nll(const GaussianPrediction& pred, double y);

/// (d/d mean, d/d variance) of nll.
std::pair<double, double> nll_grad(const GaussianPrediction& pred, double y);

/// Mean squared residual of the mean head.
double mse_loss(std::span<const double> predicted_means, std::span<const double> ys);

/// s <- decay*s + (1-decay)*g^2;  theta <- theta - lr * g / sqrt(s + eps)
void rmsprop_step(OptimizerState& state, NetworkParameters& params,
                  const NetworkParameters& grads, const OptimizerConfig& cfg);

struct FitResult {
  NetworkParameters params;
  std::vector<double> epoch_loss;  // mean per-pair training loss per epoch
};

/// Mini-batch RMSProp over shuffled epochs. The per-batch loss is the mean of
/// per-pair losses; the final partial batch is kept. Throws TrainingError with
/// the epoch/step if the loss goes non-finite.
FitResult fit(const Dataset& dataset, const Architecture& arch, const TrainConfig& tc,
              const OptimizerConfig& oc, const Rng& rng);

void write_loss_history_csv(const std::vector<double>& epoch_loss,
                            const std::filesystem::path& path);

}  // namespace pnn
