#include "pnn/train.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "pnn/csv.hpp"
#include "pnn/errors.hpp"

namespace pnn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DomainError("optimizer: learning_rate must be > 0");
  if (!(decay > 0.0 && decay < 1.0)) throw DomainError("optimizer: decay must be in (0, 1)");
  if (!(epsilon > 0.0)) throw DomainError("optimizer: epsilon must be > 0");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw DomainError("train: batch_size must be >= 1");
  if (epochs < 1) throw DomainError("train: epochs must be >= 1");
}

double nll(const GaussianPrediction& pred, double y) {
  if (!(pred.variance > 0.0)) throw DomainError("nll: variance must be positive");
  const double r = y - pred.mean;
  return 0.5 * std::log(2.0 * std::numbers::pi * pred.variance) +
         r * r / (2.0 * pred.variance);
}

std::pair<double, double> nll_grad(const GaussianPrediction& pred, double y) {
  if (!(pred.variance > 0.0)) throw DomainError("nll_grad: variance must be positive");
  const double r = y - pred.mean;
  const double d_mean = -r / pred.variance;
  const double d_var = (pred.variance - r * r) / (2.0 * pred.variance * pred.variance);
  return {d_mean, d_var};
}

double mse_loss(std::span<const double> predicted_means, std::span<const double> ys) {
  if (predicted_means.size() != ys.size()) throw ShapeError("mse_loss: length mismatch");
  if (ys.empty()) throw DomainError("mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double r = predicted_means[i] - ys[i];
    acc += r * r;
  }
  return acc / static_cast<double>(ys.size());
}

void rmsprop_step(OptimizerState& state, NetworkParameters& params,
                  const NetworkParameters& grads, const OptimizerConfig& cfg) {
  if (state.s.weights.size() != params.weights.size() ||
      grads.weights.size() != params.weights.size()) {
    throw ShapeError("rmsprop_step: layer count mismatch");
  }
  auto update = [&](Vector& s, Vector& theta, const Vector& g) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      s[i] = cfg.decay * s[i] + (1.0 - cfg.decay) * g[i] * g[i];
      theta[i] -= cfg.learning_rate * g[i] / std::sqrt(s[i] + cfg.epsilon);
    }
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(state.s.weights[l].data(), params.weights[l].data(), grads.weights[l].data());
    update(state.s.biases[l], params.biases[l], grads.biases[l]);
  }
}

namespace {

void scale_params(NetworkParameters& p, double factor) {
  for (auto& w : p.weights) {
    for (auto& e : w.data()) e *= factor;
  }
  for (auto& b : p.biases) {
    for (auto& e : b) e *= factor;
  }
}

}  // namespace

FitResult fit(const Dataset& dataset, const Architecture& arch, const TrainConfig& tc,
              const OptimizerConfig& oc, const Rng& rng) {
  arch.validate();
  tc.validate();
  oc.validate();
  const std::size_t n = dataset.size();
  if (n == 0) throw DomainError("fit: empty dataset");
  if (dataset.input_dim() != arch.input_dim) {
    throw ShapeError("fit: dataset input_dim " + std::to_string(dataset.input_dim()) +
                     " disagrees with architecture " + std::to_string(arch.input_dim));
  }

  Rng init_rng = rng.split(0);
  NetworkParameters params = init_parameters(arch, init_rng);
  OptimizerState state{zeros_like(arch)};
  NetworkParameters grads = zeros_like(arch);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  FitResult result;
  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    Rng shuffle_rng = rng.split(1 + epoch);
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = shuffle_rng.next_u64() % (i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_loss_sum = 0.0;
    std::size_t step = 0;
    for (std::size_t start = 0; start < n; start += tc.batch_size, ++step) {
      const std::size_t end = std::min(start + tc.batch_size, n);
      const double inv_batch = 1.0 / static_cast<double>(end - start);

      for (auto& w : grads.weights) std::fill(w.data().begin(), w.data().end(), 0.0);
      for (auto& b : grads.biases) std::fill(b.begin(), b.end(), 0.0);

      double batch_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t row = order[k];
        const Vector x = dataset.inputs.row(row);
        const double y = dataset.outputs[row];
        const ForwardTrace trace = forward_trace(params, arch, x);
        // a diverged network can drive the variance head to NaN, which the
        // loss rejects as a domain error; report it as a training failure
        if (!std::isfinite(trace.prediction.mean) ||
            !std::isfinite(trace.prediction.variance)) {
          throw TrainingError("fit: non-finite loss at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(step));
        }
        OutputGradient upstream;
        if (tc.loss == LossKind::HeteroscedasticNll) {
          batch_loss += nll(trace.prediction, y);
          const auto [d_mean, d_var] = nll_grad(trace.prediction, y);
          upstream = {d_mean, d_var};
        } else {
          const double r = trace.prediction.mean - y;
          batch_loss += r * r;
          upstream = {2.0 * r, 0.0};
        }
        backward_accumulate(params, arch, trace, upstream, grads);
      }
      batch_loss *= inv_batch;
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("fit: non-finite loss at epoch " + std::to_string(epoch) +
                            ", step " + std::to_string(step));
      }
      scale_params(grads, inv_batch);
      rmsprop_step(state, params, grads, oc);
      epoch_loss_sum += batch_loss * static_cast<double>(end - start);
    }
    result.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(n));
  }
  result.params = std::move(params);
  return result;
}

void write_loss_history_csv(const std::vector<double>& epoch_loss,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("loss history: cannot write " + path.string());
  out << "epoch,mean_train_nll\n";
  for (std::size_t e = 0; e < epoch_loss.size(); ++e) {
    out << e << "," << format_double(epoch_loss[e]) << "\n";
  }
}

}  // namespace pnn
