#include "driftsel/model/trainer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "driftsel/kernels.hpp"

namespace driftsel {

std::string_view optimizer_name(OptimizerKind k) {
  return k == OptimizerKind::sgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "sgd") return OptimizerKind::sgd;
  if (name == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void validate(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw std::invalid_argument("train: learning_rate must be finite and > 0");
  }
  if (config.max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (config.patience < 1) throw std::invalid_argument("train: patience must be >= 1");
  if (config.hidden < 1) throw std::invalid_argument("train: hidden must be >= 1");
  if (config.optimizer == OptimizerKind::adam &&
      !(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0 &&
        config.epsilon > 0.0)) {
    throw std::invalid_argument("train: adam needs 0 <= beta < 1 and epsilon > 0");
  }
}

Optimizer::Optimizer(const TrainConfig& config, std::size_t parameter_count) : config_(config) {
  if (config.optimizer == OptimizerKind::adam) {
    m_.assign(parameter_count, 0.0);
    v_.assign(parameter_count, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != grad.size()) throw std::invalid_argument("optimizer: size mismatch");
  ++steps_;
  const auto& k = kernels::active();
  if (config_.optimizer == OptimizerKind::sgd) {
    k.axpy(-config_.learning_rate, grad.data(), params.data(), params.size());
    return;
  }
  const double t = static_cast<double>(steps_);
  const kernels::AdamCoefficients coeff{config_.learning_rate,
                                        config_.beta1,
                                        config_.beta2,
                                        config_.epsilon,
                                        1.0 - std::pow(config_.beta1, t),
                                        1.0 - std::pow(config_.beta2, t)};
  k.adam_update(params.data(), grad.data(), m_.data(), v_.data(), params.size(), coeff);
}

void sgd_step(MlpClassifier& model, std::span<const Sample* const> samples, Optimizer& optimizer) {
  thread_local Workspace ws;
  thread_local std::vector<double> grad;
  model.full_gradient(samples, grad, ws);
  optimizer.step(model.parameters(), grad);
}

void sgd_step(MlpClassifier& model, std::span<const Sample> samples, double learning_rate) {
  TrainConfig config;
  config.optimizer = OptimizerKind::sgd;
  config.learning_rate = learning_rate;
  Optimizer optimizer(config, model.parameters().size());
  std::vector<const Sample*> pointers;
  for (const Sample& s : samples) pointers.push_back(&s);
  sgd_step(model, std::span<const Sample* const>(pointers), optimizer);
}

TrainResult train_loop(MlpClassifier& model, std::span<const Sample> validation,
                       const TrainConfig& config, const BatchProvider& provider) {
  validate(config);
  if (validation.empty()) throw std::invalid_argument("train: empty validation set");
  Optimizer optimizer(config, model.parameters().size());
  Rng rng(derive_seed(config.seed, 0x5eed0001));

  TrainResult result;
  result.best_validation_loss = std::numeric_limits<double>::infinity();
  std::vector<double> best = std::vector<double>(model.parameters().begin(), model.parameters().end());
  std::size_t waited = 0;
  std::vector<const Sample*> pointers;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<const Batch*> batches = provider(epoch, model);
    if (batches.empty()) throw std::invalid_argument("train: no training batches for epoch");
    shuffle(batches, rng);
    for (const Batch* batch : batches) {
      if (batch->samples.empty()) continue;
      pointers.clear();
      for (const Sample& s : batch->samples) pointers.push_back(&s);
      sgd_step(model, std::span<const Sample* const>(pointers), optimizer);
    }
    const double loss = model.mean_loss(validation);
    if (!std::isfinite(loss)) throw DivergenceError("non-finite validation loss");
    result.validation_loss.push_back(loss);
    result.epochs_run = epoch;
    if (loss < result.best_validation_loss) {
      result.best_validation_loss = loss;
      result.best_epoch = epoch;
      best.assign(model.parameters().begin(), model.parameters().end());
      waited = 0;
    } else if (++waited >= config.patience) {
      break;
    }
  }
  std::copy(best.begin(), best.end(), model.parameters().begin());
  return result;
}

TrainResult train(MlpClassifier& model, const std::vector<const Batch*>& batches,
                  std::span<const Sample> validation, const TrainConfig& config) {
  if (batches.empty()) throw std::invalid_argument("train: no training batches");
  return train_loop(model, validation, config,
                    [&](std::size_t, const MlpClassifier&) { return batches; });
}

MlpClassifier make_model(std::size_t d, std::size_t c, const TrainConfig& config) {
  Rng rng(derive_seed(config.seed, 0x1417));
  return MlpClassifier::initialized(d, config.hidden, c, rng);
}

}  // namespace driftsel
