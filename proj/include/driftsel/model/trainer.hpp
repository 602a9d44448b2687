#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "driftsel/datagen/stream.hpp"
#include "driftsel/model/mlp.hpp"

namespace driftsel {

enum class OptimizerKind { sgd, adam };

std::string_view optimizer_name(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t max_epochs = 2000;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  std::size_t hidden = 256;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const TrainConfig&) const = default;
};

// Throws std::invalid_argument on a bad config.
void validate(const TrainConfig& config);

// Plain gradient descent or Adam over a model's flat parameter buffer.
class Optimizer {
 public:
  Optimizer(const TrainConfig& config, std::size_t parameter_count);
  void step(std::span<double> params, std::span<const double> grad);
  std::uint64_t steps() const { return steps_; }

 private:
  TrainConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

// One update on the mean full-network gradient over `samples`.
void sgd_step(MlpClassifier& model, std::span<const Sample* const> samples, Optimizer& optimizer);
void sgd_step(MlpClassifier& model, std::span<const Sample> samples, double learning_rate);

// Supplies the batches for one epoch given the model as it stands before the
// epoch's updates. Epochs count from 1.
using BatchProvider =
    std::function<std::vector<const Batch*>(std::size_t epoch, const MlpClassifier& model)>;

struct TrainResult {
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double best_validation_loss = 0.0;
  std::vector<double> validation_loss;  // one per epoch
};

// Epoch loop: each epoch asks `provider` for batches, shuffles their order,
// steps once per batch, then scores the validation set. Stops after
// `patience` epochs without strict improvement or at max_epochs, and leaves
// the best snapshot in `model`.
TrainResult train_loop(MlpClassifier& model, std::span<const Sample> validation,
                       const TrainConfig& config, const BatchProvider& provider);

// Fixed batch list every epoch.
TrainResult train(MlpClassifier& model, const std::vector<const Batch*>& batches,
                  std::span<const Sample> validation, const TrainConfig& config);

// Fresh model for `problem` seeded from config.seed.
MlpClassifier make_model(std::size_t d, std::size_t c, const TrainConfig& config);

}  // namespace driftsel
