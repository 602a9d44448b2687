#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "driftsel/datagen/stream.hpp"
#include "driftsel/model/mlp.hpp"

namespace driftsel {

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;  // positive-class F1 when c == 2, macro F1 otherwise
};

// Macro F1 averages over the classes that occur in either vector. A class
// with no true and no predicted members has F1 = 0.
Metrics score_predictions(std::span<const int> predicted, std::span<const int> truth,
                          std::size_t classes);

std::vector<int> predict_all(const MlpClassifier& model, std::span<const Sample> samples);
Metrics evaluate(const MlpClassifier& model, std::span<const Sample> samples);

}  // namespace driftsel
