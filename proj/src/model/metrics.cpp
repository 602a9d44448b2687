#include "driftsel/model/metrics.hpp"

#include <stdexcept>

namespace driftsel {

namespace {

double f1_for(std::size_t cls, std::span<const int> predicted, std::span<const int> truth) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = static_cast<std::size_t>(predicted[i]) == cls;
    const bool t = static_cast<std::size_t>(truth[i]) == cls;
    tp += (p && t) ? 1 : 0;
    fp += (p && !t) ? 1 : 0;
    fn += (!p && t) ? 1 : 0;
  }
  const std::size_t denom = 2 * tp + fp + fn;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

Metrics score_predictions(std::span<const int> predicted, std::span<const int> truth,
                          std::size_t classes) {
  if (truth.empty()) throw std::invalid_argument("evaluate: empty sample set");
  if (predicted.size() != truth.size()) throw std::invalid_argument("evaluate: length mismatch");
  if (classes < 2) throw std::invalid_argument("evaluate: need at least 2 classes");
  Metrics m;
  std::size_t correct = 0;
  std::vector<bool> seen(classes, false);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (int v : {predicted[i], truth[i]}) {
      if (v < 0 || static_cast<std::size_t>(v) >= classes) {
        throw std::invalid_argument("evaluate: class index out of range");
      }
      seen[static_cast<std::size_t>(v)] = true;
    }
    correct += predicted[i] == truth[i] ? 1 : 0;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  if (classes == 2) {
    m.f1 = f1_for(1, predicted, truth);
  } else {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t cls = 0; cls < classes; ++cls) {
      if (!seen[cls]) continue;
      sum += f1_for(cls, predicted, truth);
      ++n;
    }
    m.f1 = sum / static_cast<double>(n);
  }
  return m;
}

std::vector<int> predict_all(const MlpClassifier& model, std::span<const Sample> samples) {
  Workspace ws;
  std::vector<int> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(model.predict(s.features, ws));
  return out;
}

Metrics evaluate(const MlpClassifier& model, std::span<const Sample> samples) {
  if (samples.empty()) throw std::invalid_argument("evaluate: empty sample set");
  std::vector<int> truth;
  truth.reserve(samples.size());
  for (const Sample& s : samples) truth.push_back(s.label);
  return score_predictions(predict_all(model, samples), truth, model.classes());
}

}  // namespace driftsel
