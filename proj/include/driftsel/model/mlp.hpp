#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "driftsel/datagen/stream.hpp"
#include "driftsel/random.hpp"

namespace driftsel {

// Last-layer gradient: [dL/db (c values), then dL/dw with entry j*hidden + m
// holding dL/dw_{m,j} for hidden unit m and class j].
struct GradientVector {
  std::size_t classes = 0;
  std::size_t hidden = 0;
  std::vector<double> values;

  GradientVector() = default;
  GradientVector(std::size_t c, std::size_t h) : classes(c), hidden(h), values(c + c * h, 0.0) {}

  std::span<const double> bias() const { return {values.data(), classes}; }
  std::span<const double> weights() const { return {values.data() + classes, classes * hidden}; }
  double weight(std::size_t m, std::size_t j) const { return values[classes + j * hidden + m]; }
  std::size_t size() const { return values.size(); }
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scratch space for one forward/backward pass; reuse it across calls.
struct Workspace {
  std::vector<double> hidden;  // X' after activation
  std::vector<double> logits;
  std::vector<double> probs;
  std::vector<double> residual;     // probs - onehot
  std::vector<double> hidden_grad;  // dL/d(pre-activation)
};

// One hidden ReLU layer, softmax output. Parameters live in one flat buffer:
// W1 (d rows of h), b1 (h), w (c rows of h), b (c).
class MlpClassifier {
 public:
  MlpClassifier() = default;
  MlpClassifier(std::size_t d, std::size_t hidden, std::size_t c);

  // He-uniform W1, Xavier-uniform w, zero biases.
  static MlpClassifier initialized(std::size_t d, std::size_t hidden, std::size_t c, Rng& rng);

  std::size_t input_dim() const { return d_; }
  std::size_t hidden_dim() const { return h_; }
  std::size_t classes() const { return c_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  // W1 row i holds the weights from input i to every hidden unit.
  double* W1() { return params_.data(); }
  double* b1() { return W1() + d_ * h_; }
  double* w() { return b1() + h_; }  // row j: class j's weights over hidden units
  double* b() { return w() + c_ * h_; }
  const double* W1() const { return params_.data(); }
  const double* b1() const { return W1() + d_ * h_; }
  const double* w() const { return b1() + h_; }
  const double* b() const { return w() + c_ * h_; }

  // Fills ws.hidden, ws.logits and ws.probs.
  void forward(std::span<const double> x, Workspace& ws) const;
  int predict(std::span<const double> x, Workspace& ws) const;

  // Cross-entropy of one sample, from the logits (log-sum-exp).
  double sample_loss(const Sample& s, Workspace& ws) const;
  double mean_loss(std::span<const Sample> samples) const;

  GradientVector last_layer_gradient(const Sample& s) const;
  GradientVector mean_gradient(std::span<const Sample> samples) const;
  // Mean over several sample groups taken together, in order.
  GradientVector mean_gradient(std::span<const Sample* const> samples) const;

  // Backpropagated gradient of the mean loss over `samples`, laid out like
  // parameters(). Throws DivergenceError if anything is non-finite.
  void full_gradient(std::span<const Sample* const> samples, std::vector<double>& grad,
                     Workspace& ws) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static MlpClassifier load(std::istream& in);
  static MlpClassifier load(const std::filesystem::path& path);

  bool operator==(const MlpClassifier&) const = default;

 private:
  void check_input(std::span<const double> x) const;
  void check_label(int label) const;

  std::size_t d_ = 0;
  std::size_t h_ = 0;
  std::size_t c_ = 0;
  std::vector<double> params_;
};

// Numerically stable softmax. Outputs are clamped into (0, 1) so extreme
// logits never produce exact zeros or ones.
void softmax(std::span<const double> z, std::span<double> out);

// -sum_j y_j log(yhat_j) for a one-hot y; throws std::invalid_argument when y
// is not one-hot or the lengths differ.
double cross_entropy(std::span<const double> y, std::span<const double> yhat);

}  // namespace driftsel
