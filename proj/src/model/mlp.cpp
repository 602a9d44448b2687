#include "driftsel/model/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "driftsel/binary_io.hpp"
#include "driftsel/kernels.hpp"

namespace driftsel {

namespace {

constexpr double kMinProb = std::numeric_limits<double>::min();
constexpr double kMaxProb = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;

double log_sum_exp(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - top);
  return top + std::log(sum);
}

void prepare(Workspace& ws, std::size_t h, std::size_t c) {
  ws.hidden.resize(h);
  ws.hidden_grad.resize(h);
  ws.logits.resize(c);
  ws.probs.resize(c);
  ws.residual.resize(c);
}

}  // namespace

void softmax(std::span<const double> z, std::span<double> out) {
  const double top = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    out[j] = std::exp(z[j] - top);
    sum += out[j];
  }
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = std::clamp(out[j] / sum, kMinProb, kMaxProb);
}

double cross_entropy(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) throw std::invalid_argument("cross_entropy: length mismatch");
  std::size_t hot = y.size();
  for (std::size_t j = 0; j < y.size(); ++j) {
    if (y[j] == 1.0 && hot == y.size()) {
      hot = j;
    } else if (y[j] != 0.0) {
      throw std::invalid_argument("cross_entropy: target is not one-hot");
    }
  }
  if (hot == y.size()) throw std::invalid_argument("cross_entropy: target is not one-hot");
  return -std::log(yhat[hot]);
}

MlpClassifier::MlpClassifier(std::size_t d, std::size_t hidden, std::size_t c)
    : d_(d), h_(hidden), c_(c), params_(d * hidden + hidden + c * hidden + c, 0.0) {
  if (d == 0 || hidden == 0 || c < 2) {
    throw std::invalid_argument("mlp needs d >= 1, hidden >= 1, c >= 2");
  }
}

MlpClassifier MlpClassifier::initialized(std::size_t d, std::size_t hidden, std::size_t c,
                                         Rng& rng) {
  MlpClassifier m(d, hidden, c);
  const double he = std::sqrt(6.0 / static_cast<double>(d));
  for (std::size_t i = 0; i < d * hidden; ++i) m.W1()[i] = uniform(rng, -he, he);
  const double xavier = std::sqrt(6.0 / static_cast<double>(hidden + c));
  for (std::size_t i = 0; i < c * hidden; ++i) m.w()[i] = uniform(rng, -xavier, xavier);
  return m;
}

void MlpClassifier::check_input(std::span<const double> x) const {
  if (x.size() != d_) {
    throw std::invalid_argument("mlp input has " + std::to_string(x.size()) +
                                " features, model expects " + std::to_string(d_));
  }
}

void MlpClassifier::check_label(int label) const {
  if (label < 0 || static_cast<std::size_t>(label) >= c_) {
    throw std::invalid_argument("label " + std::to_string(label) + " outside [0, " +
                                std::to_string(c_) + ")");
  }
}

void MlpClassifier::forward(std::span<const double> x, Workspace& ws) const {
  check_input(x);
  prepare(ws, h_, c_);
  const auto& k = kernels::active();
  std::copy(b1(), b1() + h_, ws.hidden.begin());
  for (std::size_t i = 0; i < d_; ++i) k.axpy(x[i], W1() + i * h_, ws.hidden.data(), h_);
  k.relu(ws.hidden.data(), h_);
  for (std::size_t j = 0; j < c_; ++j) {
    ws.logits[j] = k.dot(w() + j * h_, ws.hidden.data(), h_) + b()[j];
  }
  softmax(ws.logits, ws.probs);
}

int MlpClassifier::predict(std::span<const double> x, Workspace& ws) const {
  forward(x, ws);
  return static_cast<int>(std::max_element(ws.logits.begin(), ws.logits.end()) - ws.logits.begin());
}

double MlpClassifier::sample_loss(const Sample& s, Workspace& ws) const {
  check_label(s.label);
  forward(s.features, ws);
  return log_sum_exp(ws.logits) - ws.logits[static_cast<std::size_t>(s.label)];
}

double MlpClassifier::mean_loss(std::span<const Sample> samples) const {
  if (samples.empty()) throw std::invalid_argument("mean_loss: empty sample set");
  Workspace ws;
  double total = 0.0;
  for (const Sample& s : samples) total += sample_loss(s, ws);
  return total / static_cast<double>(samples.size());
}

GradientVector MlpClassifier::last_layer_gradient(const Sample& s) const {
  const Sample* p = &s;
  return mean_gradient(std::span<const Sample* const>(&p, 1));
}

GradientVector MlpClassifier::mean_gradient(std::span<const Sample> samples) const {
  std::vector<const Sample*> pointers;
  pointers.reserve(samples.size());
  for (const Sample& s : samples) pointers.push_back(&s);
  return mean_gradient(std::span<const Sample* const>(pointers));
}

GradientVector MlpClassifier::mean_gradient(std::span<const Sample* const> samples) const {
  if (samples.empty()) throw std::invalid_argument("mean_gradient: empty sample set");
  const auto& k = kernels::active();
  GradientVector g(c_, h_);
  Workspace ws;
  for (const Sample* s : samples) {
    check_label(s->label);
    forward(s->features, ws);
    for (std::size_t j = 0; j < c_; ++j) {
      const double r = ws.probs[j] - (static_cast<std::size_t>(s->label) == j ? 1.0 : 0.0);
      g.values[j] += r;
      k.axpy(r, ws.hidden.data(), g.values.data() + c_ + j * h_, h_);
    }
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double& v : g.values) v *= inv;
  return g;
}

void MlpClassifier::full_gradient(std::span<const Sample* const> samples,
                                  std::vector<double>& grad, Workspace& ws) const {
  if (samples.empty()) throw std::invalid_argument("full_gradient: empty sample set");
  const auto& k = kernels::active();
  grad.assign(params_.size(), 0.0);
  double* gW1 = grad.data();
  double* gb1 = gW1 + d_ * h_;
  double* gw = gb1 + h_;
  double* gb = gw + c_ * h_;
  for (const Sample* s : samples) {
    check_label(s->label);
    forward(s->features, ws);
    std::fill(ws.hidden_grad.begin(), ws.hidden_grad.end(), 0.0);
    for (std::size_t j = 0; j < c_; ++j) {
      const double r = ws.probs[j] - (static_cast<std::size_t>(s->label) == j ? 1.0 : 0.0);
      gb[j] += r;
      k.axpy(r, ws.hidden.data(), gw + j * h_, h_);
      k.axpy(r, w() + j * h_, ws.hidden_grad.data(), h_);
    }
    k.relu_backward(ws.hidden.data(), ws.hidden_grad.data(), h_);
    k.axpy(1.0, ws.hidden_grad.data(), gb1, h_);
    for (std::size_t i = 0; i < d_; ++i) {
      k.axpy(s->features[i], ws.hidden_grad.data(), gW1 + i * h_, h_);
    }
  }
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (double& v : grad) {
    v *= inv;
    if (!std::isfinite(v)) throw DivergenceError("non-finite gradient during training");
  }
}

namespace {
constexpr char kMagic[5] = "DSMC";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void MlpClassifier::save(std::ostream& out) const {
  io::put_header(out, kMagic, kVersion);
  io::put<std::uint64_t>(out, d_);
  io::put<std::uint64_t>(out, h_);
  io::put<std::uint64_t>(out, c_);
  io::put_vector(out, params_);
}

void MlpClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

MlpClassifier MlpClassifier::load(std::istream& in) {
  io::check_header(in, kMagic, kVersion);
  const auto d = io::get<std::uint64_t>(in);
  const auto h = io::get<std::uint64_t>(in);
  const auto c = io::get<std::uint64_t>(in);
  if (d == 0 || h == 0 || c < 2 || d > (1u << 24) || h > (1u << 24) || c > (1u << 24)) {
    throw io::FormatError("implausible model shape in checkpoint");
  }
  MlpClassifier m(d, h, c);
  auto params = io::get_vector<double>(in);
  if (params.size() != m.params_.size()) throw io::FormatError("checkpoint parameter count mismatch");
  m.params_ = std::move(params);
  return m;
}

MlpClassifier MlpClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load(in);
}

}  // namespace driftsel
