#include "driftsel/datagen/generators.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "driftsel/random.hpp"

namespace driftsel {

namespace {

void require(bool ok, const StreamSpec& spec, const std::string& what) {
  if (!ok) {
    throw std::invalid_argument(std::string(generator_name(spec.generator)) + ": " + what);
  }
}

// Per-generator stream tags keep e.g. SEA and Sine draws unrelated for equal seeds.
Rng make_rng(const StreamSpec& spec) {
  return Rng(derive_seed(spec.seed, static_cast<std::uint64_t>(spec.generator) + 101));
}

std::vector<double> uniform_point(Rng& rng, std::size_t d, double lo, double hi) {
  std::vector<double> x(d);
  for (auto& v : x) v = uniform(rng, lo, hi);
  return x;
}

}  // namespace

int sea_label(const std::vector<double>& x, double theta) { return x[0] + x[1] <= theta ? 1 : 0; }

int sine_label(const std::vector<double>& x, bool reversed) {
  const bool below = x[1] < std::sin(2.0 * std::numbers::pi * x[0]) * 0.5 + 0.5;
  return (below != reversed) ? 1 : 0;
}

int covcon_label(const std::vector<double>& x, const CovconConcept& rule) {
  const double boundary = rule.alpha * std::sin(std::numbers::pi * x[0]);
  const bool hit = rule.greater ? boundary > x[1] : boundary < x[1];
  return hit ? 1 : 0;
}

CovconConcept covcon_concept(const StreamSpec& spec, std::size_t segment) {
  const std::size_t age = spec.num_segments - 1 - segment;
  if (age % 2 == 0) return {spec.params.covcon_alpha_same, true};
  return {spec.params.covcon_alpha_other, false};
}

SegmentedStream gen_sea(const StreamSpec& spec) {
  validate_spec(spec);
  require(spec.generator == Generator::sea, spec, "wrong generator");
  require(spec.d == 3 && spec.c == 2, spec, "needs d = 3, c = 2");
  require(!spec.params.sea_thresholds.empty(), spec, "empty threshold schedule");
  Rng rng = make_rng(spec);
  std::vector<Sample> samples;
  samples.reserve(spec.used_size());
  const auto& thetas = spec.params.sea_thresholds;
  for (std::size_t i = 0; i < spec.used_size(); ++i) {
    const double theta = thetas[(i / spec.segment_size()) % thetas.size()];
    Sample s{uniform_point(rng, 3, 0.0, 10.0), 0};
    s.label = sea_label(s.features, theta);
    samples.push_back(std::move(s));
  }
  return segment_samples(spec, std::move(samples));
}

SegmentedStream gen_sine(const StreamSpec& spec) {
  validate_spec(spec);
  require(spec.generator == Generator::sine, spec, "wrong generator");
  require(spec.d >= 2 && spec.c == 2, spec, "needs d >= 2, c = 2");
  Rng rng = make_rng(spec);
  std::vector<Sample> samples;
  samples.reserve(spec.used_size());
  for (std::size_t i = 0; i < spec.used_size(); ++i) {
    const bool reversed = (i / spec.segment_size()) % 2 == 1;
    Sample s{uniform_point(rng, spec.d, 0.0, 1.0), 0};
    s.label = sine_label(s.features, reversed);
    samples.push_back(std::move(s));
  }
  return segment_samples(spec, std::move(samples));
}

SegmentedStream gen_random_rbf(const StreamSpec& spec) {
  validate_spec(spec);
  require(spec.generator == Generator::random_rbf, spec, "wrong generator");
  const auto& p = spec.params;
  require(p.rbf_centroids >= 1, spec, "needs at least one centroid");
  require(p.rbf_sigma >= 0.0, spec, "negative sigma");
  require(p.rbf_flip_fraction >= 0.0 && p.rbf_flip_fraction <= 1.0, spec,
          "flip fraction outside [0, 1]");
  Rng rng = make_rng(spec);
  const std::size_t k = p.rbf_centroids;

  std::vector<std::vector<double>> centers(k);
  std::vector<int> labels(k);
  std::vector<double> cumulative(k);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    centers[j] = uniform_point(rng, spec.d, 0.0, 1.0);
    labels[j] = static_cast<int>(uniform_index(rng, spec.c));
    total += uniform01(rng);
    cumulative[j] = total;
  }

  const auto flips = static_cast<std::size_t>(std::llround(p.rbf_flip_fraction * static_cast<double>(k)));
  std::vector<std::size_t> ids(k);
  std::iota(ids.begin(), ids.end(), std::size_t{0});

  std::vector<Sample> samples;
  samples.reserve(spec.used_size());
  for (std::size_t i = 0; i < spec.used_size(); ++i) {
    if (i > 0 && i % spec.segment_size() == 0) {
      shuffle(ids, rng);
      for (std::size_t j = 0; j < flips; ++j) {
        int& label = labels[ids[j]];
        label = static_cast<int>((static_cast<std::size_t>(label) + 1 +
                                  uniform_index(rng, spec.c - 1)) % spec.c);
      }
    }
    const double pick = uniform01(rng) * total;
    std::size_t j = 0;
    while (j + 1 < k && cumulative[j] <= pick) ++j;
    Sample s{centers[j], labels[j]};
    if (p.rbf_sigma > 0.0) {
      for (auto& v : s.features) v += p.rbf_sigma * standard_normal(rng);
    }
    samples.push_back(std::move(s));
  }
  return segment_samples(spec, std::move(samples));
}

SegmentedStream gen_hyperplane(const StreamSpec& spec) {
  validate_spec(spec);
  require(spec.generator == Generator::hyperplane, spec, "wrong generator");
  require(spec.d >= 2 && spec.c == 2, spec, "needs d >= 2, c = 2");
  const auto& p = spec.params;
  require(p.hyperplane_step_every >= 1, spec, "step interval must be positive");
  Rng rng = make_rng(spec);
  std::vector<double> w(spec.d, 1.0);
  double direction = 1.0;

  std::vector<Sample> samples;
  samples.reserve(spec.used_size());
  for (std::size_t i = 0; i < spec.used_size(); ++i) {
    Sample s{uniform_point(rng, spec.d, 0.0, 1.0), 0};
    double score = 0.0;
    double threshold = 0.0;
    for (std::size_t j = 0; j < spec.d; ++j) {
      score += w[j] * s.features[j];
      threshold += w[j];
    }
    s.label = score > threshold / 2.0 ? 1 : 0;
    samples.push_back(std::move(s));

    if ((i + 1) % p.hyperplane_step_every == 0) {
      if (bernoulli(rng, p.hyperplane_flip_probability)) direction = -direction;
      w[0] += p.hyperplane_drift * direction;
      w[1] += p.hyperplane_drift * direction;
    }
  }
  return segment_samples(spec, std::move(samples));
}

SegmentedStream gen_covcon(const StreamSpec& spec) {
  validate_spec(spec);
  require(spec.generator == Generator::covcon, spec, "wrong generator");
  require(spec.d == 2 && spec.c == 2, spec, "needs d = 2, c = 2");
  const auto& p = spec.params;
  require(p.covcon_band_lo >= 0.0 && p.covcon_band_lo < p.covcon_band_hi && p.covcon_band_hi <= 1.0,
          spec, "band must satisfy 0 <= lo < hi <= 1");
  require(p.covcon_current_window > 0.0 && p.covcon_current_slide >= 0.0 &&
              p.covcon_current_window + p.covcon_current_slide <= 1.0,
          spec, "current window must stay inside [0, 1]");
  Rng rng = make_rng(spec);
  const std::size_t seg_size = spec.segment_size();
  const std::size_t current = spec.num_segments - 1;

  std::vector<Sample> samples;
  samples.reserve(spec.used_size());
  for (std::size_t i = 0; i < spec.used_size(); ++i) {
    const std::size_t segment = i / seg_size;
    const CovconConcept rule = covcon_concept(spec, segment);
    double lo = 0.0;
    double width = 1.0;
    if (segment == current) {
      const double progress = static_cast<double>(i % seg_size) / static_cast<double>(seg_size);
      lo = p.covcon_current_slide * progress;
      width = p.covcon_current_window;
    } else if (!rule.greater) {
      lo = p.covcon_band_lo;
      width = p.covcon_band_hi - p.covcon_band_lo;
    }
    Sample s{{lo + width * uniform01(rng), uniform01(rng)}, 0};
    s.label = covcon_label(s.features, rule);
    samples.push_back(std::move(s));
  }
  return segment_samples(spec, std::move(samples));
}

SegmentedStream generate(const StreamSpec& spec) {
  switch (spec.generator) {
    case Generator::sea:
      return gen_sea(spec);
    case Generator::sine:
      return gen_sine(spec);
    case Generator::random_rbf:
      return gen_random_rbf(spec);
    case Generator::hyperplane:
      return gen_hyperplane(spec);
    case Generator::covcon:
      return gen_covcon(spec);
    case Generator::csv:
      break;
  }
  throw std::invalid_argument("CSV streams are loaded with load_csv, not generated");
}

}  // namespace driftsel
