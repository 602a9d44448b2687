#pragma once

#include <cmath>
#include <vector>

#include "driftsel/datagen/generators.hpp"
#include "driftsel/datagen/stream.hpp"
#include "driftsel/random.hpp"

namespace testing {

inline std::vector<double> random_vector(driftsel::Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = driftsel::uniform(rng, lo, hi);
  return v;
}

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Small labelled samples in [0,1]^d with labels from a linear rule.
inline std::vector<driftsel::Sample> random_samples(driftsel::Rng& rng, std::size_t n,
                                                    std::size_t d, std::size_t c = 2) {
  std::vector<driftsel::Sample> out(n);
  for (auto& s : out) {
    s.features = random_vector(rng, d, 0.0, 1.0);
    s.label = static_cast<int>(driftsel::uniform_index(rng, c));
  }
  return out;
}

// A scaled-down stream of one of the shipped generators.
inline driftsel::StreamSpec small_spec(driftsel::Generator g, std::size_t segments,
                                       std::size_t batches, std::size_t batch_size,
                                       std::uint64_t seed, std::size_t d) {
  driftsel::StreamSpec spec;
  spec.generator = g;
  spec.d = d;
  spec.c = 2;
  spec.num_segments = segments;
  spec.batches_per_segment = batches;
  spec.batch_size = batch_size;
  spec.total_size = segments * batches * batch_size;
  spec.seed = seed;
  return spec;
}

}  // namespace testing
