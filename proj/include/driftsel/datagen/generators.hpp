#pragma once

#include <cstddef>

#include "driftsel/datagen/stream.hpp"

namespace driftsel {

SegmentedStream gen_sea(const StreamSpec& spec);
SegmentedStream gen_sine(const StreamSpec& spec);
SegmentedStream gen_random_rbf(const StreamSpec& spec);
SegmentedStream gen_hyperplane(const StreamSpec& spec);
SegmentedStream gen_covcon(const StreamSpec& spec);

// Dispatches on spec.generator. CSV specs are rejected here; use load_csv.
SegmentedStream generate(const StreamSpec& spec);

// Label rules, exposed so callers can re-derive labels from features.
int sea_label(const std::vector<double>& x, double theta);
int sine_label(const std::vector<double>& x, bool reversed);

struct CovconConcept {
  double alpha = 1.0;
  bool greater = true;  // label 1 iff alpha*sin(pi*x0) > x1, else iff <
};

CovconConcept covcon_concept(const StreamSpec& spec, std::size_t segment);
int covcon_label(const std::vector<double>& x, const CovconConcept& rule);

}  // namespace driftsel
