#pragma once

// Stream hierarchy: a stream is split into segments (one concept each), each
// segment into fixed-size batches of labelled samples.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace driftsel {

struct Sample {
  std::vector<double> features;
  int label = 0;

  bool operator==(const Sample&) const = default;
};

struct Batch {
  std::uint64_t batch_id = 0;
  std::vector<Sample> samples;

  bool operator==(const Batch&) const = default;
};

struct Segment {
  std::uint32_t segment_id = 0;
  std::vector<Batch> batches;

  std::size_t sample_count() const;
  bool operator==(const Segment&) const = default;
};

enum class Generator { sea, random_rbf, sine, hyperplane, covcon, csv };

std::string_view generator_name(Generator g);
Generator parse_generator(std::string_view name);

// Knobs for the synthetic generators. Defaults give the shipped streams.
struct GeneratorParams {
  // SEA: label 1 iff x0 + x1 <= theta, theta cycling over segments.
  std::vector<double> sea_thresholds{8.0, 9.0, 7.0, 9.5};

  // RandomRBF
  std::size_t rbf_centroids = 50;
  double rbf_sigma = 0.1;
  double rbf_flip_fraction = 0.3;

  // Hyperplane: two drifting weights, stepped every `hyperplane_step_every` samples.
  double hyperplane_drift = 0.1;
  double hyperplane_flip_probability = 0.1;
  std::size_t hyperplane_step_every = 1000;

  // Covcon: concepts recur by segment age. Segments an even number of segments
  // before the current one share its concept (alpha_same, ">") and draw x0 from
  // [0, 1]; the others use the reversed inequality with alpha_other and draw x0
  // from the band [band_lo, band_hi]. Inside the current segment the x0 window
  // has width current_window and its left edge slides linearly from 0 to
  // current_slide over the segment.
  double covcon_alpha_same = 1.0;
  double covcon_alpha_other = 1.0;
  double covcon_band_lo = 0.3;
  double covcon_band_hi = 0.7;
  double covcon_current_window = 1.0;
  double covcon_current_slide = 0.0;

  bool operator==(const GeneratorParams&) const = default;
};

struct StreamSpec {
  Generator generator = Generator::sea;
  std::size_t total_size = 0;
  std::size_t d = 0;
  std::size_t c = 2;
  std::size_t num_segments = 0;
  std::size_t batches_per_segment = 0;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  GeneratorParams params;

  std::size_t segment_size() const { return batches_per_segment * batch_size; }
  std::size_t used_size() const { return num_segments * segment_size(); }
  bool operator==(const StreamSpec&) const = default;
};

struct SegmentedStream {
  StreamSpec spec;
  std::vector<Segment> segments;
  std::size_t current = 0;

  const Segment& current_segment() const { return segments.at(current); }
};

// Dataset shapes as published for the benchmark suite (size, features,
// classes, segments, batches per segment, batch size).
StreamSpec table1_spec(std::string_view dataset);
std::vector<std::string> table1_datasets();

// Throws std::invalid_argument on an inconsistent spec. With `strict`, the
// shape must also equal the published row for `dataset`.
void validate_spec(const StreamSpec& spec);
void validate_spec_strict(const StreamSpec& spec, std::string_view dataset);

// Cuts a flat, time-ordered sample list into the spec's segments and batches.
// Batch ids run 0, 1, 2, ... in time order. Extra trailing samples are dropped.
SegmentedStream segment_samples(const StreamSpec& spec, std::vector<Sample> samples);

// Chronological three-way split of the current segment.
struct SplitRatios {
  double train = 0.6;
  double validation = 0.2;
  double test = 0.2;
};

struct CurrentSplit {
  std::vector<Batch> train;  // re-batched at spec.batch_size
  std::vector<Sample> validation;
  std::vector<Sample> test;
};

CurrentSplit split_current_segment(const SegmentedStream& stream, SplitRatios ratios = {});

// Everything the training methods see: history, the current training split
// (as one segment), validation and held-out test data.
struct Problem {
  std::vector<Segment> previous;
  Segment current_train;
  std::vector<Sample> validation;
  std::vector<Sample> test;
  std::size_t d = 0;
  std::size_t c = 2;

  std::size_t training_sample_count() const;
  std::size_t batch_count() const;
};

Problem make_problem(const SegmentedStream& stream, SplitRatios ratios = {});

}  // namespace driftsel
