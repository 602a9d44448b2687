#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftsel/datagen/stream.hpp"
#include "driftsel/forest/forest_index.hpp"
#include "driftsel/model/mlp.hpp"
#include "driftsel/model/trainer.hpp"

namespace driftsel {

// 20 evenly spaced midpoints in (0, 2): 0.05, 0.15, ..., 1.95.
std::vector<double> default_threshold_grid();

struct SelectionConfig {
  double disparity_threshold = 1.0;
  // Empty: use disparity_threshold as is. Otherwise tune over these values.
  std::vector<double> threshold_grid;
  TrainConfig train;
  ForestConfig forest;

  // Ablation switches. Without the segment filter every previous segment is
  // in S; without the ranking filter every batch of S is trained on.
  bool segment_filter = true;
  bool ranking_filter = true;
  // Caps data_used at this fraction by keeping only the most frequently
  // top-ranked historical batches. 1.0 disables the cap.
  double budget_fraction = 1.0;
};

struct SegmentScore {
  std::uint32_t segment_id = 0;
  double gain = 0.0;
  double disparity = 0.0;
  bool selected = false;
};

struct EpochTrace {
  std::size_t epoch = 0;
  std::vector<SegmentScore> scores;  // previous segments, when the segment filter is on
  std::vector<std::uint32_t> selected_segments;  // includes the current segment
  std::vector<std::uint64_t> best_batches;       // ascending batch id
  std::size_t fallbacks = 0;  // validation samples whose ranking missed S
  double validation_loss = 0.0;
};

struct SelectionOutcome {
  std::vector<std::uint32_t> selected_segments;
  std::vector<std::uint64_t> best_batches;
  double data_used_fraction = 0.0;
  double disparity_threshold = 0.0;
  MlpClassifier model;
  TrainResult training;
  std::vector<EpochTrace> trace;
  double rf_time_s = 0.0;
  double model_time_s = 0.0;
};

struct SegmentSelection {
  std::vector<std::uint32_t> selected;  // previous segments passing the test, then the current one
  std::vector<SegmentScore> scores;
};

// Scores every previous segment against the validation mean gradient; a
// segment joins S iff gain > 0 and disparity < threshold. The current
// segment always joins.
SegmentSelection select_segments(const MlpClassifier& model, std::span<const Segment> previous,
                                 const Segment& current_train, std::span<const Sample> validation,
                                 double disparity_threshold);

// Walk each validation sample's ranking and keep the first batch whose segment
// is in S. `segment_of` maps index batch positions to segment ids. Samples
// whose ranking never meets S pull in `fallback` instead. Result is
// deduplicated in first-insertion order.
struct BestBatches {
  std::vector<std::uint64_t> batches;
  std::size_t fallbacks = 0;
};

BestBatches select_best_batches(const std::vector<std::vector<std::uint32_t>>& rankings,
                                const RandomForestIndex& index,
                                std::span<const std::uint32_t> segment_of,
                                std::span<const std::uint32_t> selected_segments,
                                std::span<const std::uint64_t> fallback);

BestBatches select_best_batches(std::span<const Sample> validation, const RandomForestIndex& index,
                                std::span<const std::uint32_t> segment_of,
                                std::span<const std::uint32_t> selected_segments,
                                std::span<const std::uint64_t> fallback);

// Every training batch of the problem, previous segments first, in batch id
// order, with the owning segment of each.
struct BatchCatalog {
  std::vector<const Batch*> batches;
  std::vector<std::uint32_t> segment_of;
};
BatchCatalog catalog_batches(const Problem& problem);

// Algorithm-2 training. When `forest` is null and the ranking filter is on,
// a forest is trained over every batch first.
SelectionOutcome run_selection_training(const Problem& problem, const SelectionConfig& config,
                                        const RandomForestIndex* forest = nullptr);

// Runs run_selection_training for each grid value and returns the one with
// the best validation accuracy; ties go to the smaller threshold.
double tune_disparity_threshold(const Problem& problem, const SelectionConfig& config,
                                const RandomForestIndex* forest = nullptr);

// (current training samples + historical samples in best_batches) /
// (all previous samples + current training samples)
double compute_data_used(std::span<const std::uint64_t> best_batches, const Problem& problem);

// Checks the per-epoch trace: strict selection rule, current segment in S,
// best batches drawn from S. Returns a description of the first violation.
std::optional<std::string> verify_trace(const SelectionOutcome& outcome, const Problem& problem,
                                        const SelectionConfig& config);

// One JSON object per line per epoch.
void write_trace(std::ostream& out, const SelectionOutcome& outcome);

}  // namespace driftsel
