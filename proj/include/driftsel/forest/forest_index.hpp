#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "driftsel/datagen/stream.hpp"
#include "driftsel/forest/decision_tree.hpp"

namespace driftsel {

struct ForestConfig {
  std::size_t n_estimators = 50;
  std::size_t max_depth = 20;
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // 0: ceil(sqrt(d))
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: hardware concurrency

  bool operator==(const ForestConfig&) const = default;
};

// S[t] = #{t' != t : counts[t] > counts[t']} for one leaf.
std::vector<std::uint32_t> dominance_scores(std::span<const std::uint32_t> counts);

// One leaf's nonzero batch counts, sorted by batch index, with their scores.
// Batches absent from the row have count 0 and score 0.
struct LeafRow {
  std::vector<std::uint32_t> batch;  // index into RandomForestIndex::batch_ids()
  std::vector<std::uint32_t> count;
  std::vector<std::uint32_t> score;

  bool operator==(const LeafRow&) const = default;
};

// Builds a LeafRow from sparse counts over `batch_count` batches.
LeafRow make_leaf_row(std::vector<std::pair<std::uint32_t, std::uint32_t>> counts,
                      std::size_t batch_count);

struct BatchRanking {
  std::vector<std::uint64_t> order;            // batch ids, most similar first
  std::vector<std::uint64_t> aggregate_score;  // aligned with RandomForestIndex::batch_ids()
};

class RandomForestIndex {
 public:
  RandomForestIndex() = default;

  // Assembles an index from trees and dense per-tree leaf counts
  // (counts[tree][leaf][batch]).
  static RandomForestIndex from_counts(
      std::vector<DecisionTree> trees, std::vector<std::uint64_t> batch_ids,
      const std::vector<std::vector<std::vector<std::uint32_t>>>& counts);

  // Batch positions (not ids), most similar first. Cheaper than rank().
  std::vector<std::uint32_t> rank_positions(std::span<const double> query) const;
  BatchRanking rank(std::span<const double> query) const;

  std::size_t tree_count() const { return trees_.size(); }
  std::size_t batch_count() const { return batch_ids_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::uint64_t>& batch_ids() const { return batch_ids_; }
  const DecisionTree& tree(std::size_t i) const { return trees_.at(i); }
  const LeafRow& leaf_row(std::size_t tree, std::size_t leaf) const { return rows_.at(tree).at(leaf); }

  // Dense views of N and S for one (tree, leaf).
  std::vector<std::uint32_t> counts(std::size_t tree, std::size_t leaf) const;
  std::vector<std::uint32_t> scores(std::size_t tree, std::size_t leaf) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static RandomForestIndex load(std::istream& in);
  static RandomForestIndex load(const std::filesystem::path& path);

  bool operator==(const RandomForestIndex&) const = default;

 private:
  friend RandomForestIndex train_forest(std::span<const Batch* const>, const ForestConfig&);

  std::size_t dimension_ = 0;
  std::vector<DecisionTree> trees_;
  std::vector<std::uint64_t> batch_ids_;
  std::vector<std::vector<LeafRow>> rows_;  // [tree][leaf]
};

// Trains on bootstrap resamples, then routes every original sample through
// every tree to fill the leaf/batch tables. Throws std::invalid_argument on
// an empty batch list or inconsistent feature dimension.
RandomForestIndex train_forest(std::span<const Batch* const> batches, const ForestConfig& config);
RandomForestIndex train_forest(const std::vector<Batch>& batches, const ForestConfig& config);

}  // namespace driftsel
