#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "driftsel/random.hpp"

namespace driftsel {

// Dense row-major training matrix for tree induction.
struct TrainingMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols
  std::vector<int> labels;
  std::size_t classes = 2;

  const double* row(std::size_t i) const { return values.data() + i * cols; }
};

struct TreeParams {
  std::size_t max_depth = 20;
  std::size_t min_leaf = 1;
  std::size_t max_features = 0;  // 0 means ceil(sqrt(cols))
};

class DecisionTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf = -1;  // leaf id, dense in [0, leaf_count)

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  DecisionTree();  // a single leaf
  explicit DecisionTree(std::vector<Node> nodes);

  // Fits a Gini tree on the rows in `weights` (bootstrap multiplicities;
  // zero-weight rows are out of bag).
  static DecisionTree fit(const TrainingMatrix& data, std::span<const std::uint32_t> weights,
                          const TreeParams& params, Rng& rng);

  // Values below a node's threshold go left, the rest go right.
  std::int32_t leaf_of(std::span<const double> x) const;

  std::size_t leaf_count() const { return leaf_count_; }
  std::size_t depth() const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t max_feature_index() const;

  void write(std::ostream& out) const;
  static DecisionTree read(std::istream& in);

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<Node> nodes_;
  std::size_t leaf_count_ = 0;
};

}  // namespace driftsel
