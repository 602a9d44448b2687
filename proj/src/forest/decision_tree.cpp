#include "driftsel/forest/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "driftsel/binary_io.hpp"

namespace driftsel {

namespace {

struct Builder {
  const TrainingMatrix& data;
  std::span<const std::uint32_t> weights;
  TreeParams params;
  Rng& rng;
  std::vector<DecisionTree::Node> nodes;
  std::int32_t next_leaf = 0;

  // scratch
  std::vector<std::size_t> features;
  std::vector<std::pair<double, std::uint32_t>> column;
  std::vector<double> left_counts;
  std::vector<double> right_counts;

  std::int32_t make_leaf() {
    DecisionTree::Node node;
    node.leaf = next_leaf++;
    nodes.push_back(node);
    return static_cast<std::int32_t>(nodes.size() - 1);
  }

  struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = INFINITY;
  };

  static double weighted_gini(const std::vector<double>& counts, double total) {
    double sq = 0.0;
    for (double v : counts) sq += v * v;
    return total - sq / total;
  }

  bool find_split(const std::vector<std::uint32_t>& rows, const std::vector<double>& counts,
                  double total, Split& best) {
    std::iota(features.begin(), features.end(), std::size_t{0});
    std::size_t tried = 0;
    for (std::size_t k = 0; k < features.size() && tried < params.max_features; ++k) {
      const std::size_t pick = k + uniform_index(rng, features.size() - k);
      std::swap(features[k], features[pick]);
      const std::size_t f = features[k];

      column.clear();
      for (std::uint32_t r : rows) column.emplace_back(data.row(r)[f], r);
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++tried;

      std::fill(left_counts.begin(), left_counts.end(), 0.0);
      right_counts = counts;
      double left_total = 0.0;
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        const std::uint32_t r = column[i].second;
        const double w = weights[r];
        const auto label = static_cast<std::size_t>(data.labels[r]);
        left_counts[label] += w;
        right_counts[label] -= w;
        left_total += w;
        const double lo = column[i].first;
        const double hi = column[i + 1].first;
        if (lo == hi) continue;
        const double right_total = total - left_total;
        if (left_total < static_cast<double>(params.min_leaf) ||
            right_total < static_cast<double>(params.min_leaf)) {
          continue;
        }
        const double impurity =
            weighted_gini(left_counts, left_total) + weighted_gini(right_counts, right_total);
        if (impurity < best.impurity) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid > lo)) mid = hi;
          best = {f, mid, impurity};
        }
      }
    }
    return std::isfinite(best.impurity);
  }

  std::int32_t build(std::vector<std::uint32_t>& rows, std::size_t depth) {
    std::vector<double> counts(data.classes, 0.0);
    double total = 0.0;
    for (std::uint32_t r : rows) {
      counts[static_cast<std::size_t>(data.labels[r])] += weights[r];
      total += weights[r];
    }
    const std::size_t present =
        static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](double v) { return v > 0.0; }));
    if (present <= 1 || depth >= params.max_depth ||
        total < 2.0 * static_cast<double>(params.min_leaf)) {
      return make_leaf();
    }
    Split split;
    if (!find_split(rows, counts, total, split)) return make_leaf();

    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (std::uint32_t r : rows) {
      (data.row(r)[split.feature] < split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const auto index = static_cast<std::int32_t>(nodes.size());
    DecisionTree::Node node;
    node.feature = static_cast<std::int32_t>(split.feature);
    node.threshold = split.threshold;
    nodes.push_back(node);
    const std::int32_t l = build(left, depth + 1);
    const std::int32_t r = build(right, depth + 1);
    nodes[static_cast<std::size_t>(index)].left = l;
    nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }
};

std::size_t count_leaves(const std::vector<DecisionTree::Node>& nodes) {
  std::size_t leaves = 0;
  for (const auto& n : nodes) leaves += n.is_leaf() ? 1 : 0;
  return leaves;
}

}  // namespace

DecisionTree::DecisionTree() : DecisionTree(std::vector<Node>{Node{-1, 0.0, -1, -1, 0}}) {}

DecisionTree::DecisionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw std::invalid_argument("decision tree needs at least one node");
  leaf_count_ = count_leaves(nodes_);
  std::vector<bool> seen(leaf_count_, false);
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (const auto& node : nodes_) {
    if (node.is_leaf()) {
      if (node.leaf < 0 || static_cast<std::size_t>(node.leaf) >= leaf_count_ ||
          seen[static_cast<std::size_t>(node.leaf)]) {
        throw std::invalid_argument("decision tree leaf ids must be dense and unique");
      }
      seen[static_cast<std::size_t>(node.leaf)] = true;
    } else if (node.left <= 0 || node.left >= n || node.right <= 0 || node.right >= n) {
      throw std::invalid_argument("decision tree child index out of range");
    }
  }
}

DecisionTree DecisionTree::fit(const TrainingMatrix& data, std::span<const std::uint32_t> weights,
                               const TreeParams& params, Rng& rng) {
  if (weights.size() != data.rows) throw std::invalid_argument("weights/rows size mismatch");
  if (params.max_depth < 1 || params.min_leaf < 1) {
    throw std::invalid_argument("tree needs max_depth >= 1 and min_leaf >= 1");
  }
  Builder builder{data, weights, params, rng, {}, 0, {}, {}, {}, {}};
  if (builder.params.max_features == 0) {
    builder.params.max_features =
        static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(data.cols))));
  }
  builder.features.resize(data.cols);
  builder.left_counts.assign(data.classes, 0.0);

  std::vector<std::uint32_t> rows;
  for (std::size_t i = 0; i < data.rows; ++i) {
    if (weights[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
  }
  if (rows.empty()) return DecisionTree();
  builder.build(rows, 0);
  return DecisionTree(std::move(builder.nodes));
}

std::int32_t DecisionTree::leaf_of(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const Node& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left
                                                                                         : n.right);
  }
  return nodes_[i].leaf;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes_[i].is_leaf()) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
    }
  }
  return deepest;
}

std::size_t DecisionTree::max_feature_index() const {
  std::size_t m = 0;
  for (const auto& n : nodes_) {
    if (!n.is_leaf()) m = std::max(m, static_cast<std::size_t>(n.feature));
  }
  return m;
}

void DecisionTree::write(std::ostream& out) const {
  io::put<std::uint64_t>(out, nodes_.size());
  for (const auto& n : nodes_) {
    io::put(out, n.feature);
    io::put(out, n.threshold);
    io::put(out, n.left);
    io::put(out, n.right);
    io::put(out, n.leaf);
  }
}

DecisionTree DecisionTree::read(std::istream& in) {
  const auto count = io::get<std::uint64_t>(in);
  if (count == 0 || count > (1ULL << 32)) throw io::FormatError("bad tree node count");
  std::vector<Node> nodes(count);
  for (auto& n : nodes) {
    n.feature = io::get<std::int32_t>(in);
    n.threshold = io::get<double>(in);
    n.left = io::get<std::int32_t>(in);
    n.right = io::get<std::int32_t>(in);
    n.leaf = io::get<std::int32_t>(in);
  }
  return DecisionTree(std::move(nodes));
}

}  // namespace driftsel
