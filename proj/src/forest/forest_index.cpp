#include "driftsel/forest/forest_index.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "driftsel/binary_io.hpp"

namespace driftsel {

std::vector<std::uint32_t> dominance_scores(std::span<const std::uint32_t> counts) {
  std::vector<std::uint32_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::uint32_t> scores(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    scores[t] = static_cast<std::uint32_t>(
        std::lower_bound(sorted.begin(), sorted.end(), counts[t]) - sorted.begin());
  }
  return scores;
}

LeafRow make_leaf_row(std::vector<std::pair<std::uint32_t, std::uint32_t>> counts,
                      std::size_t batch_count) {
  std::sort(counts.begin(), counts.end());
  LeafRow row;
  for (const auto& [batch, count] : counts) {
    if (batch >= batch_count) throw std::invalid_argument("leaf row batch index out of range");
    if (count == 0) continue;
    if (!row.batch.empty() && row.batch.back() == batch) {
      throw std::invalid_argument("leaf row lists a batch twice");
    }
    row.batch.push_back(batch);
    row.count.push_back(count);
  }
  std::vector<std::uint32_t> sorted = row.count;
  std::sort(sorted.begin(), sorted.end());
  const auto zeros = static_cast<std::uint32_t>(batch_count - row.batch.size());
  row.score.resize(row.count.size());
  for (std::size_t i = 0; i < row.count.size(); ++i) {
    row.score[i] = zeros + static_cast<std::uint32_t>(
                               std::lower_bound(sorted.begin(), sorted.end(), row.count[i]) -
                               sorted.begin());
  }
  return row;
}

RandomForestIndex RandomForestIndex::from_counts(
    std::vector<DecisionTree> trees, std::vector<std::uint64_t> batch_ids,
    const std::vector<std::vector<std::vector<std::uint32_t>>>& counts) {
  if (trees.size() != counts.size()) throw std::invalid_argument("one count table per tree");
  RandomForestIndex index;
  for (const auto& tree : trees) {
    index.dimension_ = std::max(index.dimension_, tree.max_feature_index() + 1);
  }
  index.rows_.resize(trees.size());
  for (std::size_t i = 0; i < trees.size(); ++i) {
    if (counts[i].size() != trees[i].leaf_count()) {
      throw std::invalid_argument("count table leaf count differs from tree");
    }
    for (const auto& leaf : counts[i]) {
      if (leaf.size() != batch_ids.size()) {
        throw std::invalid_argument("count table batch count differs from batch ids");
      }
      std::vector<std::pair<std::uint32_t, std::uint32_t>> sparse;
      for (std::size_t t = 0; t < leaf.size(); ++t) {
        if (leaf[t] > 0) sparse.emplace_back(static_cast<std::uint32_t>(t), leaf[t]);
      }
      index.rows_[i].push_back(make_leaf_row(std::move(sparse), batch_ids.size()));
    }
  }
  index.trees_ = std::move(trees);
  index.batch_ids_ = std::move(batch_ids);
  return index;
}

std::vector<std::uint32_t> RandomForestIndex::rank_positions(std::span<const double> query) const {
  if (query.size() < dimension_) {
    throw std::invalid_argument("query has " + std::to_string(query.size()) +
                                " features, index expects " + std::to_string(dimension_));
  }
  std::vector<std::uint64_t> total(batch_ids_.size(), 0);
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    const LeafRow& row = rows_[i][static_cast<std::size_t>(trees_[i].leaf_of(query))];
    for (std::size_t k = 0; k < row.batch.size(); ++k) total[row.batch[k]] += row.score[k];
  }
  std::vector<std::uint32_t> order(batch_ids_.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (total[a] != total[b]) return total[a] > total[b];
    return batch_ids_[a] > batch_ids_[b];
  });
  return order;
}

BatchRanking RandomForestIndex::rank(std::span<const double> query) const {
  BatchRanking ranking;
  for (std::uint32_t pos : rank_positions(query)) ranking.order.push_back(batch_ids_[pos]);
  ranking.aggregate_score.assign(batch_ids_.size(), 0);
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    const LeafRow& row = rows_[i][static_cast<std::size_t>(trees_[i].leaf_of(query))];
    for (std::size_t k = 0; k < row.batch.size(); ++k) {
      ranking.aggregate_score[row.batch[k]] += row.score[k];
    }
  }
  return ranking;
}

std::vector<std::uint32_t> RandomForestIndex::counts(std::size_t tree, std::size_t leaf) const {
  const LeafRow& row = leaf_row(tree, leaf);
  std::vector<std::uint32_t> dense(batch_ids_.size(), 0);
  for (std::size_t k = 0; k < row.batch.size(); ++k) dense[row.batch[k]] = row.count[k];
  return dense;
}

std::vector<std::uint32_t> RandomForestIndex::scores(std::size_t tree, std::size_t leaf) const {
  const LeafRow& row = leaf_row(tree, leaf);
  std::vector<std::uint32_t> dense(batch_ids_.size(), 0);
  for (std::size_t k = 0; k < row.batch.size(); ++k) dense[row.batch[k]] = row.score[k];
  return dense;
}

namespace {
constexpr char kMagic[5] = "DSFI";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void RandomForestIndex::save(std::ostream& out) const {
  io::put_header(out, kMagic, kVersion);
  io::put<std::uint64_t>(out, dimension_);
  io::put_vector(out, batch_ids_);
  io::put<std::uint64_t>(out, trees_.size());
  for (std::size_t i = 0; i < trees_.size(); ++i) {
    trees_[i].write(out);
    for (const LeafRow& row : rows_[i]) {
      io::put_vector(out, row.batch);
      io::put_vector(out, row.count);
    }
  }
}

void RandomForestIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  save(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

RandomForestIndex RandomForestIndex::load(std::istream& in) {
  io::check_header(in, kMagic, kVersion);
  RandomForestIndex index;
  index.dimension_ = io::get<std::uint64_t>(in);
  index.batch_ids_ = io::get_vector<std::uint64_t>(in);
  const auto trees = io::get<std::uint64_t>(in);
  if (trees > (1ULL << 24)) throw io::FormatError("implausible tree count");
  for (std::uint64_t i = 0; i < trees; ++i) {
    index.trees_.push_back(DecisionTree::read(in));
    std::vector<LeafRow> rows;
    for (std::size_t leaf = 0; leaf < index.trees_.back().leaf_count(); ++leaf) {
      auto batch = io::get_vector<std::uint32_t>(in);
      auto count = io::get_vector<std::uint32_t>(in);
      if (batch.size() != count.size()) throw io::FormatError("leaf row arrays differ in length");
      std::vector<std::pair<std::uint32_t, std::uint32_t>> sparse;
      for (std::size_t k = 0; k < batch.size(); ++k) sparse.emplace_back(batch[k], count[k]);
      rows.push_back(make_leaf_row(std::move(sparse), index.batch_ids_.size()));
    }
    index.rows_.push_back(std::move(rows));
  }
  return index;
}

RandomForestIndex RandomForestIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return load(in);
}

RandomForestIndex train_forest(std::span<const Batch* const> batches, const ForestConfig& config) {
  if (batches.empty()) throw std::invalid_argument("train_forest: no batches");
  if (config.n_estimators < 1 || config.max_depth < 1 || config.min_leaf < 1) {
    throw std::invalid_argument("train_forest: n_estimators, max_depth and min_leaf must be >= 1");
  }

  TrainingMatrix data;
  std::vector<std::uint32_t> batch_of;
  RandomForestIndex index;
  std::size_t max_label = 0;
  for (std::size_t t = 0; t < batches.size(); ++t) {
    const Batch& batch = *batches[t];
    if (batch.samples.empty()) throw std::invalid_argument("train_forest: empty batch");
    index.batch_ids_.push_back(batch.batch_id);
    for (const Sample& s : batch.samples) {
      if (data.rows == 0) data.cols = s.features.size();
      if (s.features.size() != data.cols || data.cols == 0) {
        throw std::invalid_argument("train_forest: inconsistent feature dimension");
      }
      if (s.label < 0) throw std::invalid_argument("train_forest: negative label");
      data.values.insert(data.values.end(), s.features.begin(), s.features.end());
      data.labels.push_back(s.label);
      max_label = std::max(max_label, static_cast<std::size_t>(s.label));
      batch_of.push_back(static_cast<std::uint32_t>(t));
      ++data.rows;
    }
  }
  data.classes = std::max<std::size_t>(2, max_label + 1);
  if (std::adjacent_find(data.labels.begin(), data.labels.end(), std::not_equal_to<>()) ==
      data.labels.end()) {
    std::clog << "warning: train_forest: single-class data, trees degenerate to one leaf\n";
  }
  index.dimension_ = data.cols;

  TreeParams params{config.max_depth, config.min_leaf, config.max_features};
  const std::size_t n_trees = config.n_estimators;
  index.trees_.resize(n_trees);
  index.rows_.resize(n_trees);

  auto build_tree = [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, i));
    std::vector<std::uint32_t> weights(data.rows, 0);
    for (std::size_t k = 0; k < data.rows; ++k) ++weights[uniform_index(rng, data.rows)];
    DecisionTree tree = DecisionTree::fit(data, weights, params, rng);

    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> leaf_counts(tree.leaf_count());
    for (std::size_t r = 0; r < data.rows; ++r) {
      auto& cell = leaf_counts[static_cast<std::size_t>(
          tree.leaf_of(std::span<const double>(data.row(r), data.cols)))];
      // rows arrive grouped by batch, so the current batch is always at the back
      if (cell.empty() || cell.back().first != batch_of[r]) cell.emplace_back(batch_of[r], 0);
      ++cell.back().second;
    }
    std::vector<LeafRow> rows;
    rows.reserve(leaf_counts.size());
    for (auto& cell : leaf_counts) rows.push_back(make_leaf_row(std::move(cell), batches.size()));
    index.trees_[i] = std::move(tree);
    index.rows_[i] = std::move(rows);
  };

  std::size_t threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::clamp<std::size_t>(threads, 1, n_trees);
  if (threads == 1) {
    for (std::size_t i = 0; i < n_trees; ++i) build_tree(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < n_trees; i = next++) build_tree(i);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return index;
}

RandomForestIndex train_forest(const std::vector<Batch>& batches, const ForestConfig& config) {
  std::vector<const Batch*> pointers;
  pointers.reserve(batches.size());
  for (const auto& b : batches) pointers.push_back(&b);
  return train_forest(std::span<const Batch* const>(pointers), config);
}

}  // namespace driftsel
