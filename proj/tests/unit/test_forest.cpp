#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "driftsel/datagen/generators.hpp"
#include "driftsel/forest/forest_index.hpp"
#include "helpers.hpp"

using namespace driftsel;

namespace {

std::vector<std::uint32_t> brute_force_scores(const std::vector<std::uint32_t>& n) {
  std::vector<std::uint32_t> s(n.size(), 0);
  for (std::size_t t = 0; t < n.size(); ++t) {
    for (std::size_t u = 0; u < n.size(); ++u) {
      if (u != t && n[t] > n[u]) ++s[t];
    }
  }
  return s;
}

// A comb on feature 0 with `leaves` leaves: leaf i holds x0 in [i, i+1).
DecisionTree comb(std::size_t leaves) {
  std::vector<DecisionTree::Node> nodes;
  if (leaves == 1) return DecisionTree();
  // Node 2i is the i-th internal node, 2i+1 its left leaf; the last node is the final leaf.
  for (std::size_t i = 0; i + 1 < leaves; ++i) {
    DecisionTree::Node internal;
    internal.feature = 0;
    internal.threshold = static_cast<double>(i + 1);
    internal.left = static_cast<std::int32_t>(2 * i + 1);
    internal.right = static_cast<std::int32_t>(2 * i + 2);
    nodes.push_back(internal);
    DecisionTree::Node leaf;
    leaf.leaf = static_cast<std::int32_t>(i);
    nodes.push_back(leaf);
  }
  DecisionTree::Node last;
  last.leaf = static_cast<std::int32_t>(leaves - 1);
  nodes.push_back(last);
  return DecisionTree(nodes);
}

bool is_permutation_of(const std::vector<std::uint64_t>& order, std::vector<std::uint64_t> ids) {
  std::vector<std::uint64_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  std::sort(ids.begin(), ids.end());
  return sorted == ids;
}

std::vector<Batch> small_batches(std::uint64_t seed) {
  StreamSpec spec = testing::small_spec(Generator::sine, 3, 4, 50, seed, 4);
  std::vector<Batch> out;
  for (const Segment& s : generate(spec).segments) {
    out.insert(out.end(), s.batches.begin(), s.batches.end());
  }
  return out;
}

}  // namespace

TEST_CASE("dominance scores") {
  CHECK(dominance_scores(std::vector<std::uint32_t>{5, 2, 9}) == std::vector<std::uint32_t>{1, 0, 2});
  CHECK(dominance_scores(std::vector<std::uint32_t>{4, 4}) == std::vector<std::uint32_t>{0, 0});
  CHECK(dominance_scores(std::vector<std::uint32_t>{7}) == std::vector<std::uint32_t>{0});
  CHECK(dominance_scores(std::vector<std::uint32_t>{}).empty());

  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint32_t> n(1 + uniform_index(rng, 12));
    for (auto& v : n) v = static_cast<std::uint32_t>(uniform_index(rng, 5));
    CHECK(dominance_scores(n) == brute_force_scores(n));
  }
}

TEST_CASE("leaf rows store sparse counts with zero-count batches scoring zero") {
  const LeafRow row = make_leaf_row({{3, 2}, {0, 5}}, 5);
  CHECK(row.batch == std::vector<std::uint32_t>{0, 3});
  CHECK(row.count == std::vector<std::uint32_t>{5, 2});
  // Dense {5,0,0,2,0}: batch 0 beats 4 others, batch 3 beats the three empty ones.
  CHECK(row.score == std::vector<std::uint32_t>{4, 3});
}

TEST_CASE("stored scores equal brute-force enumeration on random tables") {
  Rng rng(22);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t batches = 1 + uniform_index(rng, 8);
    const std::size_t trees = 1 + uniform_index(rng, 4);
    std::vector<DecisionTree> forest;
    std::vector<std::vector<std::vector<std::uint32_t>>> counts(trees);
    for (std::size_t i = 0; i < trees; ++i) {
      const std::size_t leaves = 1 + uniform_index(rng, 50);
      forest.push_back(comb(leaves));
      counts[i].assign(leaves, std::vector<std::uint32_t>(batches, 0));
      for (auto& leaf : counts[i]) {
        for (auto& v : leaf) v = bernoulli(rng, 0.4) ? static_cast<std::uint32_t>(uniform_index(rng, 6)) : 0;
      }
    }
    std::vector<std::uint64_t> ids(batches);
    std::iota(ids.begin(), ids.end(), 100);
    const auto index = RandomForestIndex::from_counts(forest, ids, counts);
    for (std::size_t i = 0; i < trees; ++i) {
      for (std::size_t k = 0; k < counts[i].size(); ++k) {
        CHECK(index.counts(i, k) == counts[i][k]);
        const auto s = index.scores(i, k);
        REQUIRE(s == brute_force_scores(counts[i][k]));
        for (auto v : s) CHECK(v <= batches - 1);
      }
    }
    for (int q = 0; q < 20; ++q) {
      const std::vector<double> query{uniform(rng, 0.0, 51.0)};
      const BatchRanking r = index.rank(query);
      REQUIRE(is_permutation_of(r.order, ids));
      // Aggregate is the sum of the visited leaves' scores.
      std::vector<std::uint64_t> total(batches, 0);
      for (std::size_t i = 0; i < trees; ++i) {
        const auto s = brute_force_scores(counts[i][static_cast<std::size_t>(forest[i].leaf_of(query))]);
        for (std::size_t t = 0; t < batches; ++t) total[t] += s[t];
      }
      CHECK(r.aggregate_score == total);
      // Descending score, ties to the larger id.
      for (std::size_t p = 1; p < r.order.size(); ++p) {
        const auto a = r.order[p - 1] - 100, b = r.order[p] - 100;
        CHECK((total[a] > total[b] || (total[a] == total[b] && a > b)));
      }
    }
  }
}

TEST_CASE("worked ranking example: counts ordered b3 > b4 > b1 > b5 > b2") {
  const std::vector<std::vector<std::vector<std::uint32_t>>> counts{{{6, 1, 12, 9, 3}}};
  const auto index = RandomForestIndex::from_counts({DecisionTree()}, {1, 2, 3, 4, 5}, counts);
  const BatchRanking r = index.rank(std::vector<double>{0.0});
  CHECK(r.order == std::vector<std::uint64_t>{3, 4, 1, 5, 2});
  CHECK(r.aggregate_score == std::vector<std::uint64_t>{2, 0, 4, 3, 1});
}

TEST_CASE("two-tree aggregate: summed scores decide") {
  // Tree A: b1 = 2, b2 = 0. Tree B: b2 = 2, b1 = 1.
  const std::vector<std::vector<std::vector<std::uint32_t>>> counts{{{5, 1, 3}}, {{3, 5, 1}}};
  const auto index =
      RandomForestIndex::from_counts({DecisionTree(), DecisionTree()}, {1, 2, 3}, counts);
  const BatchRanking r = index.rank(std::vector<double>{0.0});
  CHECK(r.aggregate_score == std::vector<std::uint64_t>{3, 2, 1});
  CHECK(r.order.front() == 1);
}

TEST_CASE("all-tie leaves rank by descending batch id") {
  const std::vector<std::vector<std::vector<std::uint32_t>>> counts{{{2, 2, 2, 2}}};
  const auto index = RandomForestIndex::from_counts({DecisionTree()}, {10, 11, 12, 13}, counts);
  CHECK(index.rank(std::vector<double>{0.0}).order == std::vector<std::uint64_t>{13, 12, 11, 10});
}

TEST_CASE("leaf routing") {
  const DecisionTree single;
  CHECK(single.leaf_of(std::vector<double>{123.0}) == 0);
  CHECK(single.leaf_count() == 1);
  CHECK(single.depth() == 0);

  const DecisionTree split = comb(2);
  CHECK(split.leaf_of(std::vector<double>{0.2}) == 0);
  CHECK(split.leaf_of(std::vector<double>{1.0}) == 1);  // equal to the threshold goes right
  CHECK(split.leaf_of(std::vector<double>{1.7}) == 1);
  CHECK(split.depth() == 1);

  CHECK_THROWS_AS(DecisionTree({DecisionTree::Node{0, 0.5, 1, 7, -1}, {}, {}}), std::invalid_argument);
}

TEST_CASE("tree fit respects depth and separates a clean split") {
  TrainingMatrix m;
  m.cols = 2;
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double a = uniform01(rng), b = uniform01(rng);
    m.values.push_back(a);
    m.values.push_back(b);
    m.labels.push_back(a < 0.3 ? 1 : 0);
  }
  m.rows = 200;
  std::vector<std::uint32_t> weights(200, 1);
  TreeParams params;
  params.max_features = 2;
  const DecisionTree tree = DecisionTree::fit(m, weights, params, rng);
  CHECK(tree.depth() == 1);
  const auto& root = tree.nodes().front();
  CHECK(root.feature == 0);
  CHECK(root.threshold == doctest::Approx(0.3).epsilon(0.02));

  params.max_depth = 3;
  params.max_features = 1;
  for (std::size_t i = 0; i < 200; ++i) m.labels[i] = static_cast<int>(uniform_index(rng, 2));
  const DecisionTree noisy = DecisionTree::fit(m, weights, params, rng);
  CHECK(noisy.depth() <= 3);
}

TEST_CASE("forest counts conserve samples and rankings are permutations") {
  const auto batches = small_batches(1);
  ForestConfig config;
  config.n_estimators = 8;
  config.seed = 3;
  const auto index = train_forest(batches, config);
  CHECK(index.tree_count() == 8);
  CHECK(index.batch_count() == batches.size());
  std::size_t samples = 0;
  for (const Batch& b : batches) samples += b.samples.size();
  for (std::size_t i = 0; i < index.tree_count(); ++i) {
    std::size_t total = 0;
    std::vector<std::size_t> per_batch(batches.size(), 0);
    for (std::size_t k = 0; k < index.tree(i).leaf_count(); ++k) {
      const auto n = index.counts(i, k);
      for (std::size_t t = 0; t < n.size(); ++t) per_batch[t] += n[t];
      total += std::accumulate(n.begin(), n.end(), std::size_t{0});
    }
    CHECK(total == samples);
    for (std::size_t t = 0; t < batches.size(); ++t) CHECK(per_batch[t] == batches[t].samples.size());
    CHECK(index.tree(i).depth() <= config.max_depth);
  }
  std::vector<std::uint64_t> ids;
  for (const Batch& b : batches) ids.push_back(b.batch_id);
  Rng rng(5);
  for (int q = 0; q < 1000; ++q) {
    REQUIRE(is_permutation_of(index.rank(testing::random_vector(rng, 4, 0.0, 1.0)).order, ids));
  }
  CHECK_THROWS_AS(index.rank(std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("a training sample's own batch is ranked high") {
  const auto batches = small_batches(2);
  ForestConfig config;
  config.n_estimators = 20;
  config.seed = 9;
  const auto index = train_forest(batches, config);
  std::size_t top3 = 0, total = 0;
  for (const Batch& b : batches) {
    for (const Sample& s : b.samples) {
      const auto order = index.rank(s.features).order;
      const auto pos = std::find(order.begin(), order.end(), b.batch_id) - order.begin();
      if (pos < 3) ++top3;
      ++total;
    }
  }
  CHECK(static_cast<double>(top3) / static_cast<double>(total) > 0.5);
}

TEST_CASE("forest is deterministic regardless of thread count") {
  const auto batches = small_batches(3);
  ForestConfig config;
  config.n_estimators = 6;
  config.seed = 17;
  config.threads = 1;
  const auto a = train_forest(batches, config);
  config.threads = 3;
  const auto b = train_forest(batches, config);
  CHECK(a == b);
  config.seed = 18;
  CHECK_FALSE(train_forest(batches, config) == a);
}

TEST_CASE("forest serialization round trip") {
  ForestConfig config;
  config.n_estimators = 4;
  config.seed = 2;
  const auto index = train_forest(small_batches(4), config);
  std::stringstream buf;
  index.save(buf);
  const auto back = RandomForestIndex::load(buf);
  CHECK(back == index);

  std::string bytes = buf.str();
  bytes[0] = 'X';
  std::istringstream corrupt(bytes);
  CHECK_THROWS(RandomForestIndex::load(corrupt));
  std::istringstream truncated(buf.str().substr(0, buf.str().size() / 2));
  CHECK_THROWS(RandomForestIndex::load(truncated));
}

TEST_CASE("forest preconditions") {
  CHECK_THROWS_AS(train_forest(std::vector<Batch>{}, ForestConfig{}), std::invalid_argument);
  std::vector<Batch> mixed(2);
  mixed[0].samples.push_back({{0.1, 0.2}, 0});
  mixed[1].batch_id = 1;
  mixed[1].samples.push_back({{0.1}, 1});
  CHECK_THROWS_AS(train_forest(mixed, ForestConfig{}), std::invalid_argument);
}
