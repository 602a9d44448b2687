#include "driftsel/selection/selector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "driftsel/model/metrics.hpp"
#include "driftsel/selection/scores.hpp"

namespace driftsel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<const Sample*> flatten(const Segment& segment) {
  std::vector<const Sample*> out;
  for (const Batch& b : segment.batches) {
    for (const Sample& s : b.samples) out.push_back(&s);
  }
  return out;
}

bool contains(std::span<const std::uint32_t> set, std::uint32_t v) {
  return std::find(set.begin(), set.end(), v) != set.end();
}

void check_threshold(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("disparity threshold must be > 0");
}

}  // namespace

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back((2.0 * i + 1.0) / 20.0);
  return grid;
}

SegmentSelection select_segments(const MlpClassifier& model, std::span<const Segment> previous,
                                 const Segment& current_train, std::span<const Sample> validation,
                                 double disparity_threshold) {
  if (validation.empty()) throw std::invalid_argument("select_segments: empty validation set");
  check_threshold(disparity_threshold);
  const GradientVector g_v = model.mean_gradient(validation);
  SegmentSelection out;
  for (const Segment& segment : previous) {
    const auto samples = flatten(segment);
    if (samples.empty()) continue;
    const GradientVector g_d = model.mean_gradient(std::span<const Sample* const>(samples));
    SegmentScore score;
    score.segment_id = segment.segment_id;
    score.gain = gain_score(g_d.values, g_v.values);
    score.disparity = disparity_score(g_d.values, g_v.values);
    score.selected = score.gain > 0.0 && score.disparity < disparity_threshold;
    if (score.selected) out.selected.push_back(segment.segment_id);
    out.scores.push_back(score);
  }
  out.selected.push_back(current_train.segment_id);
  return out;
}

BestBatches select_best_batches(const std::vector<std::vector<std::uint32_t>>& rankings,
                                const RandomForestIndex& index,
                                std::span<const std::uint32_t> segment_of,
                                std::span<const std::uint32_t> selected_segments,
                                std::span<const std::uint64_t> fallback) {
  if (selected_segments.empty()) throw std::invalid_argument("select_best_batches: empty S");
  if (segment_of.size() != index.batch_count()) {
    throw std::invalid_argument("select_best_batches: segment map does not match the index");
  }
  std::vector<bool> in_s(segment_of.size());
  for (std::size_t p = 0; p < segment_of.size(); ++p) {
    in_s[p] = contains(selected_segments, segment_of[p]);
  }
  BestBatches out;
  std::unordered_set<std::uint64_t> seen;
  auto add = [&](std::uint64_t id) {
    if (seen.insert(id).second) out.batches.push_back(id);
  };
  for (const auto& ranking : rankings) {
    bool hit = false;
    for (std::uint32_t pos : ranking) {
      if (in_s[pos]) {
        add(index.batch_ids()[pos]);
        hit = true;
        break;
      }
    }
    if (!hit) {
      ++out.fallbacks;
      for (std::uint64_t id : fallback) add(id);
    }
  }
  return out;
}

BestBatches select_best_batches(std::span<const Sample> validation, const RandomForestIndex& index,
                                std::span<const std::uint32_t> segment_of,
                                std::span<const std::uint32_t> selected_segments,
                                std::span<const std::uint64_t> fallback) {
  std::vector<std::vector<std::uint32_t>> rankings;
  rankings.reserve(validation.size());
  for (const Sample& v : validation) rankings.push_back(index.rank_positions(v.features));
  return select_best_batches(rankings, index, segment_of, selected_segments, fallback);
}

BatchCatalog catalog_batches(const Problem& problem) {
  BatchCatalog catalog;
  for (const Segment& segment : problem.previous) {
    for (const Batch& b : segment.batches) {
      catalog.batches.push_back(&b);
      catalog.segment_of.push_back(segment.segment_id);
    }
  }
  for (const Batch& b : problem.current_train.batches) {
    catalog.batches.push_back(&b);
    catalog.segment_of.push_back(problem.current_train.segment_id);
  }
  return catalog;
}

double compute_data_used(std::span<const std::uint64_t> best_batches, const Problem& problem) {
  std::unordered_map<std::uint64_t, std::size_t> historical;
  std::size_t all_previous = 0;
  for (const Segment& segment : problem.previous) {
    for (const Batch& b : segment.batches) {
      historical.emplace(b.batch_id, b.samples.size());
      all_previous += b.samples.size();
    }
  }
  const std::size_t current = problem.current_train.sample_count();
  std::unordered_set<std::uint64_t> counted;
  std::size_t used = 0;
  for (std::uint64_t id : best_batches) {
    auto it = historical.find(id);
    if (it != historical.end() && counted.insert(id).second) used += it->second;
  }
  return static_cast<double>(used + current) / static_cast<double>(all_previous + current);
}

SelectionOutcome run_selection_training(const Problem& problem, const SelectionConfig& config,
                                        const RandomForestIndex* forest) {
  if (problem.validation.empty()) throw std::invalid_argument("selection: empty validation set");
  if (problem.current_train.batches.empty()) {
    throw std::invalid_argument("selection: empty current training split");
  }
  if (!(config.budget_fraction > 0.0 && config.budget_fraction <= 1.0)) {
    throw std::invalid_argument("selection: budget fraction must lie in (0, 1]");
  }
  const double threshold = config.disparity_threshold;
  if (config.segment_filter) check_threshold(threshold);

  SelectionOutcome outcome;
  outcome.disparity_threshold = threshold;
  const BatchCatalog catalog = catalog_batches(problem);
  const std::uint32_t current_id = problem.current_train.segment_id;

  std::vector<std::uint64_t> current_batches;
  for (const Batch& b : problem.current_train.batches) current_batches.push_back(b.batch_id);
  std::unordered_map<std::uint64_t, const Batch*> by_id;
  for (const Batch* b : catalog.batches) by_id.emplace(b->batch_id, b);
  std::size_t all_previous = 0;
  for (const Segment& s : problem.previous) all_previous += s.sample_count();
  const std::size_t current_count = problem.current_train.sample_count();

  // Forest and cached validation rankings.
  RandomForestIndex trained;
  std::vector<std::vector<std::uint32_t>> rankings;
  if (config.ranking_filter) {
    const auto rf_start = Clock::now();
    if (forest == nullptr) {
      trained = train_forest(std::span<const Batch* const>(catalog.batches), config.forest);
      forest = &trained;
    }
    if (forest->batch_ids().size() != catalog.batches.size()) {
      throw std::invalid_argument("selection: forest does not cover the problem's batches");
    }
    rankings.reserve(problem.validation.size());
    for (const Sample& v : problem.validation) rankings.push_back(forest->rank_positions(v.features));
    outcome.rf_time_s = seconds_since(rf_start);
  }

  const auto model_start = Clock::now();
  std::vector<std::vector<const Sample*>> segment_samples;
  for (const Segment& s : problem.previous) segment_samples.push_back(flatten(s));

  const auto budget = static_cast<double>(all_previous + current_count) * config.budget_fraction -
                      static_cast<double>(current_count);

  auto provider = [&](std::size_t epoch, const MlpClassifier& model) {
    EpochTrace trace;
    trace.epoch = epoch;
    if (config.segment_filter && !problem.previous.empty()) {
      const GradientVector g_v = model.mean_gradient(problem.validation);
      for (std::size_t i = 0; i < problem.previous.size(); ++i) {
        if (segment_samples[i].empty()) continue;
        const GradientVector g_d =
            model.mean_gradient(std::span<const Sample* const>(segment_samples[i]));
        SegmentScore score;
        score.segment_id = problem.previous[i].segment_id;
        score.gain = gain_score(g_d.values, g_v.values);
        score.disparity = disparity_score(g_d.values, g_v.values);
        score.selected = score.gain > 0.0 && score.disparity < threshold;
        if (score.selected) trace.selected_segments.push_back(score.segment_id);
        trace.scores.push_back(score);
      }
    } else {
      for (const Segment& s : problem.previous) trace.selected_segments.push_back(s.segment_id);
    }
    trace.selected_segments.push_back(current_id);

    // Historical candidates with a priority: votes from validation samples
    // when ranking, recency otherwise.
    std::vector<std::pair<std::size_t, std::uint64_t>> candidates;
    if (config.ranking_filter) {
      const BestBatches best = select_best_batches(rankings, *forest, catalog.segment_of,
                                                   trace.selected_segments, current_batches);
      trace.fallbacks = best.fallbacks;
      std::unordered_map<std::uint64_t, std::size_t> votes;
      for (const auto& ranking : rankings) {
        for (std::uint32_t pos : ranking) {
          if (contains(trace.selected_segments, catalog.segment_of[pos])) {
            ++votes[forest->batch_ids()[pos]];
            break;
          }
        }
      }
      for (std::uint64_t id : best.batches) {
        if (by_id.count(id) && std::find(current_batches.begin(), current_batches.end(), id) ==
                                   current_batches.end()) {
          candidates.emplace_back(votes[id], id);
        }
      }
    } else {
      for (std::size_t p = 0; p < catalog.batches.size(); ++p) {
        if (catalog.segment_of[p] != current_id &&
            contains(trace.selected_segments, catalog.segment_of[p])) {
          candidates.emplace_back(0, catalog.batches[p]->batch_id);
        }
      }
    }
    if (config.budget_fraction < 1.0) {
      std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
      });
      double used = 0.0;
      std::size_t keep = 0;
      while (keep < candidates.size()) {
        const double size = static_cast<double>(by_id.at(candidates[keep].second)->samples.size());
        if (used + size > budget + 1e-9) break;
        used += size;
        ++keep;
      }
      candidates.resize(keep);
    }

    for (const auto& c : candidates) trace.best_batches.push_back(c.second);
    trace.best_batches.insert(trace.best_batches.end(), current_batches.begin(),
                              current_batches.end());
    std::sort(trace.best_batches.begin(), trace.best_batches.end());

    std::vector<const Batch*> out;
    out.reserve(trace.best_batches.size());
    for (std::uint64_t id : trace.best_batches) out.push_back(by_id.at(id));
    outcome.trace.push_back(std::move(trace));
    return out;
  };

  outcome.model = make_model(problem.d, problem.c, config.train);
  outcome.training = train_loop(outcome.model, problem.validation, config.train, provider);
  for (std::size_t i = 0; i < outcome.trace.size(); ++i) {
    outcome.trace[i].validation_loss = outcome.training.validation_loss.at(i);
  }
  const EpochTrace& best = outcome.trace.at(outcome.training.best_epoch - 1);
  outcome.selected_segments = best.selected_segments;
  outcome.best_batches = best.best_batches;
  outcome.data_used_fraction = compute_data_used(outcome.best_batches, problem);
  outcome.model_time_s = seconds_since(model_start);
  return outcome;
}

double tune_disparity_threshold(const Problem& problem, const SelectionConfig& config,
                                const RandomForestIndex* forest) {
  const std::vector<double>& grid = config.threshold_grid;
  if (grid.empty()) throw std::invalid_argument("threshold search: empty grid");
  RandomForestIndex trained;
  if (config.ranking_filter && forest == nullptr) {
    trained = train_forest(std::span<const Batch* const>(catalog_batches(problem).batches),
                           config.forest);
    forest = &trained;
  }
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double best_threshold = sorted.front();
  double best_accuracy = -1.0;
  for (double t : sorted) {
    SelectionConfig trial = config;
    trial.disparity_threshold = t;
    trial.threshold_grid.clear();
    const SelectionOutcome outcome = run_selection_training(problem, trial, forest);
    const double accuracy = evaluate(outcome.model, problem.validation).accuracy;
    if (accuracy > best_accuracy) {
      best_accuracy = accuracy;
      best_threshold = t;
    }
  }
  return best_threshold;
}

std::optional<std::string> verify_trace(const SelectionOutcome& outcome, const Problem& problem,
                                        const SelectionConfig& config) {
  const std::uint32_t current_id = problem.current_train.segment_id;
  std::unordered_map<std::uint64_t, std::uint32_t> segment_of;
  const BatchCatalog catalog = catalog_batches(problem);
  for (std::size_t p = 0; p < catalog.batches.size(); ++p) {
    segment_of.emplace(catalog.batches[p]->batch_id, catalog.segment_of[p]);
  }
  auto fail = [](std::size_t epoch, const std::string& what) {
    return "epoch " + std::to_string(epoch) + ": " + what;
  };
  if (outcome.trace.empty()) return std::string("empty trace");
  for (const EpochTrace& e : outcome.trace) {
    if (!contains(e.selected_segments, current_id)) {
      return fail(e.epoch, "current segment missing from S");
    }
    if (config.segment_filter) {
      if (e.scores.size() != problem.previous.size()) {
        return fail(e.epoch, "missing segment scores");
      }
      for (const SegmentScore& s : e.scores) {
        const bool rule = s.gain > 0.0 && s.disparity < outcome.disparity_threshold;
        if (rule != s.selected) {
          return fail(e.epoch, "segment " + std::to_string(s.segment_id) +
                                   " selection disagrees with G > 0 and D < T_d");
        }
        if (rule != contains(e.selected_segments, s.segment_id)) {
          return fail(e.epoch, "segment " + std::to_string(s.segment_id) + " S membership is wrong");
        }
      }
    }
    for (std::uint64_t id : e.best_batches) {
      auto it = segment_of.find(id);
      if (it == segment_of.end()) return fail(e.epoch, "unknown batch " + std::to_string(id));
      if (!contains(e.selected_segments, it->second)) {
        return fail(e.epoch, "batch " + std::to_string(id) + " is outside S");
      }
    }
    for (const Batch& b : problem.current_train.batches) {
      if (std::find(e.best_batches.begin(), e.best_batches.end(), b.batch_id) == e.best_batches.end()) {
        return fail(e.epoch, "current batch " + std::to_string(b.batch_id) + " not trained on");
      }
    }
  }
  return std::nullopt;
}

void write_trace(std::ostream& out, const SelectionOutcome& outcome) {
  for (const EpochTrace& e : outcome.trace) {
    nlohmann::json segments = nlohmann::json::array();
    for (const SegmentScore& s : e.scores) {
      segments.push_back(
          {{"id", s.segment_id}, {"gain", s.gain}, {"disparity", s.disparity}, {"selected", s.selected}});
    }
    const nlohmann::json line = {{"epoch", e.epoch},
                                 {"segments", segments},
                                 {"selected", e.selected_segments},
                                 {"best_batches", e.best_batches.size()},
                                 {"fallbacks", e.fallbacks},
                                 {"validation_loss", e.validation_loss}};
    out << line.dump() << '\n';
  }
}

}  // namespace driftsel
