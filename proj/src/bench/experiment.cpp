#include "driftsel/bench/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "driftsel/datagen/csv.hpp"
#include "driftsel/datagen/generators.hpp"
#include "driftsel/datagen/spec_json.hpp"
#include "driftsel/model/metrics.hpp"

namespace driftsel {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

bool is_published(const std::string& name) {
  const auto names = table1_datasets();
  return std::find(names.begin(), names.end(), name) != names.end();
}

void apply_train_json(const json& j, TrainConfig& t) {
  reject_unknown_keys(j,
                      {"learning_rate", "max_epochs", "patience", "hidden", "optimizer", "beta1",
                       "beta2", "epsilon"},
                      "selection.train");
  read_if(j, "learning_rate", t.learning_rate);
  read_if(j, "max_epochs", t.max_epochs);
  read_if(j, "patience", t.patience);
  read_if(j, "hidden", t.hidden);
  if (auto it = j.find("optimizer"); it != j.end()) t.optimizer = parse_optimizer(it->get<std::string>());
  read_if(j, "beta1", t.beta1);
  read_if(j, "beta2", t.beta2);
  read_if(j, "epsilon", t.epsilon);
}

void apply_forest_json(const json& j, ForestConfig& f) {
  reject_unknown_keys(j, {"n_estimators", "max_depth", "min_leaf", "max_features", "threads"},
                      "selection.forest");
  read_if(j, "n_estimators", f.n_estimators);
  read_if(j, "max_depth", f.max_depth);
  read_if(j, "min_leaf", f.min_leaf);
  read_if(j, "max_features", f.max_features);
  read_if(j, "threads", f.threads);
}

void apply_selection_json(const json& j, SelectionConfig& s) {
  reject_unknown_keys(j,
                      {"disparity_threshold", "threshold_search", "threshold_grid", "segment_filter",
                       "ranking_filter", "budget_fraction", "train", "forest"},
                      "selection");
  read_if(j, "disparity_threshold", s.disparity_threshold);
  read_if(j, "segment_filter", s.segment_filter);
  read_if(j, "ranking_filter", s.ranking_filter);
  read_if(j, "budget_fraction", s.budget_fraction);
  read_if(j, "threshold_grid", s.threshold_grid);
  if (auto it = j.find("threshold_search"); it != j.end()) {
    const auto mode = it->get<std::string>();
    if (mode == "fixed") {
      s.threshold_grid.clear();
    } else if (mode == "grid") {
      if (s.threshold_grid.empty()) s.threshold_grid = default_threshold_grid();
    } else {
      throw std::invalid_argument("selection.threshold_search must be 'fixed' or 'grid'");
    }
  }
  if (auto it = j.find("train"); it != j.end()) apply_train_json(*it, s.train);
  if (auto it = j.find("forest"); it != j.end()) apply_forest_json(*it, s.forest);
}

double parse_double(std::string_view field, std::size_t row) {
  if (field == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || end != field.data() + field.size()) {
    throw std::invalid_argument("metrics csv row " + std::to_string(row) + ": bad number '" +
                                std::string(field) + "'");
  }
  return v;
}

void write_number(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "nan";
    return;
  }
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, result.ptr - buf);
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::full_data:
      return "full_data";
    case Method::current_segment:
      return "current_segment";
    case Method::alg1_only:
      return "alg1_only";
    case Method::ours:
      return "ours";
    case Method::quilt_like:
      return "quilt_like";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<Method> all_methods() {
  return {Method::full_data, Method::current_segment, Method::alg1_only, Method::ours,
          Method::quilt_like};
}

ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown_keys(j,
                      {"dataset", "stream", "csv", "method", "methods", "seeds", "selection", "split",
                       "strict_table1", "trace_dir"},
                      "config");
  ExperimentConfig config;
  if (!j.contains("dataset")) throw std::invalid_argument("config: missing 'dataset'");
  config.dataset = j.at("dataset").get<std::string>();
  if (is_published(config.dataset)) config.stream = table1_spec(config.dataset);
  if (auto it = j.find("stream"); it != j.end()) apply_stream_json(*it, config.stream);
  if (auto it = j.find("csv"); it != j.end()) {
    reject_unknown_keys(*it, {"path", "label_column"}, "csv");
    std::filesystem::path path = it->at("path").get<std::string>();
    config.csv_path = path.is_relative() ? base_dir / path : path;
    read_if(*it, "label_column", config.label_column);
    config.stream.generator = Generator::csv;
  }
  if (j.contains("method") && j.contains("methods")) {
    throw std::invalid_argument("config: give either 'method' or 'methods'");
  }
  if (auto it = j.find("method"); it != j.end()) {
    config.methods = {parse_method(it->get<std::string>())};
  }
  if (auto it = j.find("methods"); it != j.end()) {
    config.methods.clear();
    for (const auto& m : *it) config.methods.push_back(parse_method(m.get<std::string>()));
  }
  read_if(j, "seeds", config.seeds);
  if (auto it = j.find("selection"); it != j.end()) apply_selection_json(*it, config.selection);
  if (auto it = j.find("split"); it != j.end()) {
    reject_unknown_keys(*it, {"train", "validation", "test"}, "split");
    read_if(*it, "train", config.split.train);
    read_if(*it, "validation", config.split.validation);
    read_if(*it, "test", config.split.test);
  }
  read_if(j, "strict_table1", config.strict_table1);
  if (auto it = j.find("trace_dir"); it != j.end()) {
    std::filesystem::path path = it->get<std::string>();
    config.trace_dir = path.is_relative() ? base_dir / path : path;
  }

  if (config.seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  if (config.methods.empty()) throw std::invalid_argument("config: need at least one method");
  if (config.stream.generator == Generator::csv && !config.csv_path) {
    throw std::invalid_argument("config: CSV dataset needs csv.path");
  }
  validate_spec(config.stream);
  if (config.strict_table1) validate_spec_strict(config.stream, config.dataset);
  validate(config.selection.train);
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return experiment_config_from_json(j, path.parent_path());
}

json experiment_config_to_json(const ExperimentConfig& config) {
  json methods = json::array();
  for (Method m : config.methods) methods.push_back(std::string(method_name(m)));
  const SelectionConfig& s = config.selection;
  json j = {
      {"dataset", config.dataset},
      {"stream", stream_spec_to_json(config.stream)},
      {"methods", methods},
      {"seeds", config.seeds},
      {"split", {{"train", config.split.train}, {"validation", config.split.validation}, {"test", config.split.test}}},
      {"strict_table1", config.strict_table1},
      {"selection",
       {{"disparity_threshold", s.disparity_threshold},
        {"threshold_search", s.threshold_grid.empty() ? "fixed" : "grid"},
        {"threshold_grid", s.threshold_grid},
        {"segment_filter", s.segment_filter},
        {"ranking_filter", s.ranking_filter},
        {"budget_fraction", s.budget_fraction},
        {"train",
         {{"learning_rate", s.train.learning_rate},
          {"max_epochs", s.train.max_epochs},
          {"patience", s.train.patience},
          {"hidden", s.train.hidden},
          {"optimizer", std::string(optimizer_name(s.train.optimizer))},
          {"beta1", s.train.beta1},
          {"beta2", s.train.beta2},
          {"epsilon", s.train.epsilon}}},
        {"forest",
         {{"n_estimators", s.forest.n_estimators},
          {"max_depth", s.forest.max_depth},
          {"min_leaf", s.forest.min_leaf},
          {"max_features", s.forest.max_features},
          {"threads", s.forest.threads}}}}},
  };
  if (config.csv_path) {
    j["csv"] = {{"path", config.csv_path->string()}, {"label_column", config.label_column}};
  }
  if (config.trace_dir) j["trace_dir"] = config.trace_dir->string();
  return j;
}

SegmentedStream build_stream(const ExperimentConfig& config, std::uint64_t seed) {
  StreamSpec spec = config.stream;
  spec.seed = seed;
  if (spec.generator == Generator::csv) {
    if (!config.csv_path) throw std::invalid_argument("CSV dataset without a path");
    return load_csv(*config.csv_path, config.label_column, spec);
  }
  return generate(spec);
}

SelectionConfig seeded_selection(const SelectionConfig& base, std::uint64_t seed) {
  SelectionConfig s = base;
  s.train.seed = derive_seed(seed, 1);
  s.forest.seed = derive_seed(seed, 2);
  return s;
}

MethodRun run_method(const Problem& problem, Method method, const SelectionConfig& selection,
                     std::uint64_t seed, const std::string& dataset) {
  MethodRun run;
  run.row.dataset = dataset;
  run.row.method = std::string(method_name(method));
  run.row.seed = seed;
  const auto start = Clock::now();

  if (method == Method::full_data || method == Method::current_segment) {
    const BatchCatalog catalog = catalog_batches(problem);
    std::vector<const Batch*> batches;
    for (std::size_t p = 0; p < catalog.batches.size(); ++p) {
      if (method == Method::full_data || catalog.segment_of[p] == problem.current_train.segment_id) {
        batches.push_back(catalog.batches[p]);
      }
    }
    std::sort(batches.begin(), batches.end(),
              [](const Batch* a, const Batch* b) { return a->batch_id < b->batch_id; });
    const auto model_start = Clock::now();
    MlpClassifier model = make_model(problem.d, problem.c, selection.train);
    train(model, batches, problem.validation, selection.train);
    run.row.model_time_s = seconds_since(model_start);
    const Metrics m = evaluate(model, problem.test);
    run.row.accuracy = m.accuracy;
    run.row.f1 = m.f1;
    std::vector<std::uint64_t> ids;
    for (const Batch* b : batches) ids.push_back(b->batch_id);
    run.row.data_used = compute_data_used(ids, problem);
    run.row.total_time_s = seconds_since(start);
    return run;
  }

  SelectionConfig config = selection;
  config.segment_filter = method != Method::alg1_only;
  config.ranking_filter = method != Method::quilt_like;

  RandomForestIndex forest;
  const RandomForestIndex* forest_ptr = nullptr;
  double rf_time = 0.0;
  if (config.ranking_filter) {
    const auto rf_start = Clock::now();
    forest = train_forest(std::span<const Batch* const>(catalog_batches(problem).batches), config.forest);
    rf_time = seconds_since(rf_start);
    forest_ptr = &forest;
  }
  double tuning_time = 0.0;
  if (config.segment_filter && !config.threshold_grid.empty()) {
    const auto tune_start = Clock::now();
    config.disparity_threshold = tune_disparity_threshold(problem, config, forest_ptr);
    config.threshold_grid.clear();
    tuning_time = seconds_since(tune_start);
  }
  SelectionOutcome outcome = run_selection_training(problem, config, forest_ptr);
  if (auto violation = verify_trace(outcome, problem, config)) {
    throw TraceViolation("selection trace check failed: " + *violation);
  }
  const Metrics m = evaluate(outcome.model, problem.test);
  run.row.accuracy = m.accuracy;
  run.row.f1 = m.f1;
  run.row.data_used = outcome.data_used_fraction;
  run.row.rf_time_s = rf_time + outcome.rf_time_s;
  run.row.model_time_s = outcome.model_time_s + tuning_time;
  run.row.total_time_s = seconds_since(start);
  run.outcome = std::move(outcome);
  return run;
}

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config) {
  std::vector<MetricsRow> rows;
  for (std::uint64_t seed : config.seeds) {
    std::optional<Problem> problem;
    std::string stream_error;
    try {
      problem = make_problem(build_stream(config, seed), config.split);
    } catch (const std::exception& e) {
      stream_error = e.what();
    }
    const SelectionConfig selection = seeded_selection(config.selection, seed);
    for (Method method : config.methods) {
      MetricsRow failed;
      failed.dataset = config.dataset;
      failed.method = std::string(method_name(method));
      failed.seed = seed;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      failed.accuracy = failed.f1 = failed.rf_time_s = failed.model_time_s = failed.total_time_s =
          failed.data_used = nan;
      if (!problem) {
        failed.error = stream_error;
        rows.push_back(failed);
        continue;
      }
      try {
        MethodRun run = run_method(*problem, method, selection, seed, config.dataset);
        if (config.trace_dir && run.outcome) {
          std::filesystem::create_directories(*config.trace_dir);
          std::ofstream trace(*config.trace_dir / (config.dataset + "_" + run.row.method + "_" +
                                                   std::to_string(seed) + ".ndjson"));
          write_trace(trace, *run.outcome);
        }
        rows.push_back(std::move(run.row));
      } catch (const TraceViolation&) {
        throw;
      } catch (const std::exception& e) {
        failed.error = e.what();
        rows.push_back(failed);
      }
    }
  }
  return rows;
}

std::vector<CurvePoint> run_tradeoff_sweep(const ExperimentConfig& config,
                                           std::vector<double> fractions) {
  if (fractions.empty()) throw std::invalid_argument("sweep: no fractions");
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("sweep: fractions must lie in (0, 1]");
  }
  const Method method = config.methods.front();
  if (method == Method::full_data || method == Method::current_segment) {
    throw std::invalid_argument("sweep: method must be a selection method");
  }
  std::sort(fractions.begin(), fractions.end());
  fractions.erase(std::unique(fractions.begin(), fractions.end()), fractions.end());

  std::vector<CurvePoint> points;
  for (std::uint64_t seed : config.seeds) {
    const Problem problem = make_problem(build_stream(config, seed), config.split);
    SelectionConfig selection = seeded_selection(config.selection, seed);
    selection.segment_filter = method != Method::alg1_only;
    selection.ranking_filter = method != Method::quilt_like;
    RandomForestIndex forest;
    const RandomForestIndex* forest_ptr = nullptr;
    if (selection.ranking_filter) {
      forest = train_forest(std::span<const Batch* const>(catalog_batches(problem).batches),
                            selection.forest);
      forest_ptr = &forest;
    }
    if (selection.segment_filter && !selection.threshold_grid.empty()) {
      selection.disparity_threshold = tune_disparity_threshold(problem, selection, forest_ptr);
      selection.threshold_grid.clear();
    }
    for (double f : fractions) {
      SelectionConfig capped = selection;
      capped.budget_fraction = f;
      const SelectionOutcome outcome = run_selection_training(problem, capped, forest_ptr);
      if (auto violation = verify_trace(outcome, problem, capped)) {
        throw TraceViolation("selection trace check failed: " + *violation);
      }
      const Metrics m = evaluate(outcome.model, problem.test);
      points.push_back({f, seed, m.accuracy, m.f1, outcome.data_used_fraction});
    }
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.fraction < b.fraction; });
  return points;
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, bool header) {
  if (header) out << kMetricsHeader << '\n';
  for (const MetricsRow& r : rows) {
    out << r.dataset << ',' << r.method << ',' << r.seed;
    for (double v : {r.accuracy, r.f1, r.rf_time_s, r.model_time_s, r.total_time_s, r.data_used}) {
      out << ',';
      write_number(out, v);
    }
    out << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("metrics csv: no rows");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kMetricsHeader) {
    throw std::invalid_argument("metrics csv row 1: unexpected header '" + line + "'");
  }
  std::vector<MetricsRow> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw std::invalid_argument("metrics csv row " + std::to_string(row) + ": expected 9 fields");
    }
    MetricsRow r;
    r.dataset = fields[0];
    r.method = fields[1];
    const auto [end, ec] =
        std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), r.seed);
    if (ec != std::errc() || end != fields[2].data() + fields[2].size()) {
      throw std::invalid_argument("metrics csv row " + std::to_string(row) + ": bad seed");
    }
    r.accuracy = parse_double(fields[3], row);
    r.f1 = parse_double(fields[4], row);
    r.rf_time_s = parse_double(fields[5], row);
    r.model_time_s = parse_double(fields[6], row);
    r.total_time_s = parse_double(fields[7], row);
    r.data_used = parse_double(fields[8], row);
    if (std::isnan(r.accuracy)) r.error = "failed run";
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw std::invalid_argument("metrics csv: no rows");
  return rows;
}

void write_curve_csv(std::ostream& out, const ExperimentConfig& config,
                     const std::vector<CurvePoint>& points) {
  out << kCurveHeader << '\n';
  const std::string method(method_name(config.methods.front()));
  for (const CurvePoint& p : points) {
    out << config.dataset << ',' << method << ',';
    write_number(out, p.fraction);
    out << ',' << p.seed;
    for (double v : {p.accuracy, p.f1, p.data_used}) {
      out << ',';
      write_number(out, v);
    }
    out << '\n';
  }
}

}  // namespace driftsel
