#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "driftsel/bench/experiment.hpp"
#include "driftsel/bench/summary.hpp"
#include "driftsel/datagen/csv.hpp"
#include "helpers.hpp"

using namespace driftsel;

namespace {

ExperimentConfig small_config(const char* dataset = "SEA") {
  nlohmann::json j = {
      {"dataset", dataset},
      {"stream", {{"total_size", 1600}, {"num_segments", 4}, {"batches_per_segment", 4}, {"batch_size", 100}}},
      {"methods", {"full_data", "current_segment", "alg1_only", "quilt_like", "ours"}},
      {"seeds", {1, 2}},
      {"selection", {{"train", {{"hidden", 16}, {"max_epochs", 60}}}, {"forest", {{"n_estimators", 5}}}}},
  };
  return experiment_config_from_json(j);
}

MetricsRow row(const std::string& dataset, const std::string& method, std::uint64_t seed, double acc) {
  MetricsRow r;
  r.dataset = dataset;
  r.method = method;
  r.seed = seed;
  r.accuracy = acc;
  r.f1 = acc / 2;
  r.rf_time_s = 0.1 * static_cast<double>(seed);
  r.model_time_s = 0.2;
  r.total_time_s = 0.4;
  r.data_used = 0.5;
  return r;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("oracle"), std::invalid_argument);
}

TEST_CASE("experiment config JSON") {
  const ExperimentConfig c = small_config();
  CHECK(c.dataset == "SEA");
  CHECK(c.stream.generator == Generator::sea);
  CHECK(c.stream.d == 3);
  CHECK(c.stream.batch_size == 100);
  CHECK(c.methods.size() == 5);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(c.selection.train.hidden == 16);
  CHECK(c.selection.forest.n_estimators == 5);
  CHECK(c.selection.disparity_threshold == 1.0);

  const ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(c));
  CHECK(experiment_config_to_json(back) == experiment_config_to_json(c));
  CHECK(back.stream == c.stream);
  CHECK(back.selection.train == c.selection.train);
  CHECK(back.selection.forest == c.selection.forest);

  const nlohmann::json grid = {{"dataset", "Sine"}, {"selection", {{"threshold_search", "grid"}}}};
  CHECK(experiment_config_from_json(grid).selection.threshold_grid.size() == 20);

  using nlohmann::json;
  CHECK_THROWS_WITH_AS(experiment_config_from_json(json{{"dataset", "SEA"}, {"sede", {1}}}),
                       doctest::Contains("sede"), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"seeds", {1}}}), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"dataset", "SEA"}, {"seeds", json::array()}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"dataset", "SEA"}, {"method", "best"}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      experiment_config_from_json(json{{"dataset", "SEA"}, {"selection", {{"train", {{"learning_rate", -1}}}}}}),
      std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"dataset", "Mystery"}}), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"dataset", "Electricity"}}), std::invalid_argument);
  CHECK_THROWS_AS(experiment_config_from_json(json{{"dataset", "SEA"},
                                                   {"strict_table1", true},
                                                   {"stream", {{"total_size", 1600}, {"num_segments", 4}, {"batches_per_segment", 4}}}}),
                  std::invalid_argument);
}

TEST_CASE("config files allow comments and resolve CSV paths") {
  const auto dir = std::filesystem::temp_directory_path() / "driftsel_cfg_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "cfg.json");
    out << "// comment\n{\"dataset\": \"mine\", \"csv\": {\"path\": \"data.csv\"},\n"
           " \"stream\": {\"total_size\": 40, \"d\": 2, \"num_segments\": 2, \"batches_per_segment\": 2,"
           " \"batch_size\": 10}}\n";
  }
  const ExperimentConfig c = load_experiment_config(dir / "cfg.json");
  CHECK(c.stream.generator == Generator::csv);
  CHECK(*c.csv_path == dir / "data.csv");
  CHECK_THROWS_AS(load_experiment_config(dir / "missing.json"), std::invalid_argument);
  std::filesystem::remove_all(dir);
}

TEST_CASE("experiment rows: schema, accounting, determinism, timing") {
  const ExperimentConfig c = small_config();
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 10);
  std::map<std::string, int> per_method;
  for (const MetricsRow& r : rows) {
    CAPTURE(r.method);
    CHECK_FALSE(r.failed());
    ++per_method[r.method];
    CHECK((r.accuracy >= 0.0 && r.accuracy <= 1.0));
    CHECK((r.f1 >= 0.0 && r.f1 <= 1.0));
    CHECK((r.data_used > 0.0 && r.data_used <= 1.0));
    CHECK(r.rf_time_s >= 0.0);
    CHECK(r.model_time_s >= 0.0);
    CHECK(r.rf_time_s + r.model_time_s <= r.total_time_s + 0.1);
    if (r.method == "full_data") CHECK(r.data_used == 1.0);
    if (r.method == "current_segment") CHECK(r.data_used == doctest::Approx(240.0 / 1440.0));
    if (r.method == "full_data" || r.method == "current_segment" || r.method == "quilt_like") {
      CHECK(r.rf_time_s == 0.0);
    }
  }
  for (const auto& [m, n] : per_method) CHECK(n == 2);

  const auto again = run_experiment(c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(again[i].accuracy == rows[i].accuracy);
    CHECK(again[i].f1 == rows[i].f1);
    CHECK(again[i].data_used == rows[i].data_used);
  }
}

TEST_CASE("failed runs are recorded and the run continues") {
  ExperimentConfig c = small_config();
  c.stream.generator = Generator::csv;
  c.csv_path = std::filesystem::temp_directory_path() / "driftsel_no_such_file.csv";
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 10);
  for (const MetricsRow& r : rows) {
    CHECK(r.failed());
    CHECK(std::isnan(r.accuracy));
  }
}

TEST_CASE("CSV-backed experiment") {
  ExperimentConfig c = small_config();
  const auto stream = build_stream(c, 4);
  const auto path = std::filesystem::temp_directory_path() / "driftsel_bench_stream.csv";
  write_csv(path, stream);
  c.stream.generator = Generator::csv;
  c.csv_path = path;
  c.methods = {Method::ours};
  c.seeds = {4};
  CHECK(build_stream(c, 4).segments == stream.segments);
  const auto rows = run_experiment(c);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].failed());
  std::filesystem::remove(path);
}

TEST_CASE("trace files are written per selection run") {
  ExperimentConfig c = small_config();
  c.methods = {Method::full_data, Method::ours};
  c.seeds = {3};
  const auto dir = std::filesystem::temp_directory_path() / "driftsel_traces";
  std::filesystem::remove_all(dir);
  c.trace_dir = dir;
  run_experiment(c);
  CHECK(std::filesystem::exists(dir / "SEA_ours_3.ndjson"));
  CHECK_FALSE(std::filesystem::exists(dir / "SEA_full_data_3.ndjson"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("trade-off sweep") {
  ExperimentConfig c = small_config("Sine");
  c.methods = {Method::ours};
  c.seeds = {1};
  const auto points = run_tradeoff_sweep(c, {1.0, 0.3, 0.6});
  REQUIRE(points.size() == 3);
  CHECK(points[0].fraction == 0.3);
  CHECK(points[1].fraction == 0.6);
  CHECK(points[2].fraction == 1.0);
  for (const auto& p : points) CHECK(p.data_used <= p.fraction + 1e-12);

  const auto rows = run_experiment(c);
  CHECK(points[2].accuracy == rows[0].accuracy);
  CHECK(points[2].data_used == rows[0].data_used);

  CHECK_THROWS_AS(run_tradeoff_sweep(c, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(run_tradeoff_sweep(c, {1.5}), std::invalid_argument);
  CHECK_THROWS_AS(run_tradeoff_sweep(c, {}), std::invalid_argument);
  c.methods = {Method::full_data};
  CHECK_THROWS_AS(run_tradeoff_sweep(c, {0.5}), std::invalid_argument);

  std::ostringstream out;
  write_curve_csv(out, small_config("Sine"), points);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == kCurveHeader);
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 3);
}

TEST_CASE("metrics CSV round trip") {
  std::vector<MetricsRow> rows{row("SEA", "ours", 1, 0.9), row("SEA", "full_data", 2, 0.125)};
  rows.push_back(row("Sine", "ours", 3, 0.0));
  rows.back().accuracy = std::numeric_limits<double>::quiet_NaN();
  std::stringstream buf;
  write_metrics_csv(buf, rows);
  std::string header;
  std::getline(buf, header);
  CHECK(header == kMetricsHeader);
  buf.seekg(0);
  const auto back = read_metrics_csv(buf);
  REQUIRE(back.size() == 3);
  CHECK(back[0].accuracy == 0.9);
  CHECK(back[1].accuracy == 0.125);
  CHECK(back[1].rf_time_s == rows[1].rf_time_s);
  CHECK(std::isnan(back[2].accuracy));

  std::istringstream empty("");
  CHECK_THROWS_AS(read_metrics_csv(empty), std::invalid_argument);
  std::istringstream wrong("a,b\n");
  CHECK_THROWS_AS(read_metrics_csv(wrong), std::invalid_argument);
  std::istringstream short_row(std::string(kMetricsHeader) + "\nSEA,ours,1,0.5\n");
  CHECK_THROWS_WITH_AS(read_metrics_csv(short_row), doctest::Contains("row 2"), std::invalid_argument);
}

TEST_CASE("summary statistics") {
  Stat s = mean_sd({0.7});
  CHECK(s.mean == 0.7);
  CHECK(s.sd == 0.0);
  s = mean_sd({0.9, 1.0});
  CHECK(s.mean == doctest::Approx(0.95));
  CHECK(s.sd == doctest::Approx(std::sqrt(0.005)));
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);

  const auto single = summarize({row("SEA", "ours", 1, 0.8)});
  REQUIRE(single.size() == 1);
  CHECK(single[0].accuracy.mean == 0.8);
  CHECK(single[0].accuracy.sd == 0.0);
  CHECK(single[0].best);
}

TEST_CASE("summary equals an independent recount") {
  Rng rng(41);
  std::vector<MetricsRow> rows;
  const char* datasets[] = {"SEA", "Sine"};
  const char* methods[] = {"ours", "full_data", "alg1_only"};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const char* d : datasets) {
      for (const char* m : methods) rows.push_back(row(d, m, seed, uniform01(rng)));
    }
  }
  rows.push_back(row("SEA", "ours", 9, 0.0));
  rows.back().error = "diverged";
  rows.back().accuracy = std::numeric_limits<double>::quiet_NaN();

  const auto summary = summarize(rows);
  REQUIRE(summary.size() == 6);
  std::map<std::string, double> best_mean;
  for (const SummaryRow& s : summary) {
    std::vector<double> acc;
    std::size_t failed = 0;
    for (const MetricsRow& r : rows) {
      if (r.dataset != s.dataset || r.method != s.method) continue;
      if (r.failed()) {
        ++failed;
        continue;
      }
      acc.push_back(r.accuracy);
    }
    double mean = 0;
    for (double a : acc) mean += a;
    mean /= static_cast<double>(acc.size());
    double var = 0;
    for (double a : acc) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(acc.size() - 1));
    CHECK(s.runs == acc.size());
    CHECK(s.failed == failed);
    CHECK(s.accuracy.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(s.accuracy.sd == doctest::Approx(sd).epsilon(1e-12));
    CHECK(s.rf_time_s.mean == doctest::Approx(0.3));
    best_mean[s.dataset] = std::max(best_mean[s.dataset], mean);
  }
  for (const SummaryRow& s : summary) {
    CHECK(s.best == (std::abs(s.accuracy.mean - best_mean[s.dataset]) < 1e-15));
  }
  std::ostringstream out;
  write_summary_csv(out, summary);
  CHECK(out.str().find("SEA,ours") != std::string::npos);
}
