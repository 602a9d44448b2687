#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "driftsel/bench/experiment.hpp"
#include "driftsel/bench/summary.hpp"
#include "driftsel/datagen/csv.hpp"
#include "driftsel/kernels.hpp"

using namespace driftsel;

namespace {

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw std::invalid_argument("bad fraction '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--fractions is empty");
  return out;
}

ExperimentConfig load(const std::string& path, bool strict) {
  ExperimentConfig config = load_experiment_config(path);
  if (strict) {
    config.strict_table1 = true;
    validate_spec_strict(config.stream, config.dataset);
  }
  return config;
}

// Writes to `path`, or stdout when it is "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-aware training data selection: experiments and benchmarks"};
  app.require_subcommand(1);
  bool strict = false;
  app.add_flag("--strict-table1", strict, "Require published dataset shapes");

  std::string config_path, out_path = "-", in_path, trace_dir, fractions_text;
  std::uint64_t seed = 1;
  std::string dataset;

  auto* run = app.add_subcommand("run", "Run every configured method and seed");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "Metrics CSV ('-' for stdout)");
  run->add_option("--trace-dir", trace_dir, "Directory for per-run selection traces (NDJSON)");

  auto* sweep = app.add_subcommand("sweep", "Accuracy versus data budget curve");
  sweep->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--fractions", fractions_text, "Comma-separated budgets in (0, 1]")->required();
  sweep->add_option("--out", out_path, "Curve CSV ('-' for stdout)");

  auto* summarize_cmd = app.add_subcommand("summarize", "Mean and sd per dataset and method");
  summarize_cmd->add_option("--in", in_path, "Metrics CSV from 'run'")->required()->check(CLI::ExistingFile);
  summarize_cmd->add_option("--out", out_path, "Summary CSV ('-' for stdout)");

  auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic stream as CSV");
  generate_cmd->add_option("--config", config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  generate_cmd->add_option("--dataset", dataset, "Published dataset name, e.g. SEA");
  generate_cmd->add_option("--seed", seed, "Stream seed");
  generate_cmd->add_option("--out", out_path, "CSV path ('-' for stdout)");

  app.add_subcommand("isa", "Print the vector kernel variant in use");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ExperimentConfig config = load(config_path, strict);
      if (!trace_dir.empty()) config.trace_dir = trace_dir;
      const auto rows = run_experiment(config);
      emit(out_path, [&](std::ostream& out) { write_metrics_csv(out, rows); });
      for (const auto& r : rows) {
        if (r.failed()) {
          std::cerr << "warning: " << r.dataset << "/" << r.method << " seed " << r.seed
                    << " failed: " << r.error << "\n";
        }
      }
    } else if (*sweep) {
      const ExperimentConfig config = load(config_path, strict);
      const auto points = run_tradeoff_sweep(config, parse_fractions(fractions_text));
      emit(out_path, [&](std::ostream& out) { write_curve_csv(out, config, points); });
    } else if (*summarize_cmd) {
      std::ifstream in(in_path);
      const auto summary = summarize(read_metrics_csv(in));
      emit(out_path, [&](std::ostream& out) { write_summary_csv(out, summary); });
    } else if (*generate_cmd) {
      ExperimentConfig config;
      if (!config_path.empty()) {
        config = load(config_path, strict);
      } else if (!dataset.empty()) {
        config.dataset = dataset;
        config.stream = table1_spec(dataset);
      } else {
        throw std::invalid_argument("generate needs --config or --dataset");
      }
      const SegmentedStream stream = build_stream(config, seed);
      emit(out_path, [&](std::ostream& out) { write_csv(out, stream); });
    } else {
      std::cout << kernels::isa_name(kernels::active().isa) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
