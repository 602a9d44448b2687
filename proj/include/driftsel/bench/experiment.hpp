#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "driftsel/datagen/stream.hpp"
#include "driftsel/selection/selector.hpp"

namespace driftsel {

// A selection trace broke the selection rule; never swallowed by the harness.
struct TraceViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Method { full_data, current_segment, alg1_only, ours, quilt_like };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

struct ExperimentConfig {
  std::string dataset;  // label for the rows; a published name picks its default shape
  StreamSpec stream;
  std::optional<std::filesystem::path> csv_path;
  std::string label_column = "label";
  std::vector<Method> methods{Method::ours};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  SelectionConfig selection;
  SplitRatios split;
  bool strict_table1 = false;
  std::optional<std::filesystem::path> trace_dir;  // NDJSON selection traces
};

// Reads the JSON experiment config. Relative csv/trace paths resolve against
// `base_dir`. Throws std::invalid_argument with the offending key.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

struct MetricsRow {
  std::string dataset;
  std::string method;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double rf_time_s = 0.0;
  double model_time_s = 0.0;
  double total_time_s = 0.0;
  double data_used = 0.0;
  std::string error;  // non-empty for a failed run; metrics are then NaN

  bool failed() const { return !error.empty(); }
};

inline constexpr std::string_view kMetricsHeader =
    "dataset,method,seed,accuracy,f1,rf_time_s,model_time_s,total_time_s,data_used";

// Builds the stream for one seed (generated, or loaded from CSV).
SegmentedStream build_stream(const ExperimentConfig& config, std::uint64_t seed);

// Per-seed configs derived from the run seed.
SelectionConfig seeded_selection(const SelectionConfig& base, std::uint64_t seed);

struct MethodRun {
  MetricsRow row;
  std::optional<SelectionOutcome> outcome;
};

// Trains one method on one problem and scores it on the problem's test split.
// Selection methods have their trace verified; a violation throws
// TraceViolation.
MethodRun run_method(const Problem& problem, Method method, const SelectionConfig& selection,
                     std::uint64_t seed, const std::string& dataset);

// Every (method, seed) cell; failures are recorded in the row and the run goes on.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config);

struct CurvePoint {
  double fraction = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double f1 = 0.0;
  double data_used = 0.0;
};

inline constexpr std::string_view kCurveHeader = "dataset,method,fraction,seed,accuracy,f1,data_used";

// Caps the selector's data budget at each fraction. Points are sorted by
// fraction, then seed. Uses the first configured method, which must select.
std::vector<CurvePoint> run_tradeoff_sweep(const ExperimentConfig& config,
                                           std::vector<double> fractions);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows, bool header = true);
std::vector<MetricsRow> read_metrics_csv(std::istream& in);
void write_curve_csv(std::ostream& out, const ExperimentConfig& config,
                     const std::vector<CurvePoint>& points);

}  // namespace driftsel
