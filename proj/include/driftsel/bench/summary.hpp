#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "driftsel/bench/experiment.hpp"

namespace driftsel {

struct Stat {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single value
};

struct SummaryRow {
  std::string dataset;
  std::string method;
  std::size_t runs = 0;    // successful rows
  std::size_t failed = 0;  // rows with an error
  Stat accuracy;
  Stat f1;
  Stat rf_time_s;
  Stat model_time_s;
  Stat total_time_s;
  Stat data_used;
  bool best = false;  // highest mean accuracy for its dataset
};

Stat mean_sd(const std::vector<double>& values);

// Groups by (dataset, method) in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary);

}  // namespace driftsel
