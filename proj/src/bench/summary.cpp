#include "driftsel/bench/summary.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace driftsel {

Stat mean_sd(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return {NAN, NAN};
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::vector<SummaryRow> summarize(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("summarize: no rows");
  std::vector<std::pair<std::string, std::string>> keys;
  std::vector<std::vector<const MetricsRow*>> groups;
  for (const MetricsRow& r : rows) {
    std::size_t g = 0;
    while (g < keys.size() && (keys[g].first != r.dataset || keys[g].second != r.method)) ++g;
    if (g == keys.size()) {
      keys.emplace_back(r.dataset, r.method);
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    SummaryRow s;
    s.dataset = keys[g].first;
    s.method = keys[g].second;
    std::vector<double> acc, f1, rf, model, total, used;
    for (const MetricsRow* r : groups[g]) {
      if (r->failed()) {
        ++s.failed;
        continue;
      }
      acc.push_back(r->accuracy);
      f1.push_back(r->f1);
      rf.push_back(r->rf_time_s);
      model.push_back(r->model_time_s);
      total.push_back(r->total_time_s);
      used.push_back(r->data_used);
    }
    s.runs = acc.size();
    s.accuracy = mean_sd(acc);
    s.f1 = mean_sd(f1);
    s.rf_time_s = mean_sd(rf);
    s.model_time_s = mean_sd(model);
    s.total_time_s = mean_sd(total);
    s.data_used = mean_sd(used);
    out.push_back(s);
  }
  for (SummaryRow& s : out) {
    if (s.runs == 0) continue;
    bool top = true;
    for (const SummaryRow& other : out) {
      if (other.dataset == s.dataset && other.runs > 0 && other.accuracy.mean > s.accuracy.mean) {
        top = false;
      }
    }
    s.best = top;
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& summary) {
  out << "dataset,method,runs,failed,accuracy_mean,accuracy_sd,f1_mean,f1_sd,rf_time_s_mean,"
         "rf_time_s_sd,model_time_s_mean,model_time_s_sd,total_time_s_mean,total_time_s_sd,"
         "data_used_mean,data_used_sd,best\n";
  out << std::setprecision(6);
  for (const SummaryRow& s : summary) {
    out << s.dataset << ',' << s.method << ',' << s.runs << ',' << s.failed;
    for (const Stat& st : {s.accuracy, s.f1, s.rf_time_s, s.model_time_s, s.total_time_s, s.data_used}) {
      out << ',' << st.mean << ',' << st.sd;
    }
    out << ',' << (s.best ? 1 : 0) << '\n';
  }
}

}  // namespace driftsel
