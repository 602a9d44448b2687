#include "driftsel/datagen/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace driftsel {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(std::size_t row, const std::string& message) {
  throw CsvError("csv row " + std::to_string(row) + ": " + message);
}

}  // namespace

std::vector<Sample> read_csv_samples(std::istream& in, const std::string& label_column,
                                     std::size_t c) {
  std::string line;
  std::size_t row = 0;
  std::vector<std::string_view> header;
  std::string header_line;
  while (std::getline(in, header_line)) {
    ++row;
    if (!trim(header_line).empty()) break;
  }
  if (trim(header_line).empty()) throw CsvError("csv: no rows");
  header = split_fields(header_line);
  std::size_t label_index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) == label_column) label_index = i;
  }
  if (label_index == header.size()) fail(row, "no column named '" + label_column + "'");
  if (header.size() < 2) fail(row, "need at least one feature column");

  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(row, "expected " + std::to_string(header.size()) + " fields, got " +
                    std::to_string(fields.size()));
    }
    Sample sample;
    sample.features.reserve(header.size() - 1);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string_view field = trim(fields[i]);
      if (i == label_index) {
        long long label = -1;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), label);
        if (ec != std::errc() || end != field.data() + field.size()) {
          fail(row, "label '" + std::string(field) + "' is not an integer");
        }
        if (label < 0 || static_cast<std::size_t>(label) >= c) {
          fail(row, "label " + std::to_string(label) + " outside [0, " + std::to_string(c) + ")");
        }
        sample.label = static_cast<int>(label);
        continue;
      }
      double value = 0.0;
      const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || end != field.data() + field.size() || field.empty()) {
        fail(row, "column '" + std::string(trim(header[i])) + "' value '" + std::string(field) +
                      "' is not numeric");
      }
      if (!std::isfinite(value)) fail(row, "non-finite feature value");
      sample.features.push_back(value);
    }
    samples.push_back(std::move(sample));
  }
  if (samples.empty()) throw CsvError("csv: no rows");
  return samples;
}

SegmentedStream load_csv(const std::filesystem::path& path, const std::string& label_column,
                         const StreamSpec& spec) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string());
  std::vector<Sample> samples = read_csv_samples(in, label_column, spec.c);
  if (samples.front().features.size() != spec.d) {
    throw CsvError("csv has " + std::to_string(samples.front().features.size()) +
                   " feature columns, spec expects " + std::to_string(spec.d));
  }
  if (samples.size() < spec.used_size()) {
    throw CsvError("csv has " + std::to_string(samples.size()) + " rows, spec needs " +
                   std::to_string(spec.used_size()));
  }
  return segment_samples(spec, std::move(samples));
}

void write_csv(std::ostream& out, const SegmentedStream& stream) {
  for (std::size_t j = 0; j < stream.spec.d; ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[64];
  for (const auto& segment : stream.segments) {
    for (const auto& batch : segment.batches) {
      for (const auto& sample : batch.samples) {
        for (double v : sample.features) {
          const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
          out.write(buf, end - buf);
          out.put(',');
        }
        out << sample.label << '\n';
      }
    }
  }
}

void write_csv(const std::filesystem::path& path, const SegmentedStream& stream) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string());
  write_csv(out, stream);
  if (!out) throw CsvError("write failed for " + path.string());
}

}  // namespace driftsel
