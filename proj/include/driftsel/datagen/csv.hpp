#pragma once

#include <filesystem>
#include <stdexcept>
#include <iosfwd>
#include <string>
#include <vector>

#include "driftsel/datagen/stream.hpp"

namespace driftsel {

// Thrown for malformed CSV input; what() names the offending row (1-based,
// header is row 1).
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Reads a header row, then one sample per line. Every column except
// `label_column` is a feature, in header order. Labels must lie in [0, c).
std::vector<Sample> read_csv_samples(std::istream& in, const std::string& label_column,
                                     std::size_t c);

SegmentedStream load_csv(const std::filesystem::path& path, const std::string& label_column,
                         const StreamSpec& spec);

// Writes f0..f{d-1},label with shortest round-trip formatting.
void write_csv(std::ostream& out, const SegmentedStream& stream);
void write_csv(const std::filesystem::path& path, const SegmentedStream& stream);

}  // namespace driftsel
