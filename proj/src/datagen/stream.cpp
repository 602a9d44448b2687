#include "driftsel/datagen/stream.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace driftsel {

std::size_t Segment::sample_count() const {
  std::size_t n = 0;
  for (const auto& batch : batches) n += batch.samples.size();
  return n;
}

std::string_view generator_name(Generator g) {
  switch (g) {
    case Generator::sea:
      return "SEA";
    case Generator::random_rbf:
      return "RandomRBF";
    case Generator::sine:
      return "Sine";
    case Generator::hyperplane:
      return "Hyperplane";
    case Generator::covcon:
      return "Covcon";
    case Generator::csv:
      return "CSV";
  }
  return "unknown";
}

Generator parse_generator(std::string_view name) {
  for (Generator g : {Generator::sea, Generator::random_rbf, Generator::sine, Generator::hyperplane,
                      Generator::covcon, Generator::csv}) {
    if (name == generator_name(g)) return g;
  }
  throw std::invalid_argument("unknown generator '" + std::string(name) + "'");
}

namespace {

struct Table1Row {
  std::string_view name;
  Generator generator;
  std::size_t total_size;
  std::size_t d;
  std::size_t c;
  std::size_t num_segments;
  std::size_t batches_per_segment;
  std::size_t batch_size;
};

constexpr Table1Row kTable1[] = {
    {"SEA", Generator::sea, 16000, 3, 2, 8, 20, 100},
    {"RandomRBF", Generator::random_rbf, 16000, 10, 2, 8, 20, 100},
    {"Sine", Generator::sine, 16000, 4, 2, 8, 20, 100},
    {"Hyperplane", Generator::hyperplane, 16000, 10, 2, 8, 20, 100},
    {"Covcon", Generator::covcon, 10000, 2, 2, 5, 2, 1000},
    {"Covcon_5M", Generator::covcon, 5000000, 2, 2, 10, 10, 50000},
    {"Electricity", Generator::csv, 43200, 6, 2, 10, 20, 216},
    {"Weather", Generator::csv, 18000, 8, 2, 10, 20, 90},
    {"Spam", Generator::csv, 9324, 499, 2, 9, 14, 74},
    {"Usenet1", Generator::csv, 1500, 99, 2, 5, 2, 150},
    {"Usenet2", Generator::csv, 1500, 99, 2, 5, 3, 100},
    {"Covertype", Generator::csv, 581012, 54, 7, 10, 10, 5810},
};

const Table1Row& find_row(std::string_view dataset) {
  for (const auto& row : kTable1) {
    if (row.name == dataset) return row;
  }
  throw std::invalid_argument("unknown dataset '" + std::string(dataset) + "'");
}

}  // namespace

StreamSpec table1_spec(std::string_view dataset) {
  const Table1Row& row = find_row(dataset);
  StreamSpec spec;
  spec.generator = row.generator;
  spec.total_size = row.total_size;
  spec.d = row.d;
  spec.c = row.c;
  spec.num_segments = row.num_segments;
  spec.batches_per_segment = row.batches_per_segment;
  spec.batch_size = row.batch_size;
  return spec;
}

std::vector<std::string> table1_datasets() {
  std::vector<std::string> names;
  for (const auto& row : kTable1) names.emplace_back(row.name);
  return names;
}

void validate_spec(const StreamSpec& spec) {
  if (spec.d == 0) throw std::invalid_argument("stream spec: d must be positive");
  if (spec.c < 2) throw std::invalid_argument("stream spec: need at least 2 classes");
  if (spec.num_segments == 0 || spec.batches_per_segment == 0 || spec.batch_size == 0) {
    throw std::invalid_argument("stream spec: segment and batch counts must be positive");
  }
  if (spec.used_size() > spec.total_size) {
    throw std::invalid_argument("stream spec: num_segments * batches_per_segment * batch_size (" +
                                std::to_string(spec.used_size()) + ") exceeds total_size (" +
                                std::to_string(spec.total_size) + ")");
  }
}

void validate_spec_strict(const StreamSpec& spec, std::string_view dataset) {
  validate_spec(spec);
  const Table1Row& row = find_row(dataset);
  if (spec.generator != row.generator || spec.total_size != row.total_size || spec.d != row.d ||
      spec.c != row.c || spec.num_segments != row.num_segments ||
      spec.batches_per_segment != row.batches_per_segment || spec.batch_size != row.batch_size) {
    throw std::invalid_argument("stream spec does not match the published shape of " +
                                std::string(dataset));
  }
}

SegmentedStream segment_samples(const StreamSpec& spec, std::vector<Sample> samples) {
  validate_spec(spec);
  if (samples.size() < spec.used_size()) {
    throw std::invalid_argument("stream has " + std::to_string(samples.size()) +
                                " samples, spec needs " + std::to_string(spec.used_size()));
  }
  SegmentedStream stream;
  stream.spec = spec;
  stream.segments.resize(spec.num_segments);
  std::size_t next = 0;
  std::uint64_t batch_id = 0;
  for (std::size_t s = 0; s < spec.num_segments; ++s) {
    Segment& segment = stream.segments[s];
    segment.segment_id = static_cast<std::uint32_t>(s);
    segment.batches.resize(spec.batches_per_segment);
    for (auto& batch : segment.batches) {
      batch.batch_id = batch_id++;
      batch.samples.reserve(spec.batch_size);
      for (std::size_t i = 0; i < spec.batch_size; ++i) {
        batch.samples.push_back(std::move(samples[next++]));
      }
    }
  }
  stream.current = spec.num_segments - 1;
  return stream;
}

CurrentSplit split_current_segment(const SegmentedStream& stream, SplitRatios ratios) {
  if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) || !(ratios.test > 0.0)) {
    throw std::invalid_argument("split ratios must all be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  const Segment& segment = stream.current_segment();
  std::vector<const Sample*> flat;
  for (const auto& batch : segment.batches) {
    for (const auto& sample : batch.samples) flat.push_back(&sample);
  }
  const std::size_t n = flat.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  const auto n_val =
      static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n) {
    throw std::invalid_argument("current segment of " + std::to_string(n) +
                                " samples is too small for the requested split");
  }

  CurrentSplit split;
  const std::size_t batch_size = stream.spec.batch_size;
  std::uint64_t next_id = segment.batches.front().batch_id;
  for (std::size_t i = 0; i < n_train; i += batch_size) {
    Batch batch;
    batch.batch_id = next_id++;
    for (std::size_t j = i; j < std::min(n_train, i + batch_size); ++j) {
      batch.samples.push_back(*flat[j]);
    }
    split.train.push_back(std::move(batch));
  }
  for (std::size_t i = n_train; i < n_train + n_val; ++i) split.validation.push_back(*flat[i]);
  for (std::size_t i = n_train + n_val; i < n; ++i) split.test.push_back(*flat[i]);
  return split;
}

std::size_t Problem::training_sample_count() const {
  std::size_t n = current_train.sample_count();
  for (const auto& segment : previous) n += segment.sample_count();
  return n;
}

std::size_t Problem::batch_count() const {
  std::size_t n = current_train.batches.size();
  for (const auto& segment : previous) n += segment.batches.size();
  return n;
}

Problem make_problem(const SegmentedStream& stream, SplitRatios ratios) {
  CurrentSplit split = split_current_segment(stream, ratios);
  Problem problem;
  problem.d = stream.spec.d;
  problem.c = stream.spec.c;
  problem.previous.assign(stream.segments.begin(),
                          stream.segments.begin() + static_cast<std::ptrdiff_t>(stream.current));
  problem.current_train.segment_id = stream.current_segment().segment_id;
  problem.current_train.batches = std::move(split.train);
  problem.validation = std::move(split.validation);
  problem.test = std::move(split.test);
  return problem;
}

}  // namespace driftsel
