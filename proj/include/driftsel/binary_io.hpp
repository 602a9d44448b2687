#pragma once

// Little helpers for the versioned binary artifacts (forest index, model
// checkpoints). Values are stored in host byte order; the header records it.

#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace driftsel::io {

struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename T>
void put(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw FormatError("truncated artifact");
  return value;
}

template <typename T>
void put_vector(std::ostream& out, const std::vector<T>& values) {
  put<std::uint64_t>(out, values.size());
  if (!values.empty()) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(T)));
  }
}

template <typename T>
std::vector<T> get_vector(std::istream& in, std::uint64_t max_size = 1ULL << 34) {
  const auto n = get<std::uint64_t>(in);
  if (n > max_size) throw FormatError("implausible array length in artifact");
  std::vector<T> values(n);
  if (n > 0) {
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(T)));
    if (!in) throw FormatError("truncated artifact");
  }
  return values;
}

constexpr std::uint32_t kByteOrderMark = 0x01020304;

inline void put_header(std::ostream& out, const char (&magic)[5], std::uint32_t version) {
  out.write(magic, 4);
  put(out, version);
  put(out, kByteOrderMark);
}

inline void check_header(std::istream& in, const char (&magic)[5], std::uint32_t version) {
  char tag[4];
  in.read(tag, 4);
  if (!in || std::string(tag, 4) != std::string(magic, 4)) {
    throw FormatError(std::string("not a ") + magic + " artifact");
  }
  const auto found = get<std::uint32_t>(in);
  if (found != version) {
    throw FormatError(std::string(magic) + " version " + std::to_string(found) +
                      " is not supported (expected " + std::to_string(version) + ")");
  }
  if (get<std::uint32_t>(in) != kByteOrderMark) {
    throw FormatError("artifact was written with a different byte order");
  }
}

}  // namespace driftsel::io
