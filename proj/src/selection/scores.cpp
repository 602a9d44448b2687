#include "driftsel/selection/scores.hpp"

#include <cmath>
#include <stdexcept>

#include "driftsel/kernels.hpp"

namespace driftsel {

namespace {
void check_lengths(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("gradient length mismatch");
}
}  // namespace

double gain_score(std::span<const double> g_d, std::span<const double> g_v) {
  check_lengths(g_d, g_v);
  return kernels::active().dot(g_d.data(), g_v.data(), g_d.size());
}

double disparity_score(std::span<const double> g_d, std::span<const double> g_v) {
  check_lengths(g_d, g_v);
  return std::sqrt(kernels::active().squared_distance(g_d.data(), g_v.data(), g_d.size()));
}

}  // namespace driftsel
