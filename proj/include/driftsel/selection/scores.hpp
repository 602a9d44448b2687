#pragma once

#include <span>

namespace driftsel {

// Gain: plain dot product of two mean gradients. Positive gain predicts that a
// step on the candidate data lowers the validation loss.
double gain_score(std::span<const double> g_d, std::span<const double> g_v);

// Disparity: Euclidean distance between two mean gradients.
double disparity_score(std::span<const double> g_d, std::span<const double> g_v);

}  // namespace driftsel
