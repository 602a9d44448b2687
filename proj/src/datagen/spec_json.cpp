#include "driftsel/datagen/spec_json.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace driftsel {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(context) + ": expected a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw std::invalid_argument(std::string(context) + ": unknown key '" + key + "'");
    }
  }
}

namespace {

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

void apply_params_json(const nlohmann::json& j, GeneratorParams& p) {
  reject_unknown_keys(j,
                      {"sea_thresholds", "rbf_centroids", "rbf_sigma", "rbf_flip_fraction",
                       "hyperplane_drift", "hyperplane_flip_probability", "hyperplane_step_every",
                       "covcon_alpha_same", "covcon_alpha_other", "covcon_band_lo",
                       "covcon_band_hi", "covcon_current_window", "covcon_current_slide"},
                      "stream.params");
  read_if(j, "sea_thresholds", p.sea_thresholds);
  read_if(j, "rbf_centroids", p.rbf_centroids);
  read_if(j, "rbf_sigma", p.rbf_sigma);
  read_if(j, "rbf_flip_fraction", p.rbf_flip_fraction);
  read_if(j, "hyperplane_drift", p.hyperplane_drift);
  read_if(j, "hyperplane_flip_probability", p.hyperplane_flip_probability);
  read_if(j, "hyperplane_step_every", p.hyperplane_step_every);
  read_if(j, "covcon_alpha_same", p.covcon_alpha_same);
  read_if(j, "covcon_alpha_other", p.covcon_alpha_other);
  read_if(j, "covcon_band_lo", p.covcon_band_lo);
  read_if(j, "covcon_band_hi", p.covcon_band_hi);
  read_if(j, "covcon_current_window", p.covcon_current_window);
  read_if(j, "covcon_current_slide", p.covcon_current_slide);
}

}  // namespace

void apply_stream_json(const nlohmann::json& j, StreamSpec& spec) {
  reject_unknown_keys(j,
                      {"generator", "total_size", "d", "c", "num_segments", "batches_per_segment",
                       "batch_size", "seed", "params"},
                      "stream");
  if (auto it = j.find("generator"); it != j.end()) {
    spec.generator = parse_generator(it->get<std::string>());
  }
  read_if(j, "total_size", spec.total_size);
  read_if(j, "d", spec.d);
  read_if(j, "c", spec.c);
  read_if(j, "num_segments", spec.num_segments);
  read_if(j, "batches_per_segment", spec.batches_per_segment);
  read_if(j, "batch_size", spec.batch_size);
  read_if(j, "seed", spec.seed);
  if (auto it = j.find("params"); it != j.end()) apply_params_json(*it, spec.params);
}

nlohmann::json stream_spec_to_json(const StreamSpec& spec) {
  const GeneratorParams& p = spec.params;
  return {
      {"generator", std::string(generator_name(spec.generator))},
      {"total_size", spec.total_size},
      {"d", spec.d},
      {"c", spec.c},
      {"num_segments", spec.num_segments},
      {"batches_per_segment", spec.batches_per_segment},
      {"batch_size", spec.batch_size},
      {"seed", spec.seed},
      {"params",
       {{"sea_thresholds", p.sea_thresholds},
        {"rbf_centroids", p.rbf_centroids},
        {"rbf_sigma", p.rbf_sigma},
        {"rbf_flip_fraction", p.rbf_flip_fraction},
        {"hyperplane_drift", p.hyperplane_drift},
        {"hyperplane_flip_probability", p.hyperplane_flip_probability},
        {"hyperplane_step_every", p.hyperplane_step_every},
        {"covcon_alpha_same", p.covcon_alpha_same},
        {"covcon_alpha_other", p.covcon_alpha_other},
        {"covcon_band_lo", p.covcon_band_lo},
        {"covcon_band_hi", p.covcon_band_hi},
        {"covcon_current_window", p.covcon_current_window},
        {"covcon_current_slide", p.covcon_current_slide}}},
  };
}

}  // namespace driftsel
