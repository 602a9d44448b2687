#pragma once

#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "driftsel/datagen/stream.hpp"

namespace driftsel {

// JSON form of StreamSpec. Reading overlays the keys present in `j` onto
// `spec`, so a config can start from a published dataset shape and override
// only what it needs. Unknown keys are rejected.
void apply_stream_json(const nlohmann::json& j, StreamSpec& spec);
nlohmann::json stream_spec_to_json(const StreamSpec& spec);

// Throws std::invalid_argument naming the first key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view context);

}  // namespace driftsel
