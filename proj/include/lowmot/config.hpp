#pragma once

#include <string>

#include "lowmot/tracker.hpp"

namespace lowmot {

/// Flat `key = value` file, `#` comments. Unknown keys are an error;
/// missing keys keep their defaults.
PipelineConfig load_config(const std::string& path);

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& origin);

/// Serializes every tunable with its current value, one key per line.
std::string config_to_text(const PipelineConfig& config);

}  // namespace lowmot
