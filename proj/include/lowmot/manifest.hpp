#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lowmot/tracker.hpp"

namespace lowmot {

inline constexpr const char* kToolVersion = "0.1.0";

// Audit record emitted next to every result file: configuration snapshot,
// inputs, seed and wall-clock per-stage timings.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  std::string output;
  std::string config_text;
  std::string mode;       // effective tracking mode for track runs
  double delta_t = 0.0;   // effective detection interval, seconds
  std::uint64_t seed = 0;
  StageTimings timings;
  long frames_read = 0;
  double max_step_ms = 0.0;

  std::string to_json() const;
  void write(const std::string& path) const;
};

}  // namespace lowmot
