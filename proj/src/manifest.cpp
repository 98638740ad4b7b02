#include "lowmot/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "lowmot/mot_io.hpp"

namespace lowmot {

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["command"] = command;
  j["inputs"] = inputs;
  j["output"] = output;
  j["config"] = config_text;
  if (!mode.empty()) {
    j["mode"] = mode;
    j["delta_t"] = delta_t;
  }
  j["seed"] = seed;
  j["frames_read"] = frames_read;
  j["timings_ms"] = {
      {"visual_tracking", timings.vt_ms},
      {"association", timings.association_ms},
      {"kalman", timings.kalman_ms},
      {"io", timings.io_ms},
      {"total", timings.total_ms()},
      {"steps", timings.steps},
      {"max_step", max_step_ms},
  };
  return j.dump(2);
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path);
  out << to_json() << "\n";
}

}  // namespace lowmot
