#include "lowmot/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "lowmot/mot_io.hpp"

namespace lowmot {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double to_number(const std::string& value, const std::string& key,
                 const std::string& origin) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw IoError(origin + ": bad numeric value for " + key);
  }
}

Stage1Gate parse_gate(const std::string& value, const std::string& origin) {
  if (value == "bbd") return Stage1Gate::kBbd;
  if (value == "mahalanobis") return Stage1Gate::kMahalanobis;
  if (value == "none") return Stage1Gate::kNone;
  throw IoError(origin + ": stage1_gate must be bbd, mahalanobis or none");
}

const char* gate_name(Stage1Gate gate) {
  switch (gate) {
    case Stage1Gate::kBbd: return "bbd";
    case Stage1Gate::kMahalanobis: return "mahalanobis";
    case Stage1Gate::kNone: return "none";
  }
  return "bbd";
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& origin) {
  PipelineConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(origin + ":" + std::to_string(line_no) +
                    ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "t_live") config.t_live = to_number(value, key, origin);
    else if (key == "ema_lambda") config.ema_lambda = to_number(value, key, origin);
    else if (key == "init_confidence") config.init_confidence = to_number(value, key, origin);
    else if (key == "bbd.alpha") config.bbd.alpha = to_number(value, key, origin);
    else if (key == "bbd.beta") config.bbd.beta = to_number(value, key, origin);
    else if (key == "bbd.c") config.bbd.c = to_number(value, key, origin);
    else if (key == "association.theta_bbd") config.association.theta_bbd = to_number(value, key, origin);
    else if (key == "association.theta_iou") config.association.theta_iou = to_number(value, key, origin);
    else if (key == "association.theta_reid_high") config.association.theta_reid_high = to_number(value, key, origin);
    else if (key == "association.theta_reid_low") config.association.theta_reid_low = to_number(value, key, origin);
    else if (key == "association.theta_maha") config.association.theta_maha = to_number(value, key, origin);
    else if (key == "association.stage1_gate") config.association.stage1_gate = parse_gate(value, origin);
    else if (key == "association.two_stage") config.association.two_stage = value == "true" || value == "1";
    else if (key == "vt.bins_per_channel") config.vt.bins_per_channel = static_cast<int>(to_number(value, key, origin));
    else if (key == "vt.max_iterations") config.vt.max_iterations = static_cast<int>(to_number(value, key, origin));
    else if (key == "vt.convergence_shift") config.vt.convergence_shift = to_number(value, key, origin);
    else if (key == "vt.scale_step") config.vt.scale_step = to_number(value, key, origin);
    else if (key == "vt.scale_smoothing") config.vt.scale_smoothing = to_number(value, key, origin);
    else if (key == "vt.failure_threshold") config.vt.failure_threshold = to_number(value, key, origin);
    else {
      throw IoError(origin + ":" + std::to_string(line_no) + ": unknown key '" +
                    key + "'");
    }
  }
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::string config_to_text(const PipelineConfig& config) {
  char buf[4096];
  std::snprintf(
      buf, sizeof(buf),
      "# tracker defaults; every key is optional\n"
      "t_live = %g\n"
      "ema_lambda = %g\n"
      "init_confidence = %g\n"
      "\n"
      "# staleness-scaled gating covariance\n"
      "bbd.alpha = %g\n"
      "bbd.beta = %g\n"
      "bbd.c = %g\n"
      "\n"
      "# two-stage matching thresholds\n"
      "association.theta_bbd = %g\n"
      "association.theta_iou = %g\n"
      "association.theta_reid_high = %g\n"
      "association.theta_reid_low = %g\n"
      "association.theta_maha = %g\n"
      "association.stage1_gate = %s\n"
      "association.two_stage = %s\n"
      "\n"
      "# mean-shift visual tracker\n"
      "vt.bins_per_channel = %d\n"
      "vt.max_iterations = %d\n"
      "vt.convergence_shift = %g\n"
      "vt.scale_step = %g\n"
      "vt.scale_smoothing = %g\n"
      "vt.failure_threshold = %g\n",
      config.t_live, config.ema_lambda, config.init_confidence,
      config.bbd.alpha, config.bbd.beta, config.bbd.c,
      config.association.theta_bbd, config.association.theta_iou,
      config.association.theta_reid_high, config.association.theta_reid_low,
      config.association.theta_maha, gate_name(config.association.stage1_gate),
      config.association.two_stage ? "true" : "false",
      config.vt.bins_per_channel, config.vt.max_iterations,
      config.vt.convergence_shift, config.vt.scale_step,
      config.vt.scale_smoothing, config.vt.failure_threshold);
  return buf;
}

}  // namespace lowmot
