#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lowmot/bbox.hpp"
#include "lowmot/detection.hpp"
#include "lowmot/image.hpp"
#include "lowmot/mot_io.hpp"

namespace lowmot {

enum class TrajectoryKind { kLinear, kSinusoidal, kCrossing, kStopAndGo };

struct TargetSpec {
  TrajectoryKind kind = TrajectoryKind::kLinear;
  double width = 40.0;
  double height = 40.0;
  std::array<std::uint8_t, 3> color = {200, 60, 60};
  std::uint64_t embedding_seed = 0;
  double start_x = 0.0;
  double start_y = 0.0;
  double vel_x = 0.0;  // px/s, linear & stop-and-go base motion
  double vel_y = 0.0;
  double end_x = 0.0;  // crossing destination, reached at duration
  double end_y = 0.0;
  double amplitude_x = 0.0;  // sinusoidal offsets around the base path
  double amplitude_y = 0.0;
  double period = 2.0;
  double phase = 0.0;
  std::vector<std::pair<double, double>> stops;  // [from, until) seconds
};

struct Occluder {
  BBox rect;
  double from = 0.0;
  double until = 0.0;
};

struct NoiseSpec {
  double bbox_jitter = 0.0;        // std in pixels on box center and size
  double embedding_sigma = 0.0;    // per-component std before renormalizing
  double miss_rate = 0.0;
  double false_positive_rate = 0.0;
};

struct ScenarioSpec {
  int arena_width = 640;
  int arena_height = 480;
  double duration = 5.0;
  double fps = 30.0;
  std::vector<TargetSpec> targets;
  std::vector<Occluder> occluders;
  double pan_vx = 0.0;  // camera pan, px/s, shifts every rendered position
  double pan_vy = 0.0;
  NoiseSpec noise;
  std::uint64_t seed = 1;
  int embedding_dim = 128;
  // Same-color targets with embedding means at pairwise cosine ~0.9,
  // stressing spatial gating when appearance stops discriminating.
  bool clone_appearance = false;
  std::array<std::uint8_t, 3> background = {110, 110, 110};
  std::string name = "synth";

  int frame_count() const;
  double frame_time(int frame_index) const;  // 1-indexed
};

struct GtEntry {
  std::int64_t id;
  BBox bbox;
  double visibility;
};

using GroundTruth = std::vector<std::vector<GtEntry>>;  // index = frame - 1

struct SynthDetection {
  Detection det;
  std::int64_t gt_id;  // -1 for injected false positives
};

struct Synthesis {
  SequenceMeta meta;
  GroundTruth gt;
  std::vector<std::vector<SynthDetection>> detections;  // index = frame - 1
};

/// Deterministic generation of ground truth, detections and embeddings.
/// Frames are rendered on demand via render_frame.
Synthesis generate(const ScenarioSpec& spec);

ImageFrame render_frame(const ScenarioSpec& spec, int frame_index);
ImageFrame render_frame_serial(const ScenarioSpec& spec, int frame_index);

/// ID-perfect associator: every detection is assigned its generating
/// ground-truth id; false positives get fresh singleton ids.
std::vector<TrackRow> oracle_tracks(const Synthesis& synthesis);

std::vector<TrackRow> gt_rows(const Synthesis& synthesis,
                              std::vector<double>* visibilities = nullptr);

/// Emits seqinfo.ini, img1/*.ppm, gt/gt.txt, det/det.txt and det/det.emb
/// under the given directory.
void write_sequence(const ScenarioSpec& spec, const std::string& directory);

// Built-in scenario presets.
ScenarioSpec crossing_preset(std::uint64_t seed);
ScenarioSpec clone_stress_preset(std::uint64_t seed);
ScenarioSpec accelerating_preset(std::uint64_t seed);
ScenarioSpec linear_preset(std::uint64_t seed);

}  // namespace lowmot
