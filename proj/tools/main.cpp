#include <omp.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lowmot/config.hpp"
#include "lowmot/kernels.hpp"
#include "lowmot/log.hpp"
#include "lowmot/manifest.hpp"
#include "lowmot/metrics.hpp"
#include "lowmot/mot_io.hpp"
#include "lowmot/synth.hpp"
#include "lowmot/tracker.hpp"

namespace {

using namespace lowmot;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInputFormat = 3;
constexpr int kExitInternal = 4;

std::string frame_image_path(const std::string& seq_dir, int frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d.ppm", frame);
  return (std::filesystem::path(seq_dir) / "img1" / name).string();
}

double parse_rate(const std::string& hz, double source_fps) {
  if (hz == "full") return source_fps;
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(hz, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != hz.size() || !(value > 0.0)) {
    throw std::invalid_argument("--hz must be a positive rate or 'full'");
  }
  return value;
}

int run_track(const std::string& seq_dir, const std::string& det_path,
              const std::string& emb_path, const std::string& hz,
              const std::string& config_path, const std::string& out_path,
              int threads) {
  if (threads > 0) set_max_threads(threads);

  RunManifest manifest;
  manifest.command = "track";
  manifest.inputs = {seq_dir, det_path, emb_path};
  manifest.output = out_path;

  double io_start = omp_get_wtime();
  const SequenceMeta meta =
      read_seqinfo((std::filesystem::path(seq_dir) / "seqinfo.ini").string());
  const std::vector<DetectionRow> det_rows = read_detections(det_path);
  const std::vector<Embedding> embeddings = read_embeddings(emb_path);
  double io_ms = (omp_get_wtime() - io_start) * 1e3;

  if (det_rows.size() != embeddings.size()) {
    throw IoError("detection/embedding count mismatch: " +
                  std::to_string(det_rows.size()) + " rows vs " +
                  std::to_string(embeddings.size()) + " records");
  }
  for (std::size_t i = 1; i < embeddings.size(); ++i) {
    if (embeddings[i].dim() != embeddings[0].dim()) {
      throw IoError("embedding dimension varies within " + emb_path);
    }
  }

  const double target_hz = parse_rate(hz, meta.source_fps);
  const SubsampleSchedule schedule = subsample(meta, target_hz);
  const bool full_frequency = schedule.intermediate_frames.empty() &&
                              schedule.detection_frames.size() > 1;

  PipelineConfig config =
      config_path.empty() ? PipelineConfig{} : load_config(config_path);
  config.mode = full_frequency ? TrackingMode::kFullFrequency
                               : TrackingMode::kLowFrequency;
  const int stride = schedule.detection_frames.size() > 1
                         ? schedule.detection_frames[1] -
                               schedule.detection_frames[0]
                         : 1;
  config.delta_t = stride / meta.source_fps;
  manifest.config_text = config_to_text(config);
  manifest.mode = full_frequency ? "full_frequency" : "low_frequency";
  manifest.delta_t = config.delta_t;

  // detections grouped by frame, aligned with their embedding records
  std::map<int, std::vector<Detection>> by_frame;
  for (std::size_t i = 0; i < det_rows.size(); ++i) {
    const DetectionRow& row = det_rows[i];
    const double time = (row.frame - 1) / meta.source_fps;
    by_frame[row.frame].push_back(
        Detection(time, row.bbox, row.confidence, embeddings[i]));
  }

  Tracker tracker(config);
  std::vector<TrackRow> results;
  long frames_read = 0;
  double max_step_ms = 0.0;

  static const std::vector<Detection> kNoDetections;
  for (std::size_t k = 0; k < schedule.detection_frames.size(); ++k) {
    const int frame = schedule.detection_frames[k];
    const double time = (frame - 1) / meta.source_fps;
    const auto it = by_frame.find(frame);
    const std::vector<Detection>& dets =
        it == by_frame.end() ? kNoDetections : it->second;

    TrackOutput output;
    if (full_frequency) {
      output = tracker.step(time, dets);
    } else if (k == 0) {
      io_start = omp_get_wtime();
      const ImageFrame frame_t = read_image(frame_image_path(seq_dir, frame));
      io_ms += (omp_get_wtime() - io_start) * 1e3;
      ++frames_read;
      output = tracker.step(frame_t, time, dets);
    } else {
      const int mid = schedule.intermediate_frames[k - 1];
      const double mid_time = (mid - 1) / meta.source_fps;
      io_start = omp_get_wtime();
      const ImageFrame frame_t = read_image(frame_image_path(seq_dir, frame));
      const ImageFrame frame_mid = read_image(frame_image_path(seq_dir, mid));
      io_ms += (omp_get_wtime() - io_start) * 1e3;
      frames_read += 2;
      output = tracker.step(frame_t, frame_mid, time, mid_time, dets);
    }
    max_step_ms = std::max(max_step_ms, tracker.last_step_ms());
    for (const TrackRecord& r : output.tracks) {
      results.push_back({frame, r.id, r.bbox, r.confidence});
    }
  }

  io_start = omp_get_wtime();
  write_results(out_path, results);
  io_ms += (omp_get_wtime() - io_start) * 1e3;

  manifest.timings = tracker.timings();
  manifest.timings.io_ms = io_ms;
  manifest.frames_read = frames_read;
  manifest.max_step_ms = max_step_ms;
  manifest.write(out_path + ".manifest.json");

  log_info("track: %zu result rows over %zu detection frames", results.size(),
           schedule.detection_frames.size());
  return kExitOk;
}

TargetSpec target_from_json(const nlohmann::json& j) {
  TargetSpec t;
  const std::string kind = j.value("kind", "linear");
  if (kind == "linear") t.kind = TrajectoryKind::kLinear;
  else if (kind == "sinusoidal") t.kind = TrajectoryKind::kSinusoidal;
  else if (kind == "crossing") t.kind = TrajectoryKind::kCrossing;
  else if (kind == "stop_and_go") t.kind = TrajectoryKind::kStopAndGo;
  else throw IoError("scenario: unknown trajectory kind '" + kind + "'");

  t.width = j.value("width", t.width);
  t.height = j.value("height", t.height);
  if (j.contains("color")) {
    const auto& c = j.at("color");
    t.color = {c.at(0).get<std::uint8_t>(), c.at(1).get<std::uint8_t>(),
               c.at(2).get<std::uint8_t>()};
  }
  t.embedding_seed = j.value("embedding_seed", t.embedding_seed);
  t.start_x = j.value("start_x", t.start_x);
  t.start_y = j.value("start_y", t.start_y);
  t.vel_x = j.value("vel_x", t.vel_x);
  t.vel_y = j.value("vel_y", t.vel_y);
  t.end_x = j.value("end_x", t.end_x);
  t.end_y = j.value("end_y", t.end_y);
  t.amplitude_x = j.value("amplitude_x", t.amplitude_x);
  t.amplitude_y = j.value("amplitude_y", t.amplitude_y);
  t.period = j.value("period", t.period);
  t.phase = j.value("phase", t.phase);
  if (j.contains("stops")) {
    for (const auto& s : j.at("stops")) {
      t.stops.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
    }
  }
  return t;
}

ScenarioSpec scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  try {
    ScenarioSpec spec;
    spec.name = j.value("name", std::filesystem::path(path).stem().string());
    spec.arena_width = j.value("arena_width", spec.arena_width);
    spec.arena_height = j.value("arena_height", spec.arena_height);
    spec.duration = j.value("duration", spec.duration);
    spec.fps = j.value("fps", spec.fps);
    spec.embedding_dim = j.value("embedding_dim", spec.embedding_dim);
    spec.clone_appearance = j.value("clone_appearance", spec.clone_appearance);
    spec.pan_vx = j.value("pan_vx", spec.pan_vx);
    spec.pan_vy = j.value("pan_vy", spec.pan_vy);
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      spec.noise.bbox_jitter = n.value("bbox_jitter", 0.0);
      spec.noise.embedding_sigma = n.value("embedding_sigma", 0.0);
      spec.noise.miss_rate = n.value("miss_rate", 0.0);
      spec.noise.false_positive_rate = n.value("false_positive_rate", 0.0);
    }
    if (j.contains("targets")) {
      for (const auto& tj : j.at("targets")) {
        spec.targets.push_back(target_from_json(tj));
      }
    }
    if (j.contains("occluders")) {
      for (const auto& oj : j.at("occluders")) {
        spec.occluders.push_back(
            {BBox(oj.at("x").get<double>(), oj.at("y").get<double>(),
                  oj.at("w").get<double>(), oj.at("h").get<double>()),
             oj.value("from", 0.0), oj.value("until", 0.0)});
      }
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

int run_synth(const std::string& scenario, std::uint64_t seed,
              const std::string& out_dir) {
  ScenarioSpec spec;
  if (scenario == "crossing") spec = crossing_preset(seed);
  else if (scenario == "clones") spec = clone_stress_preset(seed);
  else if (scenario == "accelerating") spec = accelerating_preset(seed);
  else if (scenario == "linear") spec = linear_preset(seed);
  else {
    spec = scenario_from_file(scenario);
    spec.seed = seed;
  }

  const double start = omp_get_wtime();
  write_sequence(spec, out_dir);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.inputs = {scenario};
  manifest.output = out_dir;
  manifest.seed = seed;
  manifest.timings.io_ms = (omp_get_wtime() - start) * 1e3;
  manifest.write((std::filesystem::path(out_dir) / "manifest.json").string());

  log_info("synth: wrote %d frames to %s", spec.frame_count(),
           out_dir.c_str());
  return kExitOk;
}

int run_eval(const std::string& gt_path, const std::string& res_path,
             const std::string& metrics_arg, const std::string& csv_path) {
  std::set<std::string> wanted;
  std::stringstream ss(metrics_arg);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name != "mota" && name != "idf1" && name != "hota") {
      std::fprintf(stderr, "unknown metric '%s' (expected mota, idf1, hota)\n",
                   name.c_str());
      return kExitUsage;
    }
    wanted.insert(name);
  }
  if (wanted.empty()) {
    std::fprintf(stderr, "no metrics requested\n");
    return kExitUsage;
  }

  const TrackMap gt = to_track_map(read_track_file(gt_path));
  const TrackMap res = to_track_map(read_track_file(res_path));
  if (gt.empty()) throw IoError(gt_path + ": empty ground truth");
  if (!res.empty()) {
    const int gt_max = gt.rbegin()->first;
    const int res_max = res.rbegin()->first;
    if (res_max > gt_max || res.begin()->first < gt.begin()->first) {
      throw IoError("frame range mismatch: results span " +
                    std::to_string(res.begin()->first) + ".." +
                    std::to_string(res_max) + ", ground truth ends at " +
                    std::to_string(gt_max));
    }
  }

  std::vector<std::pair<std::string, double>> report;
  if (wanted.count("mota")) {
    const ClearResult clear = clear_metrics(gt, res);
    report.push_back({"MOTA", clear.mota});
    report.push_back({"FP", static_cast<double>(clear.false_positives)});
    report.push_back({"FN", static_cast<double>(clear.false_negatives)});
    report.push_back({"IDSW", static_cast<double>(clear.id_switches)});
  }
  if (wanted.count("idf1")) report.push_back({"IDF1", idf1(gt, res)});
  if (wanted.count("hota")) {
    const HotaResult h = hota(gt, res);
    report.push_back({"HOTA", h.hota});
    report.push_back({"DetA", h.det_a});
    report.push_back({"AssA", h.ass_a});
  }

  for (const auto& [key, value] : report) {
    std::printf("%-6s %.6f\n", key.c_str(), value);
  }
  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path);
    csv << "metric,value\n";
    char buf[64];
    for (const auto& [key, value] : report) {
      std::snprintf(buf, sizeof(buf), "%s,%.6f\n", key.c_str(), value);
      csv << buf;
    }
  }
  return kExitOk;
}

int run_subsample(double fps, int frames, const std::string& hz) {
  const SequenceMeta meta{"", fps, 0, 0, frames};
  const SubsampleSchedule schedule = subsample(meta, parse_rate(hz, fps));
  std::printf("detection_frames:");
  for (int f : schedule.detection_frames) std::printf(" %d", f);
  std::printf("\nintermediate_frames:");
  for (int f : schedule.intermediate_frames) std::printf(" %d", f);
  std::printf("\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"low-rate multi-object tracking toolkit"};
  app.require_subcommand(1);

  auto* track = app.add_subcommand("track", "run the tracking pipeline");
  std::string seq_dir, det_path, emb_path, hz = "full", config_path, out_path;
  int threads = 0;
  track->add_option("--seq", seq_dir, "sequence directory (images + seqinfo)")
      ->required();
  track->add_option("--det", det_path, "detection file")->required();
  track->add_option("--emb", emb_path, "embedding sidecar")->required();
  track->add_option("--hz", hz, "detection rate in Hz, or 'full'");
  track->add_option("--config", config_path, "tracker config file");
  track->add_option("--out", out_path, "output result file")->required();
  track->add_option("--threads", threads, "cap worker threads");

  auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark");
  std::string scenario, synth_out;
  std::uint64_t seed = 1;
  synth->add_option("--scenario", scenario,
                    "preset name (crossing|clones|accelerating|linear) or a "
                    "scenario json file")
      ->required();
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a result file against gt");
  std::string gt_path, res_path, metrics_arg = "mota,idf1,hota", csv_path;
  eval->add_option("--gt", gt_path, "ground-truth file")->required();
  eval->add_option("--res", res_path, "result file")->required();
  eval->add_option("--metrics", metrics_arg, "comma list: mota,idf1,hota");
  eval->add_option("--csv", csv_path, "also write a csv report");

  auto* sub = app.add_subcommand("subsample", "print a detection schedule");
  double fps = 30.0;
  int frames = 0;
  std::string sub_hz = "1";
  sub->add_option("--fps", fps, "source frame rate")->required();
  sub->add_option("--frames", frames, "frame count")->required();
  sub->add_option("--hz", sub_hz, "target rate in Hz, or 'full'");

  auto* config_cmd =
      app.add_subcommand("config", "print the default config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (track->parsed()) {
      return run_track(seq_dir, det_path, emb_path, hz, config_path, out_path,
                       threads);
    }
    if (synth->parsed()) return run_synth(scenario, seed, synth_out);
    if (eval->parsed()) return run_eval(gt_path, res_path, metrics_arg,
                                        csv_path);
    if (sub->parsed()) return run_subsample(fps, frames, sub_hz);
    if (config_cmd->parsed()) {
      std::printf("%s", config_to_text(PipelineConfig{}).c_str());
      return kExitOk;
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitInputFormat;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitUsage;
}
