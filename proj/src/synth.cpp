#include "lowmot/synth.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "lowmot/kernels.hpp"
#include "lowmot/random.hpp"

namespace lowmot {

namespace {

constexpr double kVisibilityToDetect = 0.3;

double reflect_into(double x, double lo, double hi) {
  const double range = hi - lo;
  if (range <= 0.0) return lo;
  double y = std::fmod(x - lo, 2.0 * range);
  if (y < 0.0) y += 2.0 * range;
  return lo + (y <= range ? y : 2.0 * range - y);
}

double active_time(const TargetSpec& t, double time) {
  double moving = time;
  for (const auto& [from, until] : t.stops) {
    if (time > from) moving -= std::min(time, until) - from;
  }
  return moving;
}

// Target box center at a given time, in image coordinates (pan included).
std::pair<double, double> target_center(const ScenarioSpec& spec,
                                        const TargetSpec& t, double time) {
  double cx = 0.0, cy = 0.0;
  switch (t.kind) {
    case TrajectoryKind::kLinear:
      cx = t.start_x + t.vel_x * time;
      cy = t.start_y + t.vel_y * time;
      break;
    case TrajectoryKind::kSinusoidal: {
      const double omega = 6.283185307179586 / t.period;
      cx = t.start_x + t.vel_x * time +
           t.amplitude_x * std::sin(omega * time + t.phase);
      cy = t.start_y + t.vel_y * time +
           t.amplitude_y * std::cos(omega * time + t.phase);
      break;
    }
    case TrajectoryKind::kCrossing: {
      const double f = spec.duration > 0.0 ? time / spec.duration : 0.0;
      cx = t.start_x + (t.end_x - t.start_x) * f;
      cy = t.start_y + (t.end_y - t.start_y) * f;
      break;
    }
    case TrajectoryKind::kStopAndGo: {
      const double moving = active_time(t, time);
      cx = t.start_x + t.vel_x * moving;
      cy = t.start_y + t.vel_y * moving;
      break;
    }
  }
  // Keep the trajectory inside the arena, then apply the camera pan.
  cx = reflect_into(cx, t.width / 2.0, spec.arena_width - t.width / 2.0);
  cy = reflect_into(cy, t.height / 2.0, spec.arena_height - t.height / 2.0);
  return {cx + spec.pan_vx * time, cy + spec.pan_vy * time};
}

bool occluder_active(const Occluder& o, double time) {
  return time >= o.from && time < o.until;
}

// Pixel-raster visibility: the fraction of the target's pixels that are
// inside the frame and not under an active occluder or a target drawn
// later in painter order.
double target_visibility(const ScenarioSpec& spec, std::size_t target_index,
                         const std::vector<BBox>& boxes, double time) {
  const BBox& box = boxes[target_index];
  const int x0 = static_cast<int>(std::floor(box.left));
  const int x1 = static_cast<int>(std::ceil(box.right()));
  const int y0 = static_cast<int>(std::floor(box.top));
  const int y1 = static_cast<int>(std::ceil(box.bottom()));

  long total = 0;
  long visible = 0;
  for (int py = y0; py < y1; ++py) {
    const double yc = py + 0.5;
    if (yc < box.top || yc >= box.bottom()) continue;
    for (int px = x0; px < x1; ++px) {
      const double xc = px + 0.5;
      if (xc < box.left || xc >= box.right()) continue;
      ++total;
      if (px < 0 || py < 0 || px >= spec.arena_width ||
          py >= spec.arena_height) {
        continue;
      }
      bool covered = false;
      for (std::size_t k = target_index + 1; !covered && k < boxes.size();
           ++k) {
        covered = xc >= boxes[k].left && xc < boxes[k].right() &&
                  yc >= boxes[k].top && yc < boxes[k].bottom();
      }
      for (const Occluder& o : spec.occluders) {
        if (covered) break;
        if (!occluder_active(o, time)) continue;
        covered = xc >= o.rect.left && xc < o.rect.right() &&
                  yc >= o.rect.top && yc < o.rect.bottom();
      }
      if (!covered) ++visible;
    }
  }
  return total > 0 ? static_cast<double>(visible) / total : 0.0;
}

std::vector<BBox> frame_boxes(const ScenarioSpec& spec, double time) {
  std::vector<BBox> boxes;
  boxes.reserve(spec.targets.size());
  for (const TargetSpec& t : spec.targets) {
    const auto [cx, cy] = target_center(spec, t, time);
    boxes.push_back(bbox_from_center(cx, cy, t.width, t.height));
  }
  return boxes;
}

std::vector<Embedding> make_id_means(const ScenarioSpec& spec) {
  std::vector<Embedding> means;
  means.reserve(spec.targets.size());
  if (!spec.clone_appearance) {
    for (const TargetSpec& t : spec.targets) {
      Rng rng(mix_seed(spec.seed, 0x4d45414eULL + t.embedding_seed));
      std::vector<float> v(spec.embedding_dim);
      for (float& x : v) x = static_cast<float>(rng.gaussian());
      means.push_back(Embedding::normalized(std::move(v)));
    }
    return means;
  }

  // Clone mode: means share a base direction u; each id adds an orthogonal
  // component so that cross-id cosine sits near 0.9.
  Rng rng(mix_seed(spec.seed, 0x434c4f4eULL));
  const int dim = spec.embedding_dim;
  std::vector<std::vector<double>> basis;
  auto draw_orthonormal = [&]() {
    std::vector<double> v(dim);
    for (int attempt = 0; attempt < 64; ++attempt) {
      for (double& x : v) x = rng.gaussian();
      for (const auto& b : basis) {
        double dot = 0.0;
        for (int i = 0; i < dim; ++i) dot += v[i] * b[i];
        for (int i = 0; i < dim; ++i) v[i] -= dot * b[i];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (double& x : v) x /= norm;
        basis.push_back(v);
        return;
      }
    }
    throw std::runtime_error("clone means: degenerate basis draw");
  };
  draw_orthonormal();  // base direction
  const double cos_phi = std::sqrt(0.9);
  const double sin_phi = std::sqrt(1.0 - 0.9);
  for (std::size_t i = 0; i < spec.targets.size(); ++i) {
    draw_orthonormal();
    std::vector<float> v(dim);
    for (int d = 0; d < dim; ++d) {
      v[d] = static_cast<float>(cos_phi * basis[0][d] +
                                sin_phi * basis[i + 1][d]);
    }
    means.push_back(Embedding::normalized(std::move(v)));
  }
  return means;
}

Embedding noisy_embedding(const Embedding& mean, double sigma, Rng& rng) {
  if (sigma <= 0.0) return mean;
  std::vector<float> v(mean.values());
  for (float& x : v) x += static_cast<float>(sigma * rng.gaussian());
  return Embedding::normalized(std::move(v));
}

void render_rows(const ScenarioSpec& spec, double time,
                 const std::vector<BBox>& boxes, ImageFrame& frame, int y0,
                 int y1) {
  for (int py = y0; py < y1; ++py) {
    const double yc = py + 0.5;
    std::uint8_t* row = frame.at(0, py);
    for (int px = 0; px < spec.arena_width; ++px, row += 3) {
      const double xc = px + 0.5;
      const std::uint8_t* color = spec.background.data();
      for (std::size_t k = 0; k < boxes.size(); ++k) {
        const BBox& b = boxes[k];
        if (xc >= b.left && xc < b.right() && yc >= b.top && yc < b.bottom()) {
          color = spec.targets[k].color.data();
        }
      }
      for (const Occluder& o : spec.occluders) {
        if (!occluder_active(o, time)) continue;
        if (xc >= o.rect.left && xc < o.rect.right() && yc >= o.rect.top &&
            yc < o.rect.bottom()) {
          static constexpr std::uint8_t kOccluderColor[3] = {30, 30, 30};
          color = kOccluderColor;
        }
      }
      row[0] = color[0];
      row[1] = color[1];
      row[2] = color[2];
    }
  }
}

}  // namespace

int ScenarioSpec::frame_count() const {
  return std::max(1, static_cast<int>(std::lround(duration * fps)));
}

double ScenarioSpec::frame_time(int frame_index) const {
  return (frame_index - 1) / fps;
}

Synthesis generate(const ScenarioSpec& spec) {
  if (!(spec.fps > 0.0)) throw std::invalid_argument("generate: fps must be > 0");
  if (spec.noise.miss_rate < 0.0 || spec.noise.miss_rate >= 1.0 ||
      spec.noise.false_positive_rate < 0.0 ||
      spec.noise.false_positive_rate >= 1.0) {
    throw std::invalid_argument("generate: rates must lie in [0, 1)");
  }
  for (const TargetSpec& t : spec.targets) {
    if (t.width > spec.arena_width || t.height > spec.arena_height) {
      throw std::invalid_argument("generate: target larger than the arena");
    }
  }

  Synthesis out;
  const int frames = spec.frame_count();
  out.meta = {spec.name, spec.fps, spec.arena_width, spec.arena_height,
              frames};
  out.gt.resize(frames);
  out.detections.resize(frames);

  const std::vector<Embedding> means = make_id_means(spec);
  Rng rng(mix_seed(spec.seed, 0x44455453ULL));

  for (int f = 1; f <= frames; ++f) {
    const double time = spec.frame_time(f);
    const std::vector<BBox> boxes = frame_boxes(spec, time);
    auto& gt_frame = out.gt[f - 1];
    auto& det_frame = out.detections[f - 1];

    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
      const double visibility = target_visibility(spec, k, boxes, time);
      gt_frame.push_back(
          {static_cast<std::int64_t>(k) + 1, boxes[k], visibility});

      if (visibility < kVisibilityToDetect) continue;
      if (spec.noise.miss_rate > 0.0 && rng.uniform() < spec.noise.miss_rate) {
        continue;
      }

      BBox det_box = boxes[k];
      if (spec.noise.bbox_jitter > 0.0) {
        const double jitter = spec.noise.bbox_jitter;
        const auto [cx, cy] = center(det_box);
        const double w =
            std::max(4.0, det_box.width + jitter * 0.5 * rng.gaussian());
        const double h =
            std::max(4.0, det_box.height + jitter * 0.5 * rng.gaussian());
        det_box = bbox_from_center(cx + jitter * rng.gaussian(),
                                   cy + jitter * rng.gaussian(), w, h);
      }
      double conf = 0.55 + 0.4 * visibility;
      if (spec.noise.bbox_jitter > 0.0) conf += 0.02 * rng.gaussian();
      conf = std::clamp(conf, 0.0, 1.0);

      det_frame.push_back(
          {Detection(time, det_box, conf,
                     noisy_embedding(means[k], spec.noise.embedding_sigma, rng)),
           static_cast<std::int64_t>(k) + 1});
    }

    if (spec.noise.false_positive_rate > 0.0 &&
        rng.uniform() < spec.noise.false_positive_rate) {
      const double w = rng.uniform(20.0, 60.0);
      const double h = rng.uniform(20.0, 60.0);
      const double cx = rng.uniform(w / 2.0, spec.arena_width - w / 2.0);
      const double cy = rng.uniform(h / 2.0, spec.arena_height - h / 2.0);
      std::vector<float> v(spec.embedding_dim);
      for (float& x : v) x = static_cast<float>(rng.gaussian());
      det_frame.push_back(
          {Detection(time, bbox_from_center(cx, cy, w, h),
                     rng.uniform(0.6, 0.9), Embedding::normalized(std::move(v))),
           -1});
    }
  }
  return out;
}

ImageFrame render_frame(const ScenarioSpec& spec, int frame_index) {
  const double time = spec.frame_time(frame_index);
  const std::vector<BBox> boxes = frame_boxes(spec, time);
  ImageFrame frame(spec.arena_width, spec.arena_height);
#pragma omp parallel num_threads(max_threads())
  {
    const int threads = omp_get_num_threads();
    const int chunk = (spec.arena_height + threads - 1) / threads;
    const int tid = omp_get_thread_num();
    const int y0 = std::min(spec.arena_height, tid * chunk);
    const int y1 = std::min(spec.arena_height, y0 + chunk);
    render_rows(spec, time, boxes, frame, y0, y1);
  }
  return frame;
}

ImageFrame render_frame_serial(const ScenarioSpec& spec, int frame_index) {
  const double time = spec.frame_time(frame_index);
  const std::vector<BBox> boxes = frame_boxes(spec, time);
  ImageFrame frame(spec.arena_width, spec.arena_height);
  render_rows(spec, time, boxes, frame, 0, spec.arena_height);
  return frame;
}

std::vector<TrackRow> oracle_tracks(const Synthesis& synthesis) {
  std::vector<TrackRow> rows;
  std::int64_t max_gt_id = 0;
  for (const auto& frame : synthesis.gt) {
    for (const GtEntry& e : frame) max_gt_id = std::max(max_gt_id, e.id);
  }
  std::int64_t next_fp_id = max_gt_id + 1;
  for (std::size_t f = 0; f < synthesis.detections.size(); ++f) {
    for (const SynthDetection& d : synthesis.detections[f]) {
      const std::int64_t id = d.gt_id >= 0 ? d.gt_id : next_fp_id++;
      rows.push_back({static_cast<int>(f) + 1, id, d.det.bbox,
                      d.det.confidence});
    }
  }
  return rows;
}

std::vector<TrackRow> gt_rows(const Synthesis& synthesis,
                              std::vector<double>* visibilities) {
  std::vector<TrackRow> rows;
  if (visibilities) visibilities->clear();
  for (std::size_t f = 0; f < synthesis.gt.size(); ++f) {
    for (const GtEntry& e : synthesis.gt[f]) {
      rows.push_back({static_cast<int>(f) + 1, e.id, e.bbox, 1.0});
      if (visibilities) visibilities->push_back(e.visibility);
    }
  }
  return rows;
}

void write_sequence(const ScenarioSpec& spec, const std::string& directory) {
  namespace fs = std::filesystem;
  const fs::path root(directory);
  fs::create_directories(root / "img1");
  fs::create_directories(root / "gt");
  fs::create_directories(root / "det");

  const Synthesis synthesis = generate(spec);
  write_seqinfo((root / "seqinfo.ini").string(), synthesis.meta);

  char name[32];
  for (int f = 1; f <= synthesis.meta.frame_count; ++f) {
    std::snprintf(name, sizeof(name), "%06d.ppm", f);
    write_image((root / "img1" / name).string(), render_frame(spec, f));
  }

  std::vector<double> visibilities;
  const std::vector<TrackRow> gt = gt_rows(synthesis, &visibilities);
  write_gt((root / "gt" / "gt.txt").string(), gt, visibilities);

  std::vector<TrackRow> det_rows;
  std::vector<Embedding> embeddings;
  for (std::size_t f = 0; f < synthesis.detections.size(); ++f) {
    for (const SynthDetection& d : synthesis.detections[f]) {
      det_rows.push_back(
          {static_cast<int>(f) + 1, -1, d.det.bbox, d.det.confidence});
      embeddings.push_back(d.det.embedding);
    }
  }
  std::ofstream det_out((root / "det" / "det.txt").string());
  if (!det_out) throw IoError("cannot write detection file");
  char buf[256];
  for (const TrackRow& r : det_rows) {
    std::snprintf(buf, sizeof(buf), "%d,-1,%.2f,%.2f,%.2f,%.2f,%.6f,-1,-1,-1\n",
                  r.frame, r.bbox.left, r.bbox.top, r.bbox.width,
                  r.bbox.height, r.confidence);
    det_out << buf;
  }
  det_out.close();
  write_embeddings((root / "det" / "det.emb").string(), embeddings);
}

ScenarioSpec crossing_preset(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = "crossing";
  spec.arena_width = 480;
  spec.arena_height = 360;
  spec.duration = 6.0;
  spec.fps = 30.0;
  spec.seed = seed;

  // Paths cross at t = 3.5 s, between detection instants at 1 Hz, so the
  // targets are well separated whenever the detector fires.
  TargetSpec a;
  a.kind = TrajectoryKind::kCrossing;
  a.width = 36;
  a.height = 52;
  a.color = {200, 50, 50};
  a.embedding_seed = 11;
  a.start_x = 60;
  a.start_y = 170;
  a.end_x = 420;
  a.end_y = 190;

  TargetSpec b = a;
  b.color = {50, 90, 210};
  b.embedding_seed = 23;
  b.start_x = 420;
  b.start_y = 190;
  b.end_x = 163;
  b.end_y = 170;

  spec.targets = {a, b};
  return spec;
}

ScenarioSpec clone_stress_preset(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = "clones";
  spec.arena_width = 1280;
  spec.arena_height = 720;
  spec.duration = 8.0;
  spec.fps = 30.0;
  spec.seed = seed;
  spec.clone_appearance = true;
  spec.noise.bbox_jitter = 1.0;
  spec.noise.embedding_sigma = 0.06;

  // Twelve identical-appearance targets wandering around grid anchors.
  // Small boxes keep the distance gate tight relative to the spacing, so
  // spatial gating has something to say when appearance stops helping.
  Rng rng(mix_seed(seed, 0x5052455345ULL));
  const std::array<std::uint8_t, 3> clone_color = {60, 160, 60};
  int idx = 0;
  for (int gy = 0; gy < 3; ++gy) {
    for (int gx = 0; gx < 4; ++gx) {
      TargetSpec t;
      t.kind = TrajectoryKind::kSinusoidal;
      t.width = 20;
      t.height = 30;
      t.color = clone_color;
      t.embedding_seed = static_cast<std::uint64_t>(idx) + 1;
      t.start_x = 160 + 320 * gx;
      t.start_y = 120 + 240 * gy;
      t.vel_x = rng.uniform(-20.0, 20.0);
      t.vel_y = rng.uniform(-10.0, 10.0);
      t.amplitude_x = rng.uniform(40.0, 70.0);
      t.amplitude_y = rng.uniform(30.0, 50.0);
      t.period = rng.uniform(2.2, 3.2);
      t.phase = rng.uniform(0.0, 6.28318);
      spec.targets.push_back(t);
      ++idx;
    }
  }
  return spec;
}

ScenarioSpec accelerating_preset(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = "accelerating";
  spec.arena_width = 640;
  spec.arena_height = 480;
  spec.duration = 6.0;
  spec.fps = 30.0;
  spec.seed = seed;

  Rng rng(mix_seed(seed, 0x414343ULL));
  TargetSpec t;
  t.kind = TrajectoryKind::kSinusoidal;
  t.width = 42;
  t.height = 42;
  t.color = {220, 160, 40};
  t.embedding_seed = 5;
  t.start_x = 320;
  t.start_y = 240;
  t.vel_x = rng.uniform(-15.0, 15.0);
  t.amplitude_x = rng.uniform(90.0, 120.0);
  t.amplitude_y = rng.uniform(60.0, 90.0);
  t.period = rng.uniform(2.6, 3.4);
  t.phase = rng.uniform(0.0, 6.28318);
  spec.targets = {t};
  return spec;
}

ScenarioSpec linear_preset(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.name = "linear";
  spec.arena_width = 480;
  spec.arena_height = 360;
  spec.duration = 5.0;
  spec.fps = 30.0;
  spec.seed = seed;

  TargetSpec t;
  t.kind = TrajectoryKind::kLinear;
  t.width = 40;
  t.height = 40;
  t.color = {60, 120, 220};
  t.embedding_seed = 3;
  t.start_x = 60;
  t.start_y = 120;
  t.vel_x = 60;
  t.vel_y = 25;
  spec.targets = {t};
  return spec;
}

}  // namespace lowmot
