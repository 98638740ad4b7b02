#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lowmot/bbox.hpp"
#include "lowmot/embedding.hpp"
#include "lowmot/image.hpp"

namespace lowmot {

// Malformed or unreadable input file. Surfaces as exit code 3 in the CLI.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SequenceMeta {
  std::string name;
  double source_fps = 30.0;
  int width = 0;
  int height = 0;
  int frame_count = 0;
};

// Detection frames plus the midpoint frame between each consecutive pair.
struct SubsampleSchedule {
  std::vector<int> detection_frames;     // 1-indexed, ascending
  std::vector<int> intermediate_frames;  // strictly between consecutive pairs
};

// One row of a detection file: `frame,-1,x,y,w,h,conf,...`.
struct DetectionRow {
  int frame;
  BBox bbox;
  double confidence;
};

// One row of a ground-truth or result file: `frame,id,x,y,w,h,...`.
struct TrackRow {
  int frame;
  std::int64_t id;
  BBox bbox;
  double confidence;
};

std::vector<DetectionRow> read_detections(const std::string& path);

// Binary sidecar: magic "EMB1", u32 little-endian dimension, then one
// record of D little-endian f32 per detection row, in file order.
// Embeddings are renormalized on load; a norm below 0.5 is an error and a
// deviation above 1e-3 logs a warning.
std::vector<Embedding> read_embeddings(const std::string& path);
void write_embeddings(const std::string& path,
                      const std::vector<Embedding>& embeddings);

std::vector<TrackRow> read_track_file(const std::string& path);
void write_results(const std::string& path, std::vector<TrackRow> rows);
void write_gt(const std::string& path, const std::vector<TrackRow>& rows,
              const std::vector<double>& visibilities);

SubsampleSchedule subsample(const SequenceMeta& meta, double target_hz);

// Binary PPM (P6, maxval 255). PNG is not compiled in by default; a .png
// path reports an unsupported-format error.
ImageFrame read_image(const std::string& path);
void write_image(const std::string& path, const ImageFrame& frame);

SequenceMeta read_seqinfo(const std::string& path);
void write_seqinfo(const std::string& path, const SequenceMeta& meta);

}  // namespace lowmot
