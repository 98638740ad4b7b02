#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lowmot/bbox.hpp"
#include "lowmot/mot_io.hpp"

namespace lowmot {

// Per-frame (id, box) lists keyed by frame index.
using TrackMap = std::map<int, std::vector<std::pair<std::int64_t, BBox>>>;

TrackMap to_track_map(const std::vector<TrackRow>& rows);

struct ClearResult {
  double mota = 0.0;
  long false_positives = 0;
  long false_negatives = 0;
  long id_switches = 0;
  long gt_count = 0;
};

struct HotaResult {
  double hota = 0.0;
  double det_a = 0.0;
  double ass_a = 0.0;
};

/// CLEAR metrics with IoU-gated per-frame matching. Matching prefers the
/// previous frame's correspondence when it still meets the gate, then
/// resolves the remainder by a max-cardinality, max-overlap assignment.
ClearResult clear_metrics(const TrackMap& gt, const TrackMap& results,
                          double iou_gate = 0.5);

/// Global identity measure: one-to-one trajectory matching maximizing the
/// co-located frame count; IDF1 = 2*IDTP / (2*IDTP + IDFP + IDFN).
double idf1(const TrackMap& gt, const TrackMap& results,
            double iou_gate = 0.5);

/// Averaged over localization thresholds 0.05..0.95; per threshold the
/// per-frame matching maximizes true positives first, then global pair
/// alignment. HOTA_a = sqrt(DetA_a * AssA_a).
HotaResult hota(const TrackMap& gt, const TrackMap& results);

}  // namespace lowmot
