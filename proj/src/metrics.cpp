#include "lowmot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "lowmot/assignment.hpp"

namespace lowmot {

namespace {

std::vector<int> all_frames(const TrackMap& gt, const TrackMap& results) {
  std::set<int> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : results) frames.insert(f);
  return {frames.begin(), frames.end()};
}

const std::vector<std::pair<std::int64_t, BBox>>& frame_or_empty(
    const TrackMap& m, int frame) {
  static const std::vector<std::pair<std::int64_t, BBox>> empty;
  const auto it = m.find(frame);
  return it == m.end() ? empty : it->second;
}

}  // namespace

TrackMap to_track_map(const std::vector<TrackRow>& rows) {
  TrackMap map;
  for (const TrackRow& r : rows) map[r.frame].push_back({r.id, r.bbox});
  return map;
}

ClearResult clear_metrics(const TrackMap& gt, const TrackMap& results,
                          double iou_gate) {
  ClearResult out;
  for (const auto& [_, entries] : gt) out.gt_count += entries.size();
  if (out.gt_count == 0) {
    throw std::invalid_argument("clear_metrics: empty ground truth");
  }

  // gt id -> pred id it was last matched to (for switch counting and
  // correspondence carry-over)
  std::map<std::int64_t, std::int64_t> last_match;

  for (const int frame : all_frames(gt, results)) {
    const auto& gt_frame = frame_or_empty(gt, frame);
    const auto& res_frame = frame_or_empty(results, frame);

    std::vector<char> gt_taken(gt_frame.size(), 0);
    std::vector<char> res_taken(res_frame.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matched;

    // Carry over surviving correspondences first.
    for (std::size_t i = 0; i < gt_frame.size(); ++i) {
      const auto it = last_match.find(gt_frame[i].first);
      if (it == last_match.end()) continue;
      for (std::size_t j = 0; j < res_frame.size(); ++j) {
        if (res_taken[j] || res_frame[j].first != it->second) continue;
        if (iou(gt_frame[i].second, res_frame[j].second) >= iou_gate) {
          gt_taken[i] = 1;
          res_taken[j] = 1;
          matched.push_back({i, j});
        }
        break;
      }
    }

    // Optimal assignment over the remainder.
    std::vector<std::size_t> free_gt, free_res;
    for (std::size_t i = 0; i < gt_frame.size(); ++i) {
      if (!gt_taken[i]) free_gt.push_back(i);
    }
    for (std::size_t j = 0; j < res_frame.size(); ++j) {
      if (!res_taken[j]) free_res.push_back(j);
    }
    CostMatrix costs(free_gt.size(), free_res.size());
    for (std::size_t r = 0; r < free_gt.size(); ++r) {
      for (std::size_t c = 0; c < free_res.size(); ++c) {
        const double overlap =
            iou(gt_frame[free_gt[r]].second, res_frame[free_res[c]].second);
        if (overlap >= iou_gate) costs(r, c) = 1.0 - overlap;
      }
    }
    for (const MatchPair& p : solve(costs).pairs) {
      matched.push_back({free_gt[p.row], free_res[p.col]});
    }

    out.false_negatives += static_cast<long>(gt_frame.size() - matched.size());
    out.false_positives += static_cast<long>(res_frame.size() - matched.size());

    for (const auto& [i, j] : matched) {
      const std::int64_t gt_id = gt_frame[i].first;
      const std::int64_t pred_id = res_frame[j].first;
      const auto it = last_match.find(gt_id);
      if (it != last_match.end() && it->second != pred_id) ++out.id_switches;
      last_match[gt_id] = pred_id;
    }
  }

  out.mota = 1.0 - static_cast<double>(out.false_negatives +
                                       out.false_positives + out.id_switches) /
                       static_cast<double>(out.gt_count);
  return out;
}

double idf1(const TrackMap& gt, const TrackMap& results, double iou_gate) {
  std::map<std::int64_t, long> gt_len, res_len;
  std::map<std::pair<std::int64_t, std::int64_t>, long> overlap;

  long total_gt = 0;
  for (const auto& [frame, gt_frame] : gt) {
    total_gt += static_cast<long>(gt_frame.size());
    const auto& res_frame = frame_or_empty(results, frame);
    for (const auto& [gid, gbox] : gt_frame) {
      ++gt_len[gid];
      for (const auto& [pid, pbox] : res_frame) {
        if (iou(gbox, pbox) >= iou_gate) ++overlap[{gid, pid}];
      }
    }
  }
  if (total_gt == 0) throw std::invalid_argument("idf1: empty ground truth");
  long total_res = 0;
  for (const auto& [frame, res_frame] : results) {
    total_res += static_cast<long>(res_frame.size());
    for (const auto& [pid, _] : res_frame) ++res_len[pid];
  }
  if (total_res == 0) return 0.0;

  std::vector<std::int64_t> gids, pids;
  for (const auto& [gid, _] : gt_len) gids.push_back(gid);
  for (const auto& [pid, _] : res_len) pids.push_back(pid);

  // Square assignment in the motmetrics style: pairing (g, p) costs the
  // frames they do not share; leaving either side unmatched costs its full
  // length. Minimizing total cost maximizes IDTP exactly.
  const std::size_t ng = gids.size();
  const std::size_t np = pids.size();
  CostMatrix costs(ng + np, np + ng, kInfeasible);
  for (std::size_t i = 0; i < ng; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      const auto it = overlap.find({gids[i], pids[j]});
      const long m = it == overlap.end() ? 0 : it->second;
      costs(i, j) =
          static_cast<double>(gt_len[gids[i]] - m + res_len[pids[j]] - m);
    }
    costs(i, np + i) = static_cast<double>(gt_len[gids[i]]);
  }
  for (std::size_t j = 0; j < np; ++j) {
    for (std::size_t i = 0; i < ng; ++i) {
      costs(ng + j, np + i) = 0.0;
    }
    costs(ng + j, j) = static_cast<double>(res_len[pids[j]]);
  }

  long idtp = 0;
  for (const MatchPair& p : solve(costs).pairs) {
    if (p.row < ng && p.col < np) {
      const auto it = overlap.find({gids[p.row], pids[p.col]});
      if (it != overlap.end()) idtp += it->second;
    }
  }
  const long idfn = total_gt - idtp;
  const long idfp = total_res - idtp;
  return 2.0 * static_cast<double>(idtp) /
         static_cast<double>(2 * idtp + idfp + idfn);
}

namespace {

// Every maximum-cardinality matching of a small frame, as (gt index,
// res index) pair lists in a deterministic order.
std::vector<std::vector<MatchPair>> max_cardinality_matchings(
    const std::vector<std::vector<char>>& feasible, std::size_t cols) {
  std::vector<std::vector<MatchPair>> out;
  std::size_t best_card = 0;
  std::vector<MatchPair> current;
  std::vector<char> used(cols, 0);
  const std::size_t rows = feasible.size();

  auto descend = [&](auto&& self, std::size_t row) -> void {
    if (row == rows) {
      if (current.size() > best_card) {
        best_card = current.size();
        out.clear();
      }
      if (current.size() == best_card) out.push_back(current);
      return;
    }
    self(self, row + 1);  // leave this row unmatched
    if (current.size() + (rows - row) < best_card) return;
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c] || !feasible[row][c]) continue;
      used[c] = 1;
      current.push_back({row, c});
      self(self, row + 1);
      current.pop_back();
      used[c] = 0;
    }
  };
  descend(descend, 0);

  std::erase_if(out, [&](const std::vector<MatchPair>& m) {
    return m.size() < best_card;
  });
  return out;
}

}  // namespace

HotaResult hota(const TrackMap& gt, const TrackMap& results) {
  long total_gt = 0;
  for (const auto& [_, entries] : gt) total_gt += entries.size();
  if (total_gt == 0) throw std::invalid_argument("hota: empty ground truth");

  const std::vector<int> frames = all_frames(gt, results);

  // Cache per-frame IoU matrices.
  struct FrameData {
    const std::vector<std::pair<std::int64_t, BBox>>* gt;
    const std::vector<std::pair<std::int64_t, BBox>>* res;
    std::vector<std::vector<double>> iou;
  };
  std::vector<FrameData> data;
  data.reserve(frames.size());
  std::map<std::int64_t, long> gt_len, res_len;
  for (const int frame : frames) {
    FrameData d;
    d.gt = &frame_or_empty(gt, frame);
    d.res = &frame_or_empty(results, frame);
    d.iou.assign(d.gt->size(), std::vector<double>(d.res->size(), 0.0));
    for (std::size_t i = 0; i < d.gt->size(); ++i) {
      ++gt_len[(*d.gt)[i].first];
      for (std::size_t j = 0; j < d.res->size(); ++j) {
        d.iou[i][j] = iou((*d.gt)[i].second, (*d.res)[j].second);
      }
    }
    for (std::size_t j = 0; j < d.res->size(); ++j) ++res_len[(*d.res)[j].first];
    data.push_back(std::move(d));
  }

  // The association-optimal matching is searched exhaustively on inputs
  // small enough to enumerate; larger inputs use the alignment-seeded
  // per-frame coordinate ascent below.
  const bool exact_small =
      gt_len.size() <= 3 && res_len.size() <= 3 && data.size() <= 5;

  double hota_sum = 0.0, deta_sum = 0.0, assa_sum = 0.0;
  int levels = 0;
  for (int level = 1; level <= 19; ++level) {
    const double alpha = 0.05 * level;

    // Potential (not one-to-one) co-location counts at this threshold
    // drive the pairing preference of the per-frame matching.
    std::map<std::pair<std::int64_t, std::int64_t>, long> potential;
    for (const FrameData& d : data) {
      for (std::size_t i = 0; i < d.gt->size(); ++i) {
        for (std::size_t j = 0; j < d.res->size(); ++j) {
          if (d.iou[i][j] >= alpha) ++potential[{(*d.gt)[i].first,
                                                 (*d.res)[j].first}];
        }
      }
    }
    auto alignment = [&](std::int64_t gid, std::int64_t pid) {
      const auto it = potential.find({gid, pid});
      if (it == potential.end()) return 0.0;
      return static_cast<double>(it->second) /
             static_cast<double>(gt_len[gid] + res_len[pid] - it->second);
    };

    auto pair_score = [&](std::int64_t gid, std::int64_t pid, long tpa) {
      if (tpa <= 0) return 0.0;
      return static_cast<double>(tpa) * tpa /
             static_cast<double>(gt_len[gid] + res_len[pid] - tpa);
    };

    long tp = 0, fn = 0, fp = 0;
    std::map<std::pair<std::int64_t, std::int64_t>, long> matched_count;

    if (exact_small) {
      std::vector<std::vector<std::vector<MatchPair>>> options;
      for (const FrameData& d : data) {
        std::vector<std::vector<char>> feasible(
            d.gt->size(), std::vector<char>(d.res->size(), 0));
        for (std::size_t i = 0; i < d.gt->size(); ++i) {
          for (std::size_t j = 0; j < d.res->size(); ++j) {
            feasible[i][j] = d.iou[i][j] >= alpha;
          }
        }
        auto opts = max_cardinality_matchings(feasible, d.res->size());
        const std::size_t card = opts.empty() ? 0 : opts[0].size();
        tp += static_cast<long>(card);
        fn += static_cast<long>(d.gt->size() - card);
        fp += static_cast<long>(d.res->size() - card);
        options.push_back(std::move(opts));
      }

      double best_sum = -1.0;
      std::map<std::pair<std::int64_t, std::int64_t>, long> counts;
      auto descend = [&](auto&& self, std::size_t f) -> void {
        if (f == options.size()) {
          double sum = 0.0;
          for (const auto& [pair, tpa] : counts) {
            sum += pair_score(pair.first, pair.second, tpa);
          }
          if (sum > best_sum) {
            best_sum = sum;
            matched_count = counts;
          }
          return;
        }
        const FrameData& d = data[f];
        for (const auto& option : options[f]) {
          for (const MatchPair& p : option) {
            ++counts[{(*d.gt)[p.row].first, (*d.res)[p.col].first}];
          }
          self(self, f + 1);
          for (const MatchPair& p : option) {
            auto it = counts.find({(*d.gt)[p.row].first,
                                   (*d.res)[p.col].first});
            if (--it->second == 0) counts.erase(it);
          }
        }
      };
      descend(descend, 0);

      double det_a = 0.0, ass_a = 0.0;
      if (tp > 0) {
        det_a = static_cast<double>(tp) / static_cast<double>(tp + fn + fp);
        ass_a = best_sum / static_cast<double>(tp);
      }
      hota_sum += std::sqrt(det_a * ass_a);
      deta_sum += det_a;
      assa_sum += ass_a;
      ++levels;
      continue;
    }

    std::vector<std::vector<MatchPair>> frame_matches;
    for (const FrameData& d : data) {
      CostMatrix costs(d.gt->size(), d.res->size());
      for (std::size_t i = 0; i < d.gt->size(); ++i) {
        for (std::size_t j = 0; j < d.res->size(); ++j) {
          if (d.iou[i][j] < alpha) continue;
          const double a = alignment((*d.gt)[i].first, (*d.res)[j].first);
          // small overlap term grounds ties without disturbing the
          // alignment ordering
          costs(i, j) = 1.0 - (a + 1e-9 * d.iou[i][j]) / (1.0 + 1e-9);
        }
      }
      const Matching match = solve(costs);
      tp += static_cast<long>(match.pairs.size());
      fn += static_cast<long>(d.gt->size() - match.pairs.size());
      fp += static_cast<long>(d.res->size() - match.pairs.size());
      for (const MatchPair& p : match.pairs) {
        ++matched_count[{(*d.gt)[p.row].first, (*d.res)[p.col].first}];
      }
      frame_matches.push_back(match.pairs);
    }

    // Association refinement: with every other frame fixed, the best
    // matching for one frame is an assignment over the marginal gains of
    // co-matching each id pair once more. Sweeping frames with that exact
    // subproblem monotonically raises the association score at constant
    // TP, until no frame wants to change.
    for (int sweep = 0; sweep < 50; ++sweep) {
      bool changed = false;
      for (std::size_t f = 0; f < data.size(); ++f) {
        const FrameData& d = data[f];
        if (frame_matches[f].empty()) continue;
        for (const MatchPair& p : frame_matches[f]) {
          --matched_count[{(*d.gt)[p.row].first, (*d.res)[p.col].first}];
        }
        CostMatrix costs(d.gt->size(), d.res->size());
        double max_gain = 0.0;
        std::vector<std::vector<double>> gains(
            d.gt->size(), std::vector<double>(d.res->size(), 0.0));
        for (std::size_t i = 0; i < d.gt->size(); ++i) {
          for (std::size_t j = 0; j < d.res->size(); ++j) {
            if (d.iou[i][j] < alpha) continue;
            const std::int64_t gid = (*d.gt)[i].first;
            const std::int64_t pid = (*d.res)[j].first;
            const auto it = matched_count.find({gid, pid});
            const long tpa = it == matched_count.end() ? 0 : it->second;
            gains[i][j] = pair_score(gid, pid, tpa + 1) -
                          pair_score(gid, pid, tpa) +
                          1e-12 * d.iou[i][j];
            max_gain = std::max(max_gain, gains[i][j]);
          }
        }
        for (std::size_t i = 0; i < d.gt->size(); ++i) {
          for (std::size_t j = 0; j < d.res->size(); ++j) {
            if (d.iou[i][j] >= alpha) {
              costs(i, j) = max_gain + 1.0 - gains[i][j];
            }
          }
        }
        const Matching refit = solve(costs);
        bool same = refit.pairs.size() == frame_matches[f].size();
        for (std::size_t k = 0; same && k < refit.pairs.size(); ++k) {
          same = refit.pairs[k].row == frame_matches[f][k].row &&
                 refit.pairs[k].col == frame_matches[f][k].col;
        }
        if (!same) changed = true;
        frame_matches[f] = refit.pairs;
        for (const MatchPair& p : frame_matches[f]) {
          ++matched_count[{(*d.gt)[p.row].first, (*d.res)[p.col].first}];
        }
      }
      if (!changed) break;
    }
    for (auto it = matched_count.begin(); it != matched_count.end();) {
      it = it->second == 0 ? matched_count.erase(it) : std::next(it);
    }

    double det_a = 0.0, ass_a = 0.0;
    if (tp > 0) {
      det_a = static_cast<double>(tp) / static_cast<double>(tp + fn + fp);
      double ass_sum = 0.0;
      for (const auto& [pair, tpa] : matched_count) {
        const double a =
            static_cast<double>(tpa) /
            static_cast<double>(gt_len[pair.first] + res_len[pair.second] - tpa);
        ass_sum += static_cast<double>(tpa) * a;
      }
      ass_a = ass_sum / static_cast<double>(tp);
    }
    hota_sum += std::sqrt(det_a * ass_a);
    deta_sum += det_a;
    assa_sum += ass_a;
    ++levels;
  }

  return {hota_sum / levels, deta_sum / levels, assa_sum / levels};
}

}  // namespace lowmot
