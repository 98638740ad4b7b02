#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace lowmot::oracle {

namespace {

// All injective matchings over a feasibility/score mask, keeping the best
// by (max cardinality, then max score).
struct EnumBest {
  std::size_t cardinality = 0;
  double score = -1e300;
  std::vector<int> row_to_col;
  bool found = false;
};

void enumerate_matchings(
    const std::vector<std::vector<double>>& score,  // NaN = infeasible
    std::size_t row, std::vector<int>& row_to_col, std::vector<char>& used,
    std::size_t cardinality, double total,
    const std::function<void(const std::vector<int>&, std::size_t, double)>&
        visit) {
  if (row == score.size()) {
    visit(row_to_col, cardinality, total);
    return;
  }
  row_to_col[row] = -1;
  enumerate_matchings(score, row + 1, row_to_col, used, cardinality, total,
                      visit);
  for (std::size_t c = 0; c < used.size(); ++c) {
    if (used[c] || std::isnan(score[row][c])) continue;
    used[c] = 1;
    row_to_col[row] = static_cast<int>(c);
    enumerate_matchings(score, row + 1, row_to_col, used, cardinality + 1,
                        total + score[row][c], visit);
    row_to_col[row] = -1;
    used[c] = 0;
  }
}

EnumBest best_matching(const std::vector<std::vector<double>>& score,
                       std::size_t cols) {
  EnumBest best;
  std::vector<int> row_to_col(score.size(), -1);
  std::vector<char> used(cols, 0);
  enumerate_matchings(
      score, 0, row_to_col, used, 0, 0.0,
      [&](const std::vector<int>& assignment, std::size_t cardinality,
          double total) {
        if (!best.found || cardinality > best.cardinality ||
            (cardinality == best.cardinality && total > best.score)) {
          best.found = true;
          best.cardinality = cardinality;
          best.score = total;
          best.row_to_col = assignment;
        }
      });
  return best;
}

const std::vector<std::pair<std::int64_t, BBox>>& frame_or_empty(
    const TrackMap& m, int frame) {
  static const std::vector<std::pair<std::int64_t, BBox>> empty;
  const auto it = m.find(frame);
  return it == m.end() ? empty : it->second;
}

std::vector<int> all_frames(const TrackMap& gt, const TrackMap& results) {
  std::set<int> frames;
  for (const auto& [f, _] : gt) frames.insert(f);
  for (const auto& [f, _] : results) frames.insert(f);
  return {frames.begin(), frames.end()};
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TwoStageSummary two_stage(const std::vector<TrackletGate>& tracklets,
                          const std::vector<BBox>& detections,
                          const SimilarityMatrix& similarity,
                          const AssociationConfig& config,
                          const BbdParams& bbd_params) {
  TwoStageSummary out;

  auto stage_score = [&](bool stage1, const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& cols) {
    std::vector<std::vector<double>> score(
        rows.size(), std::vector<double>(cols.size(), kNaN));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::size_t i = rows[r];
        const std::size_t j = cols[c];
        const double s = similarity[i][j];
        bool pass = false;
        if (stage1) {
          bool gate = true;
          if (config.stage1_gate == Stage1Gate::kBbd) {
            const GatingCovariance cov = gating_covariance(
                tracklets[i].state_width, tracklets[i].state_height,
                tracklets[i].staleness, bbd_params);
            gate = bbd(center(tracklets[i].box), center(detections[j]), cov) <
                   config.theta_bbd;
          } else if (config.stage1_gate == Stage1Gate::kMahalanobis) {
            gate = mahalanobis_center_distance(center(tracklets[i].box),
                                               center(detections[j]),
                                               tracklets[i].center_cov) <
                   config.theta_maha;
          }
          pass = gate && s > config.theta_reid_high;
        } else {
          pass = iou(tracklets[i].box, detections[j]) > config.theta_iou &&
                 s > config.theta_reid_low;
        }
        // score = -cost so the enumerator's max-score = min-cost
        if (pass) score[r][c] = -std::max(0.0, 1.0 - s);
      }
    }
    return score;
  };

  std::vector<std::size_t> rows(tracklets.size());
  std::vector<std::size_t> cols(detections.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;

  const auto s1 = best_matching(stage_score(true, rows, cols), cols.size());
  out.stage1 = {s1.cardinality, -s1.score};
  if (s1.cardinality == 0) out.stage1.total_cost = 0.0;

  std::vector<std::size_t> rows2, cols2;
  std::vector<char> col_taken(detections.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (s1.row_to_col.empty() || s1.row_to_col[r] < 0) rows2.push_back(r);
    else col_taken[cols[s1.row_to_col[r]]] = 1;
  }
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!col_taken[j]) cols2.push_back(j);
  }

  if (config.two_stage) {
    const auto s2 = best_matching(stage_score(false, rows2, cols2),
                                  cols2.size());
    out.stage2 = {s2.cardinality, s2.cardinality ? -s2.score : 0.0};
  }
  return out;
}

ClearResult clear_metrics(const TrackMap& gt, const TrackMap& results,
                          double iou_gate) {
  ClearResult out;
  for (const auto& [_, entries] : gt) out.gt_count += entries.size();
  if (out.gt_count == 0) {
    throw std::invalid_argument("oracle clear: empty ground truth");
  }

  std::map<std::int64_t, std::int64_t> last_match;
  for (const int frame : all_frames(gt, results)) {
    const auto& gt_frame = frame_or_empty(gt, frame);
    const auto& res_frame = frame_or_empty(results, frame);

    std::vector<char> gt_taken(gt_frame.size(), 0);
    std::vector<char> res_taken(res_frame.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matched;

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

    std::vector<std::size_t> free_gt, free_res;
    for (std::size_t i = 0; i < gt_frame.size(); ++i) {
      if (!gt_taken[i]) free_gt.push_back(i);
    }
    for (std::size_t j = 0; j < res_frame.size(); ++j) {
      if (!res_taken[j]) free_res.push_back(j);
    }
    std::vector<std::vector<double>> score(
        free_gt.size(), std::vector<double>(free_res.size(), kNaN));
    for (std::size_t r = 0; r < free_gt.size(); ++r) {
      for (std::size_t c = 0; c < free_res.size(); ++c) {
        const double overlap =
            iou(gt_frame[free_gt[r]].second, res_frame[free_res[c]].second);
        if (overlap >= iou_gate) score[r][c] = overlap;
      }
    }
    const EnumBest best = best_matching(score, free_res.size());
    for (std::size_t r = 0; r < free_gt.size(); ++r) {
      if (!best.row_to_col.empty() && best.row_to_col[r] >= 0) {
        matched.push_back({free_gt[r], free_res[best.row_to_col[r]]});
      }
    }

    out.false_negatives += static_cast<long>(gt_frame.size() - matched.size());
    out.false_positives += static_cast<long>(res_frame.size() - matched.size());
    for (const auto& [i, j] : matched) {
      const std::int64_t gid = gt_frame[i].first;
      const std::int64_t pid = res_frame[j].first;
      const auto it = last_match.find(gid);
      if (it != last_match.end() && it->second != pid) ++out.id_switches;
      last_match[gid] = pid;
    }
  }
  out.mota = 1.0 - static_cast<double>(out.false_negatives +
                                       out.false_positives + out.id_switches) /
                       static_cast<double>(out.gt_count);
  return out;
}

double idf1(const TrackMap& gt, const TrackMap& results, double iou_gate) {
  std::map<std::int64_t, long> gt_len, res_len;
  std::map<std::pair<std::int64_t, std::int64_t>, long> overlap_count;
  long total_gt = 0, total_res = 0;
  for (const auto& [frame, gt_frame] : gt) {
    total_gt += static_cast<long>(gt_frame.size());
    for (const auto& [gid, gbox] : gt_frame) {
      ++gt_len[gid];
      for (const auto& [pid, pbox] : frame_or_empty(results, frame)) {
        if (iou(gbox, pbox) >= iou_gate) ++overlap_count[{gid, pid}];
      }
    }
  }
  if (total_gt == 0) throw std::invalid_argument("oracle idf1: empty gt");
  for (const auto& [_, res_frame] : results) {
    total_res += static_cast<long>(res_frame.size());
    for (const auto& [pid, __] : res_frame) ++res_len[pid];
  }
  if (total_res == 0) return 0.0;

  std::vector<std::int64_t> gids, pids;
  for (const auto& [gid, _] : gt_len) gids.push_back(gid);
  for (const auto& [pid, _] : res_len) pids.push_back(pid);

  std::vector<std::vector<double>> score(
      gids.size(), std::vector<double>(pids.size(), kNaN));
  for (std::size_t i = 0; i < gids.size(); ++i) {
    for (std::size_t j = 0; j < pids.size(); ++j) {
      const auto it = overlap_count.find({gids[i], pids[j]});
      score[i][j] = it == overlap_count.end()
                        ? 0.0
                        : static_cast<double>(it->second);
    }
  }
  // Enumerate every id assignment; IDTP is the best total overlap. The
  // cardinality tie-break is irrelevant because extra zero-overlap pairs
  // change nothing, so take the max score over all cardinalities.
  long idtp = 0;
  std::vector<int> row_to_col(gids.size(), -1);
  std::vector<char> used(pids.size(), 0);
  enumerate_matchings(score, 0, row_to_col, used, 0, 0.0,
                      [&](const std::vector<int>&, std::size_t, double total) {
                        idtp = std::max(idtp, static_cast<long>(
                                                  std::llround(total)));
                      });
  return 2.0 * static_cast<double>(idtp) /
         static_cast<double>(total_gt + total_res);
}

HotaResult hota(const TrackMap& gt, const TrackMap& results) {
  long total_gt = 0, total_res = 0;
  std::map<std::int64_t, long> gt_len, res_len;
  for (const auto& [_, entries] : gt) {
    total_gt += static_cast<long>(entries.size());
    for (const auto& [gid, __] : entries) ++gt_len[gid];
  }
  if (total_gt == 0) throw std::invalid_argument("oracle hota: empty gt");
  for (const auto& [_, entries] : results) {
    total_res += static_cast<long>(entries.size());
    for (const auto& [pid, __] : entries) ++res_len[pid];
  }

  const std::vector<int> frames = all_frames(gt, results);

  HotaResult out;
  for (int level = 1; level <= 19; ++level) {
    const double alpha = 0.05 * level;

    // Per frame: every maximum-cardinality matching over pairs with
    // IoU >= alpha.
    std::vector<std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>>>
        per_frame_options;
    long tp = 0;
    for (const int frame : frames) {
      const auto& gt_frame = frame_or_empty(gt, frame);
      const auto& res_frame = frame_or_empty(results, frame);
      std::vector<std::vector<double>> score(
          gt_frame.size(), std::vector<double>(res_frame.size(), kNaN));
      for (std::size_t i = 0; i < gt_frame.size(); ++i) {
        for (std::size_t j = 0; j < res_frame.size(); ++j) {
          if (iou(gt_frame[i].second, res_frame[j].second) >= alpha) {
            score[i][j] = 0.0;
          }
        }
      }
      std::size_t max_card = 0;
      {
        std::vector<int> rtc(gt_frame.size(), -1);
        std::vector<char> used(res_frame.size(), 0);
        enumerate_matchings(score, 0, rtc, used, 0, 0.0,
                            [&](const std::vector<int>&, std::size_t card,
                                double) { max_card = std::max(max_card, card); });
      }
      tp += static_cast<long>(max_card);

      std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> options;
      std::vector<int> rtc(gt_frame.size(), -1);
      std::vector<char> used(res_frame.size(), 0);
      enumerate_matchings(
          score, 0, rtc, used, 0, 0.0,
          [&](const std::vector<int>& assignment, std::size_t card, double) {
            if (card != max_card) return;
            std::vector<std::pair<std::int64_t, std::int64_t>> pairs;
            for (std::size_t i = 0; i < assignment.size(); ++i) {
              if (assignment[i] >= 0) {
                pairs.push_back(
                    {gt_frame[i].first, res_frame[assignment[i]].first});
              }
            }
            options.push_back(std::move(pairs));
          });
      per_frame_options.push_back(std::move(options));
    }

    // Search the cross product of per-frame choices for the best total
    // association score.
    double best_ass_sum = -1.0;
    std::map<std::pair<std::int64_t, std::int64_t>, long> counts;
    std::function<void(std::size_t)> descend = [&](std::size_t f) {
      if (f == per_frame_options.size()) {
        double sum = 0.0;
        for (const auto& [pair, tpa] : counts) {
          sum += static_cast<double>(tpa) * static_cast<double>(tpa) /
                 static_cast<double>(gt_len[pair.first] +
                                     res_len[pair.second] - tpa);
        }
        best_ass_sum = std::max(best_ass_sum, sum);
        return;
      }
      for (const auto& option : per_frame_options[f]) {
        for (const auto& p : option) ++counts[p];
        descend(f + 1);
        for (const auto& p : option) {
          if (--counts[p] == 0) counts.erase(p);
        }
      }
    };
    descend(0);

    double det_a = 0.0, ass_a = 0.0;
    if (tp > 0) {
      const long fn = total_gt - tp;
      const long fp = total_res - tp;
      det_a = static_cast<double>(tp) / static_cast<double>(tp + fn + fp);
      ass_a = best_ass_sum / static_cast<double>(tp);
    }
    out.hota += std::sqrt(det_a * ass_a) / 19.0;
    out.det_a += det_a / 19.0;
    out.ass_a += ass_a / 19.0;
  }
  return out;
}

}  // namespace lowmot::oracle
