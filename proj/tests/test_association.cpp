#include <doctest.h>

#include <set>

#include "lowmot/association.hpp"
#include "lowmot/random.hpp"
#include "oracles.hpp"

using namespace lowmot;

namespace {

TrackletGate gate_at(std::int64_t id, double cx, double cy, double w, double h,
                     double staleness) {
  return {id, bbox_from_center(cx, cy, w, h), w, h, staleness,
          Eigen::Matrix2d::Identity() * 25.0};
}

struct RandomInstance {
  std::vector<TrackletGate> tracklets;
  std::vector<BBox> detections;
  SimilarityMatrix similarity;
};

RandomInstance random_instance(Rng& rng, std::size_t max_side) {
  RandomInstance inst;
  const std::size_t n = rng.next() % (max_side + 1);
  const std::size_t m = rng.next() % (max_side + 1);
  for (std::size_t i = 0; i < n; ++i) {
    inst.tracklets.push_back(gate_at(static_cast<std::int64_t>(i) + 1,
                                     rng.uniform(0, 300), rng.uniform(0, 300),
                                     rng.uniform(10, 60), rng.uniform(10, 60),
                                     rng.uniform(0, 0.6)));
  }
  for (std::size_t j = 0; j < m; ++j) {
    inst.detections.push_back(
        bbox_from_center(rng.uniform(0, 300), rng.uniform(0, 300),
                         rng.uniform(10, 60), rng.uniform(10, 60)));
  }
  inst.similarity.assign(n, std::vector<double>(m, 0.0));
  for (auto& row : inst.similarity) {
    for (double& s : row) s = rng.uniform(-1.0, 1.0);
  }
  return inst;
}

}  // namespace

TEST_SUITE_BEGIN("association");

TEST_CASE("stage-1 cost entries follow the gate conjunction") {
  const AssociationConfig config;
  const BbdParams bbd_params;

  SUBCASE("coincident boxes with strong appearance") {
    const std::vector<TrackletGate> t{gate_at(1, 100, 100, 40, 40, 0.1)};
    const std::vector<BBox> d{bbox_from_center(100, 100, 40, 40)};
    const SimilarityMatrix s{{0.9}};
    const CostMatrix c = stage1_costs(t, d, s, config, bbd_params);
    CHECK(c(0, 0) == doctest::Approx(0.1));
  }
  SUBCASE("distance gate fails despite high appearance") {
    // residual 800 px on a 10 px box at the upper clip: distance 160 > 16
    const std::vector<TrackletGate> t{gate_at(1, 0, 0, 10, 10, 1.0)};
    const std::vector<BBox> d{bbox_from_center(800, 0, 10, 10)};
    const SimilarityMatrix s{{0.99}};
    const CostMatrix c = stage1_costs(t, d, s, config, bbd_params);
    CHECK(!std::isfinite(c(0, 0)));
  }
  SUBCASE("boundary similarity is excluded") {
    const std::vector<TrackletGate> t{gate_at(1, 100, 100, 40, 40, 0.1)};
    const std::vector<BBox> d{bbox_from_center(101, 100, 40, 40)};
    const SimilarityMatrix s{{0.65}};
    const CostMatrix c = stage1_costs(t, d, s, config, bbd_params);
    CHECK(!std::isfinite(c(0, 0)));
  }
}

TEST_CASE("stage-2 cost entries follow the overlap gate") {
  const AssociationConfig config;
  const std::vector<TrackletGate> t{gate_at(1, 100, 100, 40, 40, 0.1)};
  const std::vector<std::size_t> rows{0}, cols{0};

  SUBCASE("high overlap with moderate appearance") {
    const std::vector<BBox> d{bbox_from_center(102, 100, 40, 40)};
    const SimilarityMatrix s{{0.5}};
    const CostMatrix c = stage2_costs(t, d, rows, cols, s, config);
    CHECK(c(0, 0) == doctest::Approx(0.5));
  }
  SUBCASE("low overlap is infeasible") {
    const std::vector<BBox> d{bbox_from_center(140, 140, 40, 40)};
    const SimilarityMatrix s{{0.9}};
    const CostMatrix c = stage2_costs(t, d, rows, cols, s, config);
    CHECK(!std::isfinite(c(0, 0)));
  }
  SUBCASE("appearance below the low threshold is infeasible") {
    const std::vector<BBox> d{bbox_from_center(101, 101, 40, 40)};
    const SimilarityMatrix s{{0.2}};
    const CostMatrix c = stage2_costs(t, d, rows, cols, s, config);
    CHECK(!std::isfinite(c(0, 0)));
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  const std::vector<TrackletGate> t{gate_at(1, 0, 0, 10, 10, 0.1)};
  const std::vector<BBox> d{bbox_from_center(0, 0, 10, 10)};
  const SimilarityMatrix s{{0.5, 0.5}};
  CHECK_THROWS_AS(stage1_costs(t, d, s, config, bbd_params),
                  std::invalid_argument);
}

TEST_CASE("empty detections leave every tracklet unmatched") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  std::vector<TrackletGate> t{gate_at(1, 0, 0, 10, 10, 0.1),
                              gate_at(2, 50, 50, 10, 10, 0.1)};
  const AssociationOutcome outcome =
      associate(t, {}, SimilarityMatrix(2), config, bbd_params);
  CHECK(outcome.matches.empty());
  CHECK(outcome.unmatched_tracklets.size() == 2);
  CHECK(outcome.unmatched_detections.empty());
}

TEST_CASE("single coincident pair matches at stage 1") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  const std::vector<TrackletGate> t{gate_at(7, 100, 100, 40, 40, 0.2)};
  const std::vector<BBox> d{bbox_from_center(100, 100, 40, 40)};
  const AssociationOutcome outcome =
      associate(t, d, {{0.9}}, config, bbd_params);
  REQUIRE(outcome.matches.size() == 1);
  CHECK(outcome.matches[0].tracklet_id == 7);
  CHECK(outcome.matches[0].stage == 1);
  CHECK(outcome.matches[0].similarity == doctest::Approx(0.9));
}

TEST_CASE("stage-2 rescues an overlap pair with weak appearance") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  // A-1 passes stage 1; B-2 has appearance below the high threshold but
  // overlaps well, so it lands in stage 2.
  const std::vector<TrackletGate> t{gate_at(1, 100, 100, 40, 40, 0.1),
                                    gate_at(2, 300, 100, 40, 40, 0.1)};
  const std::vector<BBox> d{bbox_from_center(100, 100, 40, 40),
                            bbox_from_center(302, 100, 40, 40)};
  const SimilarityMatrix s{{0.9, -0.2}, {-0.2, 0.5}};
  const AssociationOutcome outcome = associate(t, d, s, config, bbd_params);
  REQUIRE(outcome.matches.size() == 2);
  std::map<std::int64_t, int> stages;
  for (const auto& m : outcome.matches) stages[m.tracklet_id] = m.stage;
  CHECK(stages[1] == 1);
  CHECK(stages[2] == 2);
}

TEST_CASE("a pair eligible for both stages is matched in stage 1") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  const std::vector<TrackletGate> t{gate_at(1, 100, 100, 40, 40, 0.1)};
  const std::vector<BBox> d{bbox_from_center(101, 100, 40, 40)};
  const AssociationOutcome outcome =
      associate(t, d, {{0.95}}, config, bbd_params);
  REQUIRE(outcome.matches.size() == 1);
  CHECK(outcome.matches[0].stage == 1);
}

TEST_CASE("outcome invariants and oracle agreement on random instances") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  Rng rng(31337);
  for (int trial = 0; trial < 3000; ++trial) {
    const RandomInstance inst = random_instance(rng, 4);
    const AssociationOutcome outcome = associate(
        inst.tracklets, inst.detections, inst.similarity, config, bbd_params);

    std::set<std::size_t> seen_t, seen_d;
    std::size_t stage1_count = 0, stage2_count = 0;
    double stage1_cost = 0.0, stage2_cost = 0.0;
    for (const auto& m : outcome.matches) {
      CHECK(seen_t.insert(m.tracklet_index).second);
      CHECK(seen_d.insert(m.detection_index).second);
      const double threshold = m.stage == 1 ? config.theta_reid_high
                                            : config.theta_reid_low;
      CHECK(m.similarity > threshold);
      if (m.stage == 1) {
        ++stage1_count;
        stage1_cost += 1.0 - m.similarity;
      } else {
        ++stage2_count;
        stage2_cost += 1.0 - m.similarity;
      }
    }
    CHECK(outcome.matches.size() + outcome.unmatched_tracklets.size() ==
          inst.tracklets.size());
    CHECK(outcome.matches.size() + outcome.unmatched_detections.size() ==
          inst.detections.size());

    const oracle::TwoStageSummary expected = oracle::two_stage(
        inst.tracklets, inst.detections, inst.similarity, config, bbd_params);
    CHECK(stage1_count == expected.stage1.cardinality);
    CHECK(stage1_cost ==
          doctest::Approx(expected.stage1.total_cost).epsilon(1e-9));
    CHECK(stage2_count == expected.stage2.cardinality);
    CHECK(stage2_cost ==
          doctest::Approx(expected.stage2.total_cost).epsilon(1e-9));
  }
}

TEST_CASE("determinism byte for byte") {
  const AssociationConfig config;
  const BbdParams bbd_params;
  Rng rng(5150);
  const RandomInstance inst = random_instance(rng, 4);
  const AssociationOutcome a = associate(inst.tracklets, inst.detections,
                                         inst.similarity, config, bbd_params);
  const AssociationOutcome b = associate(inst.tracklets, inst.detections,
                                         inst.similarity, config, bbd_params);
  REQUIRE(a.matches.size() == b.matches.size());
  for (std::size_t i = 0; i < a.matches.size(); ++i) {
    CHECK(a.matches[i].tracklet_index == b.matches[i].tracklet_index);
    CHECK(a.matches[i].detection_index == b.matches[i].detection_index);
    CHECK(a.matches[i].stage == b.matches[i].stage);
    CHECK(a.matches[i].similarity == b.matches[i].similarity);
  }
  CHECK(a.unmatched_tracklets == b.unmatched_tracklets);
  CHECK(a.unmatched_detections == b.unmatched_detections);
}

TEST_CASE("raising the high threshold only shrinks the stage-1 set") {
  const BbdParams bbd_params;
  Rng rng(808);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomInstance inst = random_instance(rng, 4);
    AssociationConfig low_cfg;
    low_cfg.theta_reid_high = 0.5;
    AssociationConfig high_cfg;
    high_cfg.theta_reid_high = 0.75;
    low_cfg.two_stage = high_cfg.two_stage = false;

    const AssociationOutcome wide = associate(
        inst.tracklets, inst.detections, inst.similarity, low_cfg, bbd_params);
    const AssociationOutcome narrow =
        associate(inst.tracklets, inst.detections, inst.similarity, high_cfg,
                  bbd_params);
    CHECK(narrow.matches.size() <= wide.matches.size());
  }
}

TEST_SUITE_END();
