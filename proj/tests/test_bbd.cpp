#include <doctest.h>

#include <cmath>

#include "lowmot/bbd.hpp"
#include "lowmot/random.hpp"

using namespace lowmot;

TEST_SUITE_BEGIN("bbd");

TEST_CASE("staleness clipping") {
  const BbdParams params;
  CHECK(clip_tau(0.0, params) == doctest::Approx(0.025));
  CHECK(clip_tau(0.1, params) == doctest::Approx(0.1));
  CHECK(clip_tau(5.0, params) == doctest::Approx(0.25));
}

TEST_CASE("clipping is monotone") {
  const BbdParams params;
  double prev = clip_tau(0.0, params);
  for (double tau = 0.0; tau <= 1.0; tau += 0.01) {
    const double cur = clip_tau(tau, params);
    CHECK(cur >= prev);
    prev = cur;
  }
}

TEST_CASE("gating covariance examples") {
  const BbdParams params;
  SUBCASE("square box at the upper clip") {
    const GatingCovariance cov = gating_covariance(100, 100, 1.0, params);
    CHECK(cov.var_x == doctest::Approx(2500.0));
    CHECK(cov.var_y == doctest::Approx(2500.0));
  }
  SUBCASE("rectangular box at an interior staleness") {
    const GatingCovariance cov = gating_covariance(10, 20, 0.1, params);
    CHECK(cov.var_x == doctest::Approx(10.0));
    CHECK(cov.var_y == doctest::Approx(40.0));
  }
  SUBCASE("doubling c quadruples both entries") {
    BbdParams scaled = params;
    scaled.c = 2.0;
    const GatingCovariance base = gating_covariance(30, 40, 0.1, params);
    const GatingCovariance big = gating_covariance(30, 40, 0.1, scaled);
    CHECK(big.var_x == doctest::Approx(4.0 * base.var_x));
    CHECK(big.var_y == doctest::Approx(4.0 * base.var_y));
  }
}

TEST_CASE("distance examples") {
  CHECK(bbd({10, 20}, {10, 20}, {100, 100}) == 0.0);
  CHECK(bbd({0, 0}, {50, 0}, {2500, 2500}) == doctest::Approx(1.0));
  CHECK(bbd({0, 0}, {30, 40}, {100, 100}) == doctest::Approx(5.0));
}

TEST_CASE("distance shrinks as staleness grows") {
  const BbdParams params;
  double prev = 1e300;
  for (double tau = 0.0; tau <= 0.6; tau += 0.05) {
    const GatingCovariance cov = gating_covariance(40, 60, tau, params);
    const double d = bbd({0, 0}, {25, -12}, cov);
    CHECK(d <= prev + 1e-12);
    prev = d;
  }
}

TEST_CASE("scale invariance of residual and box size") {
  const BbdParams params;
  Rng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    const double dx = rng.uniform(-80, 80);
    const double dy = rng.uniform(-80, 80);
    const double w = rng.uniform(2, 120);
    const double h = rng.uniform(2, 120);
    const double tau = rng.uniform(0, 0.5);
    const double k = rng.uniform(0.05, 20.0);

    const double base =
        bbd({0, 0}, {dx, dy}, gating_covariance(w, h, tau, params));
    const double scaled = bbd({0, 0}, {k * dx, k * dy},
                              gating_covariance(k * w, k * h, tau, params));
    CHECK(scaled == doctest::Approx(base).epsilon(1e-9));
  }
}

TEST_CASE("triangle inequality in the residual") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const GatingCovariance cov{rng.uniform(1, 500), rng.uniform(1, 500)};
    const std::pair<double, double> a{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const std::pair<double, double> b{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    const std::pair<double, double> c{rng.uniform(-50, 50), rng.uniform(-50, 50)};
    CHECK(bbd(a, c, cov) <= bbd(a, b, cov) + bbd(b, c, cov) + 1e-9);
  }
}

TEST_CASE("mahalanobis comparator on a known covariance") {
  Eigen::Matrix2d cov;
  cov << 4.0, 0.0, 0.0, 9.0;
  CHECK(mahalanobis_center_distance({0, 0}, {2, 0}, cov) ==
        doctest::Approx(1.0));
  CHECK(mahalanobis_center_distance({0, 0}, {0, 3}, cov) ==
        doctest::Approx(1.0));
  CHECK(mahalanobis_center_distance({0, 0}, {2, 3}, cov) ==
        doctest::Approx(std::sqrt(2.0)));
}

TEST_SUITE_END();
