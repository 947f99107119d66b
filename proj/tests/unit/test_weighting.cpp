#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rbl/weighting.hpp"

using namespace rbl;

namespace {

ConvexRegion unit_square() { return ConvexRegion::from_vertices({{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

std::vector<Point2> as_vector(const ConvexRegion& r) { return {r.vertices().begin(), r.vertices().end()}; }

}  // namespace

TEST_CASE("phi values") {
  CHECK(phi({1, 2}, {1, 2}, 0.3) == 1.0);
  CHECK(phi({0.5, 0}, {0, 0}, 0.5) == doctest::Approx(std::exp(-1.0)));
  CHECK(phi({3, 0}, {0, 0}, 0.15) == doctest::Approx(std::exp(-20.0)).epsilon(1e-12));
  CHECK_THROWS_AS(phi({0, 0}, {0, 0}, 0.0), std::invalid_argument);
}

TEST_CASE("weighted centroid symmetry and uniform limit") {
  const auto sq = unit_square();
  for (double beta : {1e-3, 0.01, 0.3, 5.0, 1e3}) {
    const Point2 c = weighted_centroid(sq, {0.5, 0.5}, beta);
    CHECK(c.x == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(c.y == doctest::Approx(0.5).epsilon(1e-9));
  }
  const Point2 c = weighted_centroid(sq, {0.9, 0.1}, 1e6);
  CHECK(distance(c, {0.5, 0.5}) <= 1e-4);
  CHECK_THROWS_AS(weighted_centroid(ConvexRegion{}, {0, 0}, 1.0), GeometryError);
  CHECK_THROWS_AS(weighted_centroid(sq, {0, 0}, -1.0), std::invalid_argument);
}

TEST_CASE("weighted centroid matches a dense grid for an outside attractor") {
  const auto sq = unit_square();
  const Point2 c = weighted_centroid(sq, {2, 0.5}, 0.5);
  const Point2 g = oracle::grid_weighted_centroid(as_vector(sq), {2, 0.5}, 0.5, 4000);
  CHECK(distance(c, g) <= 1e-3);
}

TEST_CASE("far attractor with a tiny beta does not underflow") {
  const auto sq = unit_square();
  const auto r = weighted_centroid_ex(sq, {200, 0.5}, 0.01);
  CHECK_FALSE(r.fallback);
  CHECK(contains(sq, r.point));
  CHECK(r.point.x > 0.98);
  CHECK(r.point.y == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("centroid stays inside and localizes monotonically") {
  const auto region = ConvexRegion::from_vertices({{0, 0}, {4, 0}, {3, 2}, {0.5, 1.5}});
  const Point2 pbar{3.2, 0.4};
  double last = 1e300;
  for (double beta = 10.0; beta > 0.01; beta *= 0.8) {
    const Point2 c = weighted_centroid(region, pbar, beta);
    CHECK(contains(region, c));
    const double d = distance(c, pbar);
    CHECK(d <= last + 1e-6);
    last = d;
  }
}

TEST_CASE("beta_min examples") {
  const auto disc = disc_polygon({0, 0}, 2, 64);
  const auto r0 = beta_min(disc, {0, 0}, 0.7);
  CHECK(r0.feasible);
  CHECK(r0.clearance == doctest::Approx(2.0 * std::cos(std::numbers::pi / 64)).epsilon(1e-6));

  const auto sq = unit_square();
  const auto r1 = beta_min(sq, {0.99, 0.5}, 0.3);
  CHECK(r1.feasible);
  CHECK(std::abs(r1.clearance - 0.3) <= 0.01);
  // The dense beta grid finds the first crossing near the same place.
  double first = -1.0;
  for (int k = 0; k < 1000; ++k) {
    const double beta = std::exp(std::log(1e-3) + (std::log(1e3) - std::log(1e-3)) * k / 999.0);
    if (boundary_distance(sq, weighted_centroid(sq, {0.99, 0.5}, beta)) >= 0.3) {
      first = beta;
      break;
    }
  }
  REQUIRE(first > 0);
  CHECK(std::abs(r1.beta - first) / first <= 0.05);

  const auto r2 = beta_min(sq, {0.5, 0.5}, 0.6);
  CHECK_FALSE(r2.feasible);
  CHECK(std::abs(r2.clearance - 0.5) <= 0.01);
  CHECK_THROWS_AS(beta_min(ConvexRegion{}, {0, 0}, 0.1), GeometryError);
}

TEST_CASE("update_beta branches and clamp") {
  AdaptationParams p;
  p.k_beta = 1.0;
  p.beta_D = 0.15;
  // Stuck: c_A close to p_i and far from c_S.
  CHECK(update_beta(1.0, {0, 0}, {0.5, 0}, {3, 0}, p, 0.0, 0.1) == doctest::Approx(0.9));
  // Relax.
  CHECK(update_beta(1.0, {0, 0}, {3, 0}, {3, 0}, p, 0.0, 0.1) == doctest::Approx(0.915));
  CHECK(update_beta(1.0, {0, 0}, {0.5, 0}, {3, 0}, p, 2.0, 0.1) == 2.0);
  // Equality falls to the relax branch.
  CHECK_FALSE(beta_shrink_condition({0, 0}, {1.0, 0}, {3, 0}, p));
  CHECK_THROWS(update_beta(1.0, {0, 0}, {0, 0}, {0, 0}, p, 0.0, 0.0));
}

TEST_CASE("update_beta converges geometrically") {
  AdaptationParams p;
  double beta = 2.0;
  for (int k = 0; k < 200; ++k) beta = update_beta(beta, {0, 0}, {3, 0}, {3, 0}, p, 0.0, 0.1);
  CHECK(beta == doctest::Approx(p.beta_D).epsilon(1e-6));
  double shrink = 2.0;
  for (int k = 0; k < 200; ++k) shrink = update_beta(shrink, {0, 0}, {0.5, 0}, {3, 0}, p, 0.4, 0.1);
  CHECK(shrink == 0.4);
}

TEST_CASE("update_pbar free, rotation and reset") {
  AdaptationParams p;
  AdaptiveState s{0.15, {0, 0}, false};
  auto free = update_pbar(s, {0, 0}, {5, 5}, {5, 5}, {5, 5}, {10, 0}, p, 0.1);
  CHECK(free.pbar.x == doctest::Approx(1.0));
  CHECK(free.pbar.y == doctest::Approx(0.0));
  CHECK_FALSE(free.rotation_active);

  p.eps_rot = 1e-9;
  const Point2 target = rotated_goal({0, 0}, {10, 0}, p);
  CHECK(target.x == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(target.y == doctest::Approx(-10.0));
  auto rot = update_pbar(s, {0, 0}, {0.5, 0}, {3, 0}, {0.5, 0}, {10, 0}, p, 0.1);
  CHECK(rot.rotation_active);
  CHECK(rot.pbar.y < 0.0);

  AdaptiveState active{0.15, {0, -5}, true};
  auto reset = update_pbar(active, {0, 0}, {0.5, 0}, {3, 0}, {2, 0}, {10, 0}, p, 0.1);
  CHECK(reset.reset);
  CHECK(reset.pbar == Point2{10, 0});
  CHECK_FALSE(reset.rotation_active);

  p.turn_sign = TurnSign::left;
  CHECK(rotated_goal({0, 0}, {10, 0}, p).y == doctest::Approx(10.0));
}
