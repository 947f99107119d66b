#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rbl/agent.hpp"

using namespace rbl;

namespace {

Measurement robot(int id, Point2 p, double lambda = 0.0, double radius = 0.2) {
  return {id, p, lambda, EntityKind::robot, radius};
}

}  // namespace

TEST_CASE("margin forms") {
  CHECK(margin_d_u(0.04, 2.0, 0.2, 0.2, 0.0) == doctest::Approx(0.8));
  CHECK(margin_d_u(0.04, 2.0, 0.2, 0.2, 0.0, MarginKind::proximity) == doctest::Approx(0.4));
  CHECK(margin_d_u(0.16, 2.0, 0.2, 0.2, 0.05) == doctest::Approx(1.25));
  CHECK(margin_d_u(0.0, 2.0, 0.2, 0.3, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("margin grows with variance and radii") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double lam = 4.0 * u(rng), di = u(rng), dj = u(rng), dt = 0.2 * u(rng);
    const double base = margin_d_u(lam, 2.0, di, dj, dt);
    CHECK(margin_d_u(lam + 0.1, 2.0, di, dj, dt) > base);
    CHECK(margin_d_u(lam, 2.0, di + 0.1, dj, dt) > base);
    CHECK(margin_d_u(lam, 2.0, di, dj, dt, MarginKind::proximity) <= base);
  }
}

TEST_CASE("gate drops noisy measurements and re-projects far neighbors") {
  ProximityMap prox{{1, 10.0}};
  const std::vector<Measurement> in{robot(1, {12.5, 0}), robot(2, {3, 0}, 20.0), robot(3, {0, 12.5})};
  const auto out = gate_and_reproject(in, {0, 0}, prox, 15.0);
  REQUIRE(out.size() == 2);
  CHECK(out[0].position.x == doctest::Approx(10.0 - kReprojectMargin));
  CHECK(out[0].position.y == 0.0);
  CHECK(out[1].target_id == 3);
  CHECK(out[1].position == Point2{0, 12.5});
}

TEST_CASE("free space command points at the goal at full speed") {
  AgentConfig cfg;
  cfg.goal = {20, 0};
  const auto d = decide({0, 0}, {0.15, cfg.goal, false}, {}, cfg);
  CHECK(norm(d.cmd) == doctest::Approx(cfg.v_max));
  CHECK(d.cmd.x > 0.0);
  CHECK(std::abs(d.cmd.y) < 1e-6);
  CHECK(contains(d.cell_F, d.diag.c_F));
}

TEST_CASE("agent at its goal stays put") {
  AgentConfig cfg;
  cfg.goal = {1, 1};
  const auto d = decide({1, 1}, {0.15, cfg.goal, false}, {}, cfg);
  CHECK(norm(d.cmd) < 1e-6);
}

TEST_CASE("smaller epsilon gives a larger first step against a head-on neighbor") {
  auto first_step = [](double eps) {
    AgentConfig cfg;
    cfg.goal = {20, 0};
    cfg.k_p = 0.2;
    cfg.v_max = 10.0;
    cfg.cell_params.epsilon_p = eps;
    return decide({0, 0}, {0.15, cfg.goal, false}, {robot(1, {4, 0})}, cfg);
  };
  const auto a = first_step(1.0);
  const auto b = first_step(2.0);
  CHECK(norm(a.cmd) > norm(b.cmd));
  CHECK(a.diag.c_F.x <= 4.0);
  CHECK(b.diag.c_F.x <= 2.0);
}

TEST_CASE("decide keeps the centroid clear of the boundary when feasible") {
  AgentConfig cfg;
  cfg.goal = {20, 3};
  const std::vector<Measurement> m{robot(1, {3, 0.5}, 0.01), robot(2, {-1, 3}, 0.02),
                                   {7, {2, -2}, 0.0, EntityKind::obstacle, 0.15}};
  const auto d = decide({0, 0}, {0.15, cfg.goal, false}, m, cfg);
  REQUIRE(d.diag.margin_feasible);
  CHECK(boundary_distance(d.cell_F, d.diag.c_F) >= d.diag.d_u - 1e-3);
  CHECK(d.diag.d_u == doctest::Approx(step_margin(m, cfg)));
}

TEST_CASE("collision state propagates") {
  AgentConfig cfg;
  cfg.goal = {20, 0};
  CHECK_THROWS_AS(decide({0, 0}, {0.15, cfg.goal, false}, {robot(1, {0.3, 0})}, cfg),
                  CollisionStateError);
}

TEST_CASE("tracking disturbance budget") {
  const KinematicState s{{0, 0}, {1, 0}};
  CHECK_NOTHROW(track(s, {1, 0}, 0.1, {0.5, 0}, 2.0, 0.05));
  CHECK_THROWS_AS(track(s, {1, 0}, 0.1, {0.6, 0}, 2.0, 0.05), std::invalid_argument);
  const auto slewed = track({{0, 0}, {0, 0}}, {10, 0}, 0.1, {0, 0}, 2.0, 0.0);
  CHECK(slewed.velocity.x == doctest::Approx(0.2));
  CHECK(slewed.position.x == doctest::Approx(0.02));
}

TEST_CASE("tracked position stays within the budget of the undisturbed step") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double dt = 0.1, bound = 0.05;
  KinematicState s{{0, 0}, {0, 0}};
  for (int k = 0; k < 1000; ++k) {
    const Vec2 cmd{1.5 * u(rng), 1.5 * u(rng)};
    const double ang = std::numbers::pi * u(rng);
    const double mag = 0.5 * (0.5 * (u(rng) + 1.0));
    const Vec2 dist{mag * std::cos(ang), mag * std::sin(ang)};
    const auto clean = track(s, cmd, dt, {0, 0}, 2.0, bound);
    const auto noisy = track(s, cmd, dt, dist, 2.0, bound);
    CHECK(distance(clean.position, noisy.position) <= bound + 1e-12);
    s = noisy;
  }
}
