#pragma once

#include <cstdint>
#include <vector>

#include "rbl/geometry.hpp"

namespace rbl {

enum class TurnSign { left, right };

struct AdaptiveState {
  double beta = 0.15;
  Point2 pbar;
  bool rotation_active = false;
};

struct AdaptationParams {
  double beta_D = 0.15;
  double k_beta = 1.0;
  double k_e = 1.0;
  double d1 = 1.0;
  double d2 = 1.0;
  double d3 = 1.0;
  double d4 = 1.0;
  double eps_rot = 0.05;
  TurnSign turn_sign = TurnSign::right;

  void validate() const;
};

/// Laplacian importance weight exp(-|q - pbar| / beta).
double phi(Point2 q, Point2 pbar, double beta);

struct CentroidResult {
  Point2 point;
  // Set when the weighted integral degenerated and the area centroid was used.
  bool fallback = false;
};

/// Weighted centroid evaluator for a fixed (region, pbar) pair, reusable across
/// many beta values.
///
/// The weight is radially symmetric around pbar, so every edge is integrated in
/// polar coordinates centered there: the radial part has a closed form (lower or
/// upper incomplete gamma), leaving a smooth one-dimensional integral along the
/// edge that is done with adaptive Gauss-Kronrod 7/15. When pbar lies outside the
/// region the weights are rescaled by exp(dist(pbar, region) / beta), so a far
/// attractor with a small beta does not underflow.
class WeightedCentroid {
 public:
  /// Throws GeometryError for an empty region.
  WeightedCentroid(const ConvexRegion& region, Point2 pbar);

  /// Throws std::invalid_argument for beta <= 0.
  CentroidResult operator()(double beta) const;

  const ConvexRegion& region() const { return region_; }
  bool pbar_inside() const { return inside_; }

 private:
  struct Edge {
    Vec2 a;          // start vertex relative to pbar
    Vec2 e;          // b - a
    double cross;    // cross(a, b), twice the signed fan-triangle area
    double angle;    // signed angle subtended at pbar
    Vec2 dir_delta;  // integral of the unit direction over the subtended angle
    double r_min;    // distance from pbar to the segment
    double r_max;
    double foot;     // parameter of the closest point, in [0, 1]
  };

  ConvexRegion region_;
  Point2 pbar_;
  bool inside_ = false;
  double d0_ = 0.0;  // distance from pbar to the region, 0 when inside
  double r_max_ = 0.0;
  std::vector<Edge> edges_;
};

CentroidResult weighted_centroid_ex(const ConvexRegion& region, Point2 pbar, double beta);

/// Centroid of `region` under phi(., pbar, beta). Always inside the region.
Point2 weighted_centroid(const ConvexRegion& region, Point2 pbar, double beta);

struct BetaSearchRange {
  double lo = 1e-3;
  double hi = 1e3;
};

struct BetaMinResult {
  double beta = 0.0;
  double clearance = 0.0;  // boundary distance of the centroid at `beta`
  bool feasible = false;   // some beta reaches clearance >= d_u
  int evaluations = 0;
};

/// Smallest-beta solution of (clearance(beta) - d_u)^2 -> min, where clearance
/// is the boundary distance of the weighted centroid. A 32-point log-spaced scan
/// brackets the first crossing, then golden-section search refines it in
/// log(beta). Without a crossing, returns the beta of maximum clearance.
BetaMinResult beta_min(const ConvexRegion& region_F, Point2 pbar, double d_u,
                       BetaSearchRange range = {});

/// True when the "stuck" branch of the spreading-factor dynamics is active.
bool beta_shrink_condition(Point2 p_i, Point2 c_A, Point2 c_S, const AdaptationParams& params);

/// One forward-Euler step of the spreading-factor dynamics, clamped below by
/// beta_floor.
double update_beta(double beta, Point2 p_i, Point2 c_A, Point2 c_S,
                   const AdaptationParams& params, double beta_floor, double dt);

struct PbarUpdate {
  Point2 pbar;
  bool rotation_active = false;
  bool reset = false;  // the snap-back-to-goal rule fired
};

/// Goal bearing rotated about the robot by +-(pi/2 - eps_rot).
Point2 rotated_goal(Point2 p_i, Point2 goal, const AdaptationParams& params);

/// One forward-Euler step of the attractor dynamics with the hand-side rule.
/// `c_A_goal` is the centroid of cell A computed with pbar = goal.
PbarUpdate update_pbar(const AdaptiveState& state, Point2 p_i, Point2 c_A, Point2 c_S,
                       Point2 c_A_goal, Point2 goal, const AdaptationParams& params, double dt);

}  // namespace rbl
