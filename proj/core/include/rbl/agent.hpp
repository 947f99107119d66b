#pragma once

#include <map>
#include <optional>
#include <vector>

#include "rbl/cells.hpp"
#include "rbl/geometry.hpp"
#include "rbl/weighting.hpp"

namespace rbl {

enum class MarginKind { safety, proximity };

/// Clearance the centroid must keep from the cell boundary.
/// Safety form: k*sqrt(lambda) + delta_i + delta_j + d_u_track.
/// Proximity form drops the radii.
double margin_d_u(double lambda_max, double k_sigma, double delta_i, double delta_j,
                  double d_u_track, MarginKind kind = MarginKind::safety);

struct Measurement {
  int target_id = -1;
  Point2 position;          // sensed position in the agent's frame
  double lambda_max = 0.0;  // largest covariance eigenvalue, m^2
  EntityKind kind = EntityKind::robot;
  double radius = 0.0;      // body radius of the sensed entity
};

// Neighbor id -> maximum allowed distance.
using ProximityMap = std::map<int, double>;

// Distance kept below Gamma when a constrained neighbor is pulled back in.
inline constexpr double kReprojectMargin = 1e-3;

/// Drops measurements above the variance gate and pulls constrained neighbors
/// measured beyond their Gamma back onto the ray at Gamma - 1 mm.
std::vector<Measurement> gate_and_reproject(const std::vector<Measurement>& measurements,
                                            Point2 p_i, const ProximityMap& proximity,
                                            double lambda_gate);

struct AgentConfig {
  double delta = 0.2;  // own body radius
  Point2 goal;
  double k_p = 1.0;
  double v_max = 1.5;
  double a_max = 2.0;
  double control_period = 0.1;
  double d_u_track = 0.0;
  double k_sigma = 2.0;
  double lambda_gate = 15.0;
  // Fixed measurement margin. When unset, the margin is recomputed each step
  // from the worst retained measurement.
  std::optional<double> d_u_measurement;
  ProximityMap proximity;
  CellParams cell_params;  // delta_self is overridden by `delta`
  AdaptationParams adapt_params;
  BetaSearchRange beta_range;

  void validate() const;
};

struct DecideDiagnostics {
  Point2 c_A;
  Point2 c_S;
  Point2 c_A_goal;
  Point2 c_F;
  double clearance = 0.0;  // boundary distance of c_F inside F
  double d_u = 0.0;
  double beta_floor = 0.0;
  bool margin_feasible = false;
  bool shrink_branch = false;
  bool rotation_branch = false;
  bool pbar_reset = false;
  bool centroid_fallback = false;
  int measurements_used = 0;
  int measurements_dropped = 0;
  int centroid_evaluations = 0;
};

struct Decision {
  Vec2 cmd;
  AdaptiveState state;
  ConvexRegion cell_F;
  DecideDiagnostics diag;
};

/// Total margin for one step: fixed or worst-measurement d_u^m plus d_u^t.
double step_margin(const std::vector<Measurement>& retained, const AgentConfig& cfg);

/// One control step of a single robot. Measurement positions are absolute
/// (already mapped into the agent's frame). Throws CollisionStateError when a
/// sensed entity is inside the combined radius, InfeasibleProximityError when
/// the proximity discs leave no room.
Decision decide(Point2 p_i, const AdaptiveState& state, const std::vector<Measurement>& measurements,
                const AgentConfig& cfg);

struct KinematicState {
  Point2 position;
  Vec2 velocity;
};

/// Velocity tracking with slew limit a_max*dt, then p += (v + disturbance)*dt.
/// Throws std::invalid_argument when |disturbance|*dt exceeds d_u_track.
KinematicState track(const KinematicState& state, Vec2 cmd, double dt, Vec2 disturbance,
                     double a_max, double d_u_track);

}  // namespace rbl
