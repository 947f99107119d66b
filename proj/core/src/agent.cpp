#include "rbl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rbl {

double margin_d_u(double lambda_max, double k_sigma, double delta_i, double delta_j,
                  double d_u_track, MarginKind kind) {
  if (lambda_max < 0.0 || k_sigma < 0.0 || delta_i < 0.0 || delta_j < 0.0 || d_u_track < 0.0) {
    throw std::invalid_argument("margin_d_u: inputs must be non-negative");
  }
  double d_m = k_sigma * std::sqrt(lambda_max);
  if (kind == MarginKind::safety) d_m += delta_i + delta_j;
  return d_m + d_u_track;
}

std::vector<Measurement> gate_and_reproject(const std::vector<Measurement>& measurements,
                                            Point2 p_i, const ProximityMap& proximity,
                                            double lambda_gate) {
  std::vector<Measurement> out;
  out.reserve(measurements.size());
  for (const auto& m : measurements) {
    if (m.lambda_max > lambda_gate) continue;
    Measurement kept = m;
    if (m.kind == EntityKind::robot) {
      if (auto it = proximity.find(m.target_id); it != proximity.end()) {
        const double gamma = it->second;
        const Vec2 rel = m.position - p_i;
        const double d = norm(rel);
        if (d > gamma) kept.position = p_i + (gamma - kReprojectMargin) / d * rel;
      }
    }
    out.push_back(kept);
  }
  return out;
}

void AgentConfig::validate() const {
  if (!(delta > 0.0)) throw std::invalid_argument("agent: delta must be > 0");
  if (!(k_p > 0.0 && v_max > 0.0 && a_max > 0.0 && control_period > 0.0)) {
    throw std::invalid_argument("agent: k_p, v_max, a_max, control_period must be > 0");
  }
  if (!(d_u_track >= 0.0)) throw std::invalid_argument("agent: d_u_track must be >= 0");
  if (!(k_sigma >= 0.0)) throw std::invalid_argument("agent: k_sigma must be >= 0");
  if (d_u_measurement && !(*d_u_measurement >= 0.0)) {
    throw std::invalid_argument("agent: d_u_measurement must be >= 0");
  }
  for (const auto& [id, gamma] : proximity) {
    if (!(gamma > 0.0)) throw std::invalid_argument("agent: proximity gamma must be > 0");
  }
  cell_params.validate();
  adapt_params.validate();
  if (!(beta_range.lo > 0.0 && beta_range.hi > beta_range.lo)) {
    throw std::invalid_argument("agent: invalid beta range");
  }
}

double step_margin(const std::vector<Measurement>& retained, const AgentConfig& cfg) {
  if (cfg.d_u_measurement) return *cfg.d_u_measurement + cfg.d_u_track;
  double d_u = cfg.d_u_track;
  for (const auto& m : retained) {
    d_u = std::max(d_u, margin_d_u(m.lambda_max, cfg.k_sigma, cfg.delta, m.radius, cfg.d_u_track));
  }
  return d_u;
}

Decision decide(Point2 p_i, const AdaptiveState& state, const std::vector<Measurement>& measurements,
                const AgentConfig& cfg) {
  const double dt = cfg.control_period;
  CellParams cell_params = cfg.cell_params;
  cell_params.delta_self = cfg.delta;

  Decision out;
  DecideDiagnostics& diag = out.diag;

  const auto retained = gate_and_reproject(measurements, p_i, cfg.proximity, cfg.lambda_gate);
  diag.measurements_used = static_cast<int>(retained.size());
  diag.measurements_dropped = static_cast<int>(measurements.size() - retained.size());

  std::vector<SensedEntity> sensed;
  sensed.reserve(retained.size());
  for (const auto& m : retained) {
    SensedEntity e{m.position, m.radius, m.kind, false, std::nullopt};
    if (m.kind == EntityKind::robot) {
      if (auto it = cfg.proximity.find(m.target_id); it != cfg.proximity.end()) {
        e.proximity_constrained = true;
        e.gamma = it->second;
      }
    }
    sensed.push_back(e);
  }

  const ConvexRegion cell_A = build_cell_A(p_i, sensed, cell_params);
  ConvexRegion cell_F = build_cell_F(cell_A, p_i, sensed, cell_params);
  const ConvexRegion cell_S =
      disc_polygon(p_i, cell_params.sensing_radius_rs, cell_params.disc_sides);

  // Centroids that drive the adaptation, all at the current (pbar, beta).
  const auto cA = weighted_centroid_ex(cell_A, state.pbar, state.beta);
  const auto cS = weighted_centroid_ex(cell_S, state.pbar, state.beta);
  diag.c_A = cA.point;
  diag.c_S = cS.point;
  diag.c_A_goal = state.rotation_active ? weighted_centroid(cell_A, cfg.goal, state.beta) : cA.point;

  const PbarUpdate pb = update_pbar(state, p_i, diag.c_A, diag.c_S, diag.c_A_goal, cfg.goal,
                                    cfg.adapt_params, dt);
  diag.rotation_branch = pb.rotation_active;
  diag.pbar_reset = pb.reset;

  diag.d_u = step_margin(retained, cfg);
  const BetaMinResult floor = beta_min(cell_F, pb.pbar, diag.d_u, cfg.beta_range);
  diag.beta_floor = floor.beta;
  diag.margin_feasible = floor.feasible;
  diag.centroid_evaluations = floor.evaluations;

  diag.shrink_branch = beta_shrink_condition(p_i, diag.c_A, diag.c_S, cfg.adapt_params);
  const double beta = update_beta(state.beta, p_i, diag.c_A, diag.c_S, cfg.adapt_params,
                                  floor.beta, dt);

  const auto cF = weighted_centroid_ex(cell_F, pb.pbar, beta);
  diag.c_F = cF.point;
  diag.centroid_fallback = cA.fallback || cS.fallback || cF.fallback;
  diag.clearance = boundary_distance(cell_F, cF.point);

  Vec2 cmd = -cfg.k_p * (p_i - cF.point);
  const double speed = norm(cmd);
  if (speed > cfg.v_max) cmd = cmd * (cfg.v_max / speed);

  out.cmd = cmd;
  out.state = AdaptiveState{beta, pb.pbar, pb.rotation_active};
  out.cell_F = std::move(cell_F);
  return out;
}

KinematicState track(const KinematicState& state, Vec2 cmd, double dt, Vec2 disturbance,
                     double a_max, double d_u_track) {
  if (!(dt > 0.0)) throw std::invalid_argument("track: dt must be positive");
  // Small relative slack so a disturbance drawn exactly at the bound passes.
  if (norm(disturbance) * dt > d_u_track * (1.0 + 1e-12)) {
    throw std::invalid_argument("track: disturbance exceeds the tracking error budget");
  }
  const Vec2 dv = cmd - state.velocity;
  const double max_dv = a_max * dt;
  const double ndv = norm(dv);
  const Vec2 v = ndv > max_dv ? state.velocity + dv * (max_dv / ndv) : cmd;
  return {state.position + (v + disturbance) * dt, v};
}

}  // namespace rbl
