#include "rbl/cells.hpp"

#include <cmath>
#include <string>

namespace rbl {

void CellParams::validate() const {
  auto in_range = [](double e) { return e >= 1.0 && e <= 2.0; };
  if (!in_range(epsilon_p) || !in_range(epsilon_o)) {
    throw std::invalid_argument("cell params: epsilon_p and epsilon_o must lie in [1, 2]");
  }
  if (!(sensing_radius_rs > 0.0)) throw std::invalid_argument("cell params: sensing_radius_rs must be > 0");
  if (!(delta_self > 0.0)) throw std::invalid_argument("cell params: delta_self must be > 0");
  if (disc_sides < 8) throw std::invalid_argument("cell params: disc_sides must be >= 8");
}

HalfPlane cwvd_halfplane(Point2 p_i, Point2 p_j, double epsilon) {
  const Vec2 d = p_j - p_i;
  const double dist = norm(d);
  if (!(dist > kGeomTol)) throw GeometryError("cwvd_halfplane: coincident points");
  const Vec2 u = d / dist;
  return HalfPlane(u, dot(u, p_i) + dist / epsilon);
}

HalfPlane safety_halfplane(Point2 p_i, const SensedEntity& other, double delta_self,
                           double epsilon) {
  const double limit = delta_self + other.radius;
  const double dist = distance(p_i, other.position);
  if (dist <= limit) {
    throw CollisionStateError("sensed entity at " + std::to_string(dist) +
                                  " m is inside the combined radius " + std::to_string(limit),
                              dist, limit);
  }
  if (0.5 * dist > limit) return cwvd_halfplane(p_i, other.position, epsilon);

  const Vec2 back = (p_i - other.position) / dist;
  const Point2 virtual_point = other.position + 2.0 * (limit - 0.5 * dist) * back;
  return cwvd_halfplane(p_i, virtual_point, 2.0);
}

ConvexRegion build_cell_A(Point2 p_i, const std::vector<SensedEntity>& sensed,
                          const CellParams& params) {
  ConvexRegion cell = disc_polygon(p_i, params.sensing_radius_rs, params.disc_sides);
  for (const auto& e : sensed) {
    const double eps = e.kind == EntityKind::robot ? params.epsilon_p : params.epsilon_o;
    cell = halfplane_clip(cell, safety_halfplane(p_i, e, params.delta_self, eps));
  }
  // Every half-plane keeps p_i strictly inside, so this is an internal bug if it fires.
  if (cell.empty() || !contains(cell, p_i)) {
    throw std::logic_error("build_cell_A: safe cell lost its own robot position");
  }
  return cell;
}

ConvexRegion build_cell_F(const ConvexRegion& cell_A, Point2 p_i,
                          const std::vector<SensedEntity>& sensed, const CellParams& params) {
  ConvexRegion cell = cell_A;
  for (const auto& e : sensed) {
    if (!e.proximity_constrained) continue;
    if (!e.gamma) throw std::invalid_argument("build_cell_F: constrained entity without gamma");
    const Vec2 toward = p_i - e.position;
    const double phase = norm(toward) > 0.0 ? std::atan2(toward.y, toward.x) : 0.0;
    cell = intersect(cell, disc_polygon(e.position, *e.gamma, params.disc_sides, phase));
    if (cell.empty()) break;
  }
  if (cell.empty()) throw InfeasibleProximityError("build_cell_F: infeasible proximity set");
  return cell;
}

}  // namespace rbl
