#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "rbl/geometry.hpp"

namespace rbl {

enum class EntityKind { robot, obstacle };

/// Raised when a sensed entity is already inside the combined body radius.
class CollisionStateError : public std::runtime_error {
 public:
  CollisionStateError(const std::string& what, double distance, double limit)
      : std::runtime_error(what), distance_(distance), limit_(limit) {}
  double distance() const { return distance_; }
  double limit() const { return limit_; }

 private:
  double distance_;
  double limit_;
};

/// Raised when the proximity discs leave nothing of the safe cell.
class InfeasibleProximityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CellParams {
  double epsilon_p = 1.0;          // robot-neighbor CWVD weight, in [1, 2]
  double epsilon_o = 1.0;          // obstacle CWVD weight, in [1, 2]
  double sensing_radius_rs = 5.0;  // cell radius, half of the sensing range
  double delta_self = 0.2;         // own body radius
  int disc_sides = 64;

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
  double sensing_range() const { return 2.0 * sensing_radius_rs; }
};

struct SensedEntity {
  Point2 position;
  double radius = 0.0;
  EntityKind kind = EntityKind::robot;
  bool proximity_constrained = false;
  std::optional<double> gamma;  // maximum allowed distance, set iff constrained
};

/// {q : u.(q - p_i) <= |p_i - p_j| / epsilon}, u the unit vector from p_i to p_j.
/// epsilon = 2 is the ordinary Voronoi bisector.
HalfPlane cwvd_halfplane(Point2 p_i, Point2 p_j, double epsilon);

/// Per-entity safety constraint. Far entities (half distance above the combined
/// radius) give the CWVD half-plane; close ones give the plain bisector against a
/// virtual point pushed toward p_i. Throws CollisionStateError when the entity is
/// within the combined radius.
HalfPlane safety_halfplane(Point2 p_i, const SensedEntity& other, double delta_self,
                           double epsilon);

/// Safe cell: sensing disc clipped by one safety half-plane per entity.
ConvexRegion build_cell_A(Point2 p_i, const std::vector<SensedEntity>& sensed,
                          const CellParams& params);

/// Flocking cell: cell_A clipped by a Gamma-disc around every constrained neighbor.
/// Each disc polygon has a vertex on the ray toward p_i, so p_i stays inside for
/// any neighbor at distance <= Gamma. Throws InfeasibleProximityError when empty.
ConvexRegion build_cell_F(const ConvexRegion& cell_A, Point2 p_i,
                          const std::vector<SensedEntity>& sensed, const CellParams& params);

}  // namespace rbl
