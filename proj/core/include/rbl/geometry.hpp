#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rbl {

// Tolerance used by every geometric predicate (meters).
inline constexpr double kGeomTol = 1e-9;
// Regions with area below this are treated as empty (square meters).
inline constexpr double kDegenerateArea = 1e-12;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

// Positions and displacements share one representation.
using Point2 = Vec2;

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator/(const Vec2& a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double squared_norm(const Vec2& a) { return dot(a, a); }
inline double distance(const Point2& a, const Point2& b) { return norm(a - b); }

// Counter-clockwise rotation by `angle` radians.
inline Vec2 rotated(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Closed half-plane {q : normal . q <= offset} with a unit normal.
class HalfPlane {
 public:
  /// Normalizes `normal`; throws GeometryError for a (near) zero normal.
  HalfPlane(Vec2 normal, double offset);

  /// Half-plane whose boundary passes through `point` with outward `normal`.
  static HalfPlane through(Point2 point, Vec2 normal);

  const Vec2& normal() const { return normal_; }
  double offset() const { return offset_; }

  /// Signed distance, positive outside.
  double signed_distance(const Point2& q) const { return dot(normal_, q) - offset_; }

 private:
  Vec2 normal_;
  double offset_;
};

/// Convex polygon stored as CCW vertices. An empty vertex list is the empty set.
class ConvexRegion {
 public:
  ConvexRegion() = default;

  /// Validates orientation and convexity; drops consecutive duplicates.
  /// Clockwise input is reversed. Throws GeometryError for non-convex input.
  static ConvexRegion from_vertices(std::vector<Point2> vertices);

  /// Trusts the caller: vertices must already be CCW, convex and deduplicated.
  static ConvexRegion from_ccw_unchecked(std::vector<Point2> vertices) {
    return ConvexRegion(std::move(vertices));
  }

  bool empty() const { return vertices_.empty(); }
  std::size_t size() const { return vertices_.size(); }
  std::span<const Point2> vertices() const { return vertices_; }

  double area() const;
  /// Unweighted area centroid. Throws GeometryError when empty.
  Point2 centroid() const;

 private:
  explicit ConvexRegion(std::vector<Point2> v) : vertices_(std::move(v)) {}

  std::vector<Point2> vertices_;
};

/// region ∩ hp. Results with area below kDegenerateArea come back empty.
ConvexRegion halfplane_clip(const ConvexRegion& region, const HalfPlane& hp);

/// Clips `region` by every edge half-plane of the convex `other`.
ConvexRegion intersect(const ConvexRegion& region, const ConvexRegion& other);

/// Regular polygon with all vertices on the circle; first vertex at angle `phase`.
/// Requires sides >= 3. Used directly only where a coarse polygon is intended.
ConvexRegion regular_polygon(Point2 center, double radius, int sides, double phase = 0.0);

/// Inscribed polygonal approximation of a disc; rejects sides < 8 and radius <= 0.
ConvexRegion disc_polygon(Point2 center, double radius, int sides, double phase = 0.0);

/// Closed-region membership with kGeomTol slack. Empty region -> false.
bool contains(const ConvexRegion& region, const Point2& p);

/// Distance from an interior point to the region boundary.
/// Throws GeometryError when p is not contained.
double boundary_distance(const ConvexRegion& region, const Point2& p);

/// Distance from p to the region (0 when inside). Throws on an empty region.
double distance_to_region(const ConvexRegion& region, const Point2& p);

/// Closest point of the region to p (p itself when inside).
Point2 closest_point(const ConvexRegion& region, const Point2& p);

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b);

}  // namespace rbl
