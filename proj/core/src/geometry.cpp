#include "rbl/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace rbl {

namespace {

double signed_area(std::span<const Point2> v) {
  double twice = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    twice += cross(v[i], v[(i + 1) % n]);
  }
  return 0.5 * twice;
}

void drop_duplicates(std::vector<Point2>& v) {
  std::vector<Point2> out;
  out.reserve(v.size());
  for (const auto& p : v) {
    if (out.empty() || distance(out.back(), p) > kGeomTol) out.push_back(p);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= kGeomTol) out.pop_back();
  v = std::move(out);
}

Point2 closest_on_segment(const Point2& p, const Point2& a, const Point2& b) {
  const Vec2 ab = b - a;
  const double len2 = squared_norm(ab);
  if (len2 == 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + t * ab;
}

}  // namespace

HalfPlane::HalfPlane(Vec2 normal, double offset) {
  const double n = norm(normal);
  if (!(n > 1e-15) || !std::isfinite(n)) {
    throw GeometryError("half-plane normal must be non-zero and finite");
  }
  normal_ = normal / n;
  offset_ = offset / n;
}

HalfPlane HalfPlane::through(Point2 point, Vec2 normal) {
  HalfPlane hp(normal, 0.0);
  hp.offset_ = dot(hp.normal_, point);
  return hp;
}

ConvexRegion ConvexRegion::from_vertices(std::vector<Point2> vertices) {
  for (const auto& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw GeometryError("non-finite vertex");
  }
  drop_duplicates(vertices);
  if (vertices.size() < 3) return {};
  if (signed_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
    const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
    if (cross(e0, e1) < -kGeomTol) throw GeometryError("polygon is not convex");
  }
  if (signed_area(vertices) < kDegenerateArea) return {};
  return ConvexRegion(std::move(vertices));
}

double ConvexRegion::area() const { return empty() ? 0.0 : signed_area(vertices_); }

Point2 ConvexRegion::centroid() const {
  if (empty()) throw GeometryError("centroid of an empty region");
  // Shift to the first vertex to keep the shoelace sums well conditioned.
  const Point2 o = vertices_.front();
  double a2 = 0.0;
  Vec2 acc;
  for (std::size_t i = 1; i + 1 < vertices_.size(); ++i) {
    const Vec2 p = vertices_[i] - o;
    const Vec2 q = vertices_[i + 1] - o;
    const double c = cross(p, q);
    a2 += c;
    acc += c * (p + q);
  }
  return o + acc / (3.0 * a2);
}

ConvexRegion halfplane_clip(const ConvexRegion& region, const HalfPlane& hp) {
  if (region.empty()) return {};
  const auto v = region.vertices();
  const std::size_t n = v.size();

  std::vector<double> s(n);
  bool any_in = false;
  bool any_out = false;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = hp.signed_distance(v[i]);
    (s[i] <= kGeomTol ? any_in : any_out) = true;
  }
  if (!any_out) return region;
  if (!any_in) return {};

  std::vector<Point2> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const bool in_i = s[i] <= kGeomTol;
    const bool in_j = s[j] <= kGeomTol;
    if (in_i) out.push_back(v[i]);
    if (in_i != in_j) {
      const double t = s[i] / (s[i] - s[j]);
      out.push_back(v[i] + t * (v[j] - v[i]));
    }
  }
  drop_duplicates(out);
  if (out.size() < 3 || signed_area(out) < kDegenerateArea) return {};
  return ConvexRegion::from_ccw_unchecked(std::move(out));
}

ConvexRegion intersect(const ConvexRegion& region, const ConvexRegion& other) {
  if (region.empty() || other.empty()) return {};
  ConvexRegion out = region;
  const auto v = other.vertices();
  for (std::size_t i = 0, n = v.size(); i < n && !out.empty(); ++i) {
    const Vec2 e = v[(i + 1) % n] - v[i];
    // Interior is on the left of a CCW edge, so the outward normal is (e.y, -e.x).
    out = halfplane_clip(out, HalfPlane::through(v[i], Vec2{e.y, -e.x}));
  }
  return out;
}

ConvexRegion regular_polygon(Point2 center, double radius, int sides, double phase) {
  if (sides < 3) throw GeometryError("regular polygon needs at least 3 sides");
  if (!(radius > 0.0)) throw GeometryError("regular polygon radius must be positive");
  std::vector<Point2> v;
  v.reserve(static_cast<std::size_t>(sides));
  const double step = 2.0 * std::numbers::pi / sides;
  for (int k = 0; k < sides; ++k) {
    const double a = phase + step * k;
    v.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return ConvexRegion::from_ccw_unchecked(std::move(v));
}

ConvexRegion disc_polygon(Point2 center, double radius, int sides, double phase) {
  if (sides < 8) throw GeometryError("disc polygon needs at least 8 sides");
  return regular_polygon(center, radius, sides, phase);
}

bool contains(const ConvexRegion& region, const Point2& p) {
  if (region.empty()) return false;
  const auto v = region.vertices();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Vec2 e = v[(i + 1) % n] - v[i];
    const double len = norm(e);
    if (cross(e, p - v[i]) < -kGeomTol * len) return false;
  }
  return true;
}

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  return distance(p, closest_on_segment(p, a, b));
}

double boundary_distance(const ConvexRegion& region, const Point2& p) {
  if (!contains(region, p)) throw GeometryError("boundary_distance: point outside region");
  const auto v = region.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % n]));
  }
  return best;
}

double distance_to_region(const ConvexRegion& region, const Point2& p) {
  if (region.empty()) throw GeometryError("distance to an empty region");
  if (contains(region, p)) return 0.0;
  return distance(p, closest_point(region, p));
}

Point2 closest_point(const ConvexRegion& region, const Point2& p) {
  if (region.empty()) throw GeometryError("closest point of an empty region");
  if (contains(region, p)) return p;
  const auto v = region.vertices();
  Point2 best = v.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Point2 c = closest_on_segment(p, v[i], v[(i + 1) % n]);
    const double d = distance(p, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace rbl
