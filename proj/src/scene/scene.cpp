#include "physgen/scene/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace physgen::scene {

namespace {

// Common part of two collinear segments when it has positive length.
bool collinear_overlap(Segment s, Segment t, Segment& piece) {
  const Vec2 d = s.b - s.a;
  const double len2 = squared_norm(d);
  if (len2 == 0.0) return false;
  // distances of t's endpoints from the line through s, in meters
  const double len = std::sqrt(len2);
  if (std::abs(orient(s.a, s.b, t.a)) / len > 1e-9 || std::abs(orient(s.a, s.b, t.b)) / len > 1e-9) return false;
  double u0 = dot(t.a - s.a, d) / len2, u1 = dot(t.b - s.a, d) / len2;
  if (u0 > u1) std::swap(u0, u1);
  u0 = std::max(u0, 0.0);
  u1 = std::min(u1, 1.0);
  if ((u1 - u0) * len <= 1e-9) return false;
  piece = {s.a + d * u0, s.a + d * u1};
  return true;
}

// Proper crossing where every endpoint is more than 1e-9 m off the other
// segment's line. Endpoints computed as intersections (reflection points,
// corners) may sit a rounding error inside a facade; those count as touching.
bool crosses_clearly(Segment s, Segment t) {
  const double ls = distance(s.a, s.b), lt = distance(t.a, t.b);
  if (ls == 0.0 || lt == 0.0) return false;
  constexpr double tol = 1e-9;
  const double o1 = orient(s.a, s.b, t.a) / ls, o2 = orient(s.a, s.b, t.b) / ls;
  const double o3 = orient(t.a, t.b, s.a) / lt, o4 = orient(t.a, t.b, s.b) / lt;
  return ((o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol)) && ((o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol));
}

}  // namespace

void validate(const UrbanScene& scene) {
  if (!(scene.extent_m > 0.0) || !std::isfinite(scene.extent_m))
    throw ValidationError("scene extent must be positive");
  const double e = scene.extent_m;
  for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
    const Polygon& poly = scene.buildings[i];
    if (poly.size() < 3) throw InvalidPolygonError(i, "fewer than 3 vertices");
    for (const Vec2& v : poly) {
      if (!std::isfinite(v.x) || !std::isfinite(v.y) || v.x < 0.0 || v.y < 0.0 || v.x > e || v.y > e)
        throw InvalidPolygonError(i, "vertex outside the domain");
    }
    if (!is_simple_polygon(poly)) throw InvalidPolygonError(i, "self-intersecting polygon");
  }
  const Vec2 s = scene.source;
  if (!(s.x > 0.0 && s.y > 0.0 && s.x < e && s.y < e))
    throw ValidationError("source must lie strictly inside the domain");
  for (std::size_t i = 0; i < scene.buildings.size(); ++i) {
    if (point_in_polygon(s, scene.buildings[i]))
      throw ValidationError("source lies inside building " + std::to_string(i));
  }
}

UrbanScene normalized(UrbanScene scene) {
  for (Polygon& poly : scene.buildings) {
    while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
    poly.erase(std::unique(poly.begin(), poly.end()), poly.end());
    if (poly.size() >= 3 && signed_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
  }
  validate(scene);
  return scene;
}

SceneIndex::SceneIndex(const UrbanScene& scene) : scene_(&scene) {
  boxes_.reserve(scene.buildings.size());
  for (std::size_t b = 0; b < scene.buildings.size(); ++b) {
    const Polygon& poly = scene.buildings[b];
    boxes_.push_back(bounding_box(poly));
    const double flip = signed_area(poly) < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 a = poly[i], c = poly[(i + 1) % poly.size()];
      edges_.push_back({b, i, {a, c}, outward_normal(a, c) * flip});
    }
  }
  // Overlapping collinear edges of different buildings (terraced houses).
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    for (std::size_t j = i + 1; j < edges_.size(); ++j) {
      if (edges_[i].building == edges_[j].building) continue;
      if (Segment piece; collinear_overlap(edges_[i].segment, edges_[j].segment, piece)) shared_walls_.push_back(piece);
    }
  }
}

bool SceneIndex::is_indoor(Vec2 p) const {
  for (std::size_t b = 0; b < boxes_.size(); ++b) {
    if (boxes_[b].contains(p) && point_in_polygon(p, scene_->buildings[b])) return true;
  }
  return false;
}

bool SceneIndex::segment_blocked(Vec2 a, Vec2 b) const {
  const Box sb = bounding_box(Segment{a, b});
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].overlaps(sb) && segment_blocked_by(i, a, b)) return true;
  }
  for (const Segment& wall : shared_walls_) {
    if (Segment piece; collinear_overlap({a, b}, wall, piece)) return true;
  }
  return false;
}

bool SceneIndex::segment_blocked_by(std::size_t building, Vec2 a, Vec2 b) const {
  const Polygon& poly = scene_->buildings[building];
  const Segment s{a, b};
  const Vec2 d = b - a;
  const double len2 = squared_norm(d);
  if (len2 == 0.0) return point_strictly_inside(a, poly);

  // Split the segment at every contact with the boundary; the pieces in
  // between are either fully inside or fully outside, so one midpoint test
  // per piece decides.
  std::vector<double> cuts{0.0, 1.0};
  const std::size_t n = poly.size();
  bool any_proper = false;
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e{poly[i], poly[(i + 1) % n]};
    if (crosses_clearly(s, e)) {
      any_proper = true;
      break;
    }
    if (!segments_touch(s, e)) continue;
    double u = 0.0;
    if (line_intersection_param(s, e, u)) {
      cuts.push_back(std::clamp(u, 0.0, 1.0));
    } else {
      // collinear overlap: cut at the projected edge endpoints
      cuts.push_back(std::clamp(dot(e.a - a, d) / len2, 0.0, 1.0));
      cuts.push_back(std::clamp(dot(e.b - a, d) / len2, 0.0, 1.0));
    }
  }
  // A proper crossing of any edge means the segment changes sides of the
  // boundary there and so enters the interior.
  if (any_proper) return true;
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (cuts[k + 1] - cuts[k] < 1e-12) continue;
    const Vec2 mid = a + d * (0.5 * (cuts[k] + cuts[k + 1]));
    if (point_strictly_inside(mid, poly)) return true;
  }
  return false;
}

double SceneIndex::distance_to_nearest_edge(Vec2 p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const EdgeRef& e : edges_) best = std::min(best, point_segment_distance(p, e.segment));
  return best;
}

}  // namespace physgen::scene
