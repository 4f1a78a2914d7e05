#include "physgen/core/geometry.hpp"

#include <algorithm>
#include <limits>

namespace physgen {

Box bounding_box(std::span<const Vec2> pts) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box b{{inf, inf}, {-inf, -inf}};
  for (const Vec2& p : pts) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

Box bounding_box(Segment s) {
  return {{std::min(s.a.x, s.b.x), std::min(s.a.y, s.b.y)},
          {std::max(s.a.x, s.b.x), std::max(s.a.y, s.b.y)}};
}

Vec2 project_onto_segment(Vec2 p, Segment s) {
  const Vec2 d = s.b - s.a;
  const double len2 = squared_norm(d);
  if (len2 == 0.0) return s.a;
  const double t = std::clamp(dot(p - s.a, d) / len2, 0.0, 1.0);
  return s.a + d * t;
}

double point_segment_distance(Vec2 p, Segment s) { return distance(p, project_onto_segment(p, s)); }

Vec2 mirror_across_line(Vec2 p, Segment s) {
  const Vec2 d = s.b - s.a;
  const double t = dot(p - s.a, d) / squared_norm(d);
  const Vec2 foot = s.a + d * t;
  return foot * 2.0 - p;
}

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment_collinear(Vec2 p, Segment s) {
  return p.x >= std::min(s.a.x, s.b.x) && p.x <= std::max(s.a.x, s.b.x) &&
         p.y >= std::min(s.a.y, s.b.y) && p.y <= std::max(s.a.y, s.b.y);
}

}  // namespace

bool segments_touch(Segment s, Segment t) {
  const int o1 = sign(orient(s.a, s.b, t.a));
  const int o2 = sign(orient(s.a, s.b, t.b));
  const int o3 = sign(orient(t.a, t.b, s.a));
  const int o4 = sign(orient(t.a, t.b, s.b));
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment_collinear(t.a, s)) return true;
  if (o2 == 0 && on_segment_collinear(t.b, s)) return true;
  if (o3 == 0 && on_segment_collinear(s.a, t)) return true;
  if (o4 == 0 && on_segment_collinear(s.b, t)) return true;
  return false;
}

bool segments_cross_properly(Segment s, Segment t) {
  const double o1 = orient(s.a, s.b, t.a);
  const double o2 = orient(s.a, s.b, t.b);
  const double o3 = orient(t.a, t.b, s.a);
  const double o4 = orient(t.a, t.b, s.b);
  return ((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0));
}

bool line_intersection_param(Segment s, Segment t, double& u) {
  const Vec2 r = s.b - s.a;
  const Vec2 q = t.b - t.a;
  const double denom = cross(r, q);
  if (denom == 0.0) return false;
  u = cross(t.a - s.a, q) / denom;
  return true;
}

double signed_area(std::span<const Vec2> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) acc += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * acc;
}

double perimeter(std::span<const Vec2> poly) {
  double acc = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) acc += distance(poly[i], poly[(i + 1) % n]);
  return acc;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[j];
    const Vec2 b = poly[i];
    if (orient(a, b, p) == 0.0 && on_segment_collinear(p, {a, b})) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_strictly_inside(Vec2 p, std::span<const Vec2> poly, double eps) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    if (point_segment_distance(p, {poly[j], poly[i]}) <= eps) return false;
  }
  return point_in_polygon(p, poly);
}

double point_polygon_distance(Vec2 p, std::span<const Vec2> poly) {
  if (point_in_polygon(p, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    best = std::min(best, point_segment_distance(p, {poly[j], poly[i]}));
  return best;
}

bool is_simple_polygon(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (poly[i] == poly[(i + 1) % n]) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Segment e{poly[i], poly[(i + 1) % n]};
    for (std::size_t j = i + 1; j < n; ++j) {
      const Segment f{poly[j], poly[(j + 1) % n]};
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges may only share their common vertex; collinear
        // overlap (a spike back along the previous edge) is rejected.
        const Vec2 shared = (j == i + 1) ? e.b : e.a;
        const Vec2 other_e = (j == i + 1) ? e.a : e.b;
        const Vec2 other_f = (j == i + 1) ? f.b : f.a;
        if (orient(other_e, shared, other_f) == 0.0 &&
            dot(other_e - shared, other_f - shared) > 0.0)
          return false;
        continue;
      }
      if (segments_touch(e, f)) return false;
    }
  }
  return true;
}

}  // namespace physgen
