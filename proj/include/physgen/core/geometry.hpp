#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace physgen {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, Vec2 v) { return v * s; }

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(b - a); }
constexpr double squared_norm(Vec2 a) { return dot(a, a); }

/// Orientation of c relative to the directed line a->b: >0 left, <0 right.
constexpr double orient(Vec2 a, Vec2 b, Vec2 c) { return cross(b - a, c - a); }

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Box {
  Vec2 lo;
  Vec2 hi;

  bool contains(Vec2 p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool overlaps(const Box& o) const {
    return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
  }
};

Box bounding_box(std::span<const Vec2> pts);
Box bounding_box(Segment s);

double point_segment_distance(Vec2 p, Segment s);

/// Closest point on the segment to p.
Vec2 project_onto_segment(Vec2 p, Segment s);

/// Mirror image of p across the infinite line through s.
Vec2 mirror_across_line(Vec2 p, Segment s);

/// True when the closed segments share at least one point.
bool segments_touch(Segment s, Segment t);

/// True when the segments cross at a single interior point of both.
bool segments_cross_properly(Segment s, Segment t);

/// Parameter u along s (s.a + u (s.b - s.a)) of the intersection with the
/// infinite line through t; returns false for parallel lines.
bool line_intersection_param(Segment s, Segment t, double& u);

/// Signed area, positive for counter-clockwise vertex order.
double signed_area(std::span<const Vec2> poly);

double perimeter(std::span<const Vec2> poly);

/// Even-odd point-in-polygon; points on the boundary count as inside.
bool point_in_polygon(Vec2 p, std::span<const Vec2> poly);

/// Even-odd test excluding the boundary (within eps).
bool point_strictly_inside(Vec2 p, std::span<const Vec2> poly, double eps = 1e-9);

double point_polygon_distance(Vec2 p, std::span<const Vec2> poly);

/// Self-intersection check for a closed ring (adjacent edges may share their vertex).
bool is_simple_polygon(std::span<const Vec2> poly);

}  // namespace physgen
