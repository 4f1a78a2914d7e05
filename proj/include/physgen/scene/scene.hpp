#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "physgen/core/error.hpp"
#include "physgen/core/geometry.hpp"

namespace physgen::scene {

/// Building footprint, counter-clockwise, implicitly closed.
using Polygon = std::vector<Vec2>;

/// Urban layout in a square domain [0, extent_m]^2 (meters, y pointing north).
struct UrbanScene {
  std::vector<Polygon> buildings;
  double extent_m = 500.0;
  Vec2 source{250.0, 250.0};
};

class InvalidPolygonError : public ValidationError {
 public:
  InvalidPolygonError(std::size_t index, const std::string& what)
      : ValidationError("building " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t polygon_index() const { return index_; }

 private:
  std::size_t index_;
};

/// Throws InvalidPolygonError / ValidationError when an invariant is violated.
void validate(const UrbanScene& scene);

/// Reorients every polygon counter-clockwise, drops repeated closing
/// vertices, then validates.
UrbanScene normalized(UrbanScene scene);

/// Outward unit normal of edge a->b of a counter-clockwise polygon.
inline Vec2 outward_normal(Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  return Vec2{d.y, -d.x} / norm(d);
}

struct EdgeRef {
  std::size_t building = 0;
  std::size_t index = 0;  // edge from vertex index to index+1
  Segment segment;
  Vec2 normal;  // unit normal pointing out of the building, whatever the ring orientation
};

/// Read-only acceleration structure for geometric queries in meters.
class SceneIndex {
 public:
  explicit SceneIndex(const UrbanScene& scene);

  const UrbanScene& scene() const { return *scene_; }
  const std::vector<EdgeRef>& edges() const { return edges_; }
  const std::vector<Box>& boxes() const { return boxes_; }

  /// True when p is inside or on the boundary of any building.
  bool is_indoor(Vec2 p) const;

  /// True when the open segment passes through the interior of any building.
  /// Grazing a corner or sliding along a facade does not block, except along
  /// a wall shared by two touching buildings.
  bool segment_blocked(Vec2 a, Vec2 b) const;

  /// Distance from p to the nearest building edge.
  double distance_to_nearest_edge(Vec2 p) const;

 private:
  bool segment_blocked_by(std::size_t building, Vec2 a, Vec2 b) const;

  const UrbanScene* scene_;
  std::vector<EdgeRef> edges_;
  std::vector<Box> boxes_;
  std::vector<Segment> shared_walls_;
};

}  // namespace physgen::scene
