#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "physgen/core/image.hpp"
#include "physgen/scene/scene.hpp"

namespace physgen::scene {

/// Binary building raster. Pixel (col, row) covers the half-open square
/// [col, col+1) x [row, row+1) in pixel coordinates; row 0 is the northern
/// edge of the domain.
struct OccupancyMask {
  int width = 0;
  int height = 0;
  double meters_per_pixel = 1.0;
  std::vector<std::uint8_t> cells;  // 1 = building interior

  bool blocked(int col, int row) const { return cells[static_cast<std::size_t>(row) * width + col] != 0; }
  bool contains_pixel_point(Vec2 p) const { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height; }

  /// Meters (y north) to continuous pixel coordinates (y down).
  Vec2 to_pixel(Vec2 m) const { return {m.x / meters_per_pixel, height - m.y / meters_per_pixel}; }
  Vec2 to_meters(Vec2 px) const { return {px.x * meters_per_pixel, (height - px.y) * meters_per_pixel}; }
  Vec2 pixel_center_meters(int col, int row) const { return to_meters({col + 0.5, row + 0.5}); }

  bool operator==(const OccupancyMask&) const = default;
};

/// A pixel is set iff its center lies inside or on the boundary of a building.
OccupancyMask rasterize_scene(const UrbanScene& scene, int resolution);

/// 0 = free, 255 = building.
Image mask_to_image(const OccupancyMask& mask);
OccupancyMask mask_from_image(const Image& img, double extent_m);

enum class SightStatus {
  kVisible,
  kBlocked,
  kEndpointInside,  // src or dst lies in a building cell
  kOutOfBounds,
};

/// Visits the supercover of the segment a->b in pixel coordinates: every
/// cell the segment passes through, and at exact lattice-corner crossings
/// both diagonal neighbours as well. Endpoints are visited in a canonical
/// order so the visited set does not depend on direction. `visit(col, row)`
/// returns false to stop early. Points must lie inside the grid.
template <typename Visit>
void traverse_supercover(Vec2 a, Vec2 b, int width, int height, Visit&& visit) {
  if (b.x < a.x || (b.x == a.x && b.y < a.y)) std::swap(a, b);
  auto cell_of = [&](Vec2 p) {
    int cx = static_cast<int>(std::floor(p.x));
    int cy = static_cast<int>(std::floor(p.y));
    if (cx >= width) cx = width - 1;
    if (cy >= height) cy = height - 1;
    return std::pair<int, int>{cx, cy};
  };
  auto [cx, cy] = cell_of(a);
  const auto [ex, ey] = cell_of(b);
  if (!visit(cx, cy)) return;
  const Vec2 d = b - a;
  const int step_x = (d.x > 0) - (d.x < 0);
  const int step_y = (d.y > 0) - (d.y < 0);
  constexpr double inf = 1e300;
  const int max_steps = std::abs(ex - cx) + std::abs(ey - cy) + 2;
  for (int guard = 0; (cx != ex || cy != ey) && guard < max_steps; ++guard) {
    // Crossing parameters are recomputed from the lattice line each step
    // (no accumulation), so mathematically equal crossings compare equal.
    const double tx = (step_x != 0 && cx != ex) ? ((cx + (step_x > 0 ? 1 : 0)) - a.x) / d.x : inf;
    const double ty = (step_y != 0 && cy != ey) ? ((cy + (step_y > 0 ? 1 : 0)) - a.y) / d.y : inf;
    if (tx == inf && ty == inf) break;
    if (tx < ty) {
      cx += step_x;
    } else if (ty < tx) {
      cy += step_y;
    } else {
      if (!visit(cx + step_x, cy) || !visit(cx, cy + step_y)) return;
      cx += step_x;
      cy += step_y;
    }
    if (cx < 0 || cy < 0 || cx >= width || cy >= height) return;
    if (!visit(cx, cy)) return;
  }
}

/// Full classification of the straight path between two pixel-space points.
SightStatus trace_sight(const OccupancyMask& mask, Vec2 src_px, Vec2 dst_px);

/// True iff no supercover cell between src and dst is a building cell. An
/// endpoint inside a building yields false; out-of-bounds endpoints throw.
bool line_of_sight(const OccupancyMask& mask, Vec2 src_px, Vec2 dst_px);

enum class SightClass : std::uint8_t { kBuilding = 0, kLoS = 1, kNLoS = 2 };

/// Line of sight from `source_px` to every pixel center. Building pixels are
/// classified kBuilding. Throws when the source cell is a building cell.
std::vector<SightClass> sight_grid(const OccupancyMask& mask, Vec2 source_px);

}  // namespace physgen::scene
