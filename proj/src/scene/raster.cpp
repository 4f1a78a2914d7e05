#include "physgen/scene/raster.hpp"

#include <algorithm>

namespace physgen::scene {

OccupancyMask rasterize_scene(const UrbanScene& scene, int resolution) {
  if (resolution != 256 && resolution != 512)
    throw ValidationError("resolution must be 256 or 512, got " + std::to_string(resolution));
  validate(scene);
  OccupancyMask mask;
  mask.width = mask.height = resolution;
  mask.meters_per_pixel = scene.extent_m / resolution;
  mask.cells.assign(static_cast<std::size_t>(resolution) * resolution, 0);
  for (const Polygon& poly : scene.buildings) {
    const Box box = bounding_box(poly);
    // pixel rows/cols whose centers may fall within the box
    const Vec2 p_lo = mask.to_pixel({box.lo.x, box.hi.y});
    const Vec2 p_hi = mask.to_pixel({box.hi.x, box.lo.y});
    const int c0 = std::max(0, static_cast<int>(std::floor(p_lo.x - 0.5)));
    const int c1 = std::min(resolution - 1, static_cast<int>(std::ceil(p_hi.x - 0.5)));
    const int r0 = std::max(0, static_cast<int>(std::floor(p_lo.y - 0.5)));
    const int r1 = std::min(resolution - 1, static_cast<int>(std::ceil(p_hi.y - 0.5)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (point_in_polygon(mask.pixel_center_meters(c, r), poly))
          mask.cells[static_cast<std::size_t>(r) * resolution + c] = 1;
      }
    }
  }
  return mask;
}

Image mask_to_image(const OccupancyMask& mask) {
  Image img(mask.width, mask.height, 1);
  for (std::size_t i = 0; i < mask.cells.size(); ++i) img.data[i] = mask.cells[i] ? 255 : 0;
  return img;
}

OccupancyMask mask_from_image(const Image& img, double extent_m) {
  if (img.empty() || img.width != img.height) throw ValidationError("occupancy image must be square and non-empty");
  OccupancyMask mask;
  mask.width = img.width;
  mask.height = img.height;
  mask.meters_per_pixel = extent_m / img.width;
  mask.cells.resize(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) mask.cells[static_cast<std::size_t>(y) * img.width + x] = img.at(x, y, 0) >= 128;
  return mask;
}

SightStatus trace_sight(const OccupancyMask& mask, Vec2 src_px, Vec2 dst_px) {
  if (!mask.contains_pixel_point(src_px) || !mask.contains_pixel_point(dst_px)) return SightStatus::kOutOfBounds;
  auto cell_blocked = [&](Vec2 p) {
    const int c = std::min(mask.width - 1, static_cast<int>(std::floor(p.x)));
    const int r = std::min(mask.height - 1, static_cast<int>(std::floor(p.y)));
    return mask.blocked(c, r);
  };
  if (cell_blocked(src_px) || cell_blocked(dst_px)) return SightStatus::kEndpointInside;
  bool clear = true;
  traverse_supercover(src_px, dst_px, mask.width, mask.height, [&](int c, int r) {
    if (c < 0 || r < 0 || c >= mask.width || r >= mask.height) return true;
    if (mask.blocked(c, r)) clear = false;
    return clear;
  });
  return clear ? SightStatus::kVisible : SightStatus::kBlocked;
}

bool line_of_sight(const OccupancyMask& mask, Vec2 src_px, Vec2 dst_px) {
  const SightStatus s = trace_sight(mask, src_px, dst_px);
  if (s == SightStatus::kOutOfBounds) throw ValidationError("line_of_sight endpoint outside the mask");
  return s == SightStatus::kVisible;
}

std::vector<SightClass> sight_grid(const OccupancyMask& mask, Vec2 source_px) {
  const SightStatus at_source = trace_sight(mask, source_px, source_px);
  if (at_source == SightStatus::kOutOfBounds) throw ValidationError("source outside the mask");
  if (at_source == SightStatus::kEndpointInside) throw ValidationError("source lies in a building cell");
  std::vector<SightClass> out(mask.cells.size());
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * mask.width + c;
      if (mask.cells[i]) {
        out[i] = SightClass::kBuilding;
        continue;
      }
      const bool los = trace_sight(mask, source_px, {c + 0.5, r + 0.5}) == SightStatus::kVisible;
      out[i] = los ? SightClass::kLoS : SightClass::kNLoS;
    }
  }
  return out;
}

}  // namespace physgen::scene
