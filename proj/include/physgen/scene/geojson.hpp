#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "physgen/scene/scene.hpp"

namespace physgen::scene {

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

inline constexpr double kEarthRadiusM = 6371008.8;

/// Equirectangular projection about `origin`; the origin maps to the center
/// of the [0, extent_m]^2 domain.
Vec2 project_local(GeoPoint p, GeoPoint origin, double extent_m);

class GeoJsonParseError : public Error {
 public:
  GeoJsonParseError(std::size_t byte_offset, const std::string& what)
      : Error("GeoJSON parse error at byte " + std::to_string(byte_offset) + ": " + what), byte_offset_(byte_offset) {}
  /// 1-based position of the byte where parsing failed.
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

struct GeoJsonImport {
  UrbanScene scene;
  GeoPoint origin;
  std::size_t polygon_features = 0;
  std::size_t skipped_features = 0;   // non-polygon geometry
  std::size_t dropped_polygons = 0;   // empty after clipping, degenerate, or self-intersecting
  std::size_t source_buildings = 0;   // footprints covering the source, removed
};

/// Reads building footprints from a GeoJSON FeatureCollection. Polygon and
/// MultiPolygon features are buildings (outer rings only); everything else is
/// skipped and counted. Footprints are projected about `center` (default:
/// the center of the coordinate bounding box) and clipped to the domain.
GeoJsonImport parse_geojson_buildings(std::string_view document, double extent_m = 500.0,
                                      std::optional<GeoPoint> center = std::nullopt);

/// Sutherland-Hodgman clip against the axis-aligned square [0, extent]^2.
Polygon clip_to_square(const Polygon& poly, double extent);

}  // namespace physgen::scene
