#include "physgen/scene/geojson.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace physgen::scene {

using nlohmann::json;

Vec2 project_local(GeoPoint p, GeoPoint origin, double extent_m) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double x = kEarthRadiusM * (p.lon - origin.lon) * deg * std::cos(origin.lat * deg);
  const double y = kEarthRadiusM * (p.lat - origin.lat) * deg;
  return {x + extent_m / 2.0, y + extent_m / 2.0};
}

Polygon clip_to_square(const Polygon& poly, double extent) {
  Polygon current = poly;
  // (axis, bound, keep_greater)
  const struct {
    int axis;
    double bound;
    bool keep_greater;
  } planes[] = {{0, 0.0, true}, {0, extent, false}, {1, 0.0, true}, {1, extent, false}};
  for (const auto& pl : planes) {
    if (current.empty()) break;
    auto coord = [&](Vec2 v) { return pl.axis == 0 ? v.x : v.y; };
    auto inside = [&](Vec2 v) { return pl.keep_greater ? coord(v) >= pl.bound : coord(v) <= pl.bound; };
    Polygon next;
    for (std::size_t i = 0; i < current.size(); ++i) {
      const Vec2 a = current[i];
      const Vec2 b = current[(i + 1) % current.size()];
      const bool ia = inside(a);
      const bool ib = inside(b);
      if (ia) next.push_back(a);
      if (ia != ib) {
        const double t = (pl.bound - coord(a)) / (coord(b) - coord(a));
        Vec2 hit = a + (b - a) * t;
        if (pl.axis == 0) hit.x = pl.bound; else hit.y = pl.bound;
        next.push_back(hit);
      }
    }
    current = std::move(next);
  }
  return current;
}

namespace {

std::vector<std::vector<GeoPoint>> outer_rings(const json& geometry) {
  std::vector<std::vector<GeoPoint>> rings;
  auto read_ring = [](const json& ring) {
    std::vector<GeoPoint> out;
    for (const json& pos : ring) {
      if (!pos.is_array() || pos.size() < 2) throw ValidationError("malformed coordinate");
      out.push_back({pos[1].get<double>(), pos[0].get<double>()});
    }
    return out;
  };
  const std::string type = geometry.value("type", "");
  const json& coords = geometry.at("coordinates");
  if (type == "Polygon") {
    if (!coords.empty()) rings.push_back(read_ring(coords.at(0)));
  } else if (type == "MultiPolygon") {
    for (const json& poly : coords)
      if (!poly.empty()) rings.push_back(read_ring(poly.at(0)));
  }
  return rings;
}

bool is_polygonal(const json& feature) {
  if (!feature.is_object() || !feature.contains("geometry") || !feature["geometry"].is_object()) return false;
  const std::string type = feature["geometry"].value("type", "");
  return type == "Polygon" || type == "MultiPolygon";
}

Polygon tidy(Polygon poly) {
  while (poly.size() > 1 && poly.front() == poly.back()) poly.pop_back();
  Polygon out;
  for (const Vec2& v : poly) {
    if (out.empty() || distance(out.back(), v) > 1e-9) out.push_back(v);
  }
  while (out.size() > 1 && distance(out.front(), out.back()) <= 1e-9) out.pop_back();
  // drop collinear vertices left behind by clipping
  bool changed = true;
  while (changed && out.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const Vec2 a = out[(i + out.size() - 1) % out.size()];
      const Vec2 b = out[i];
      const Vec2 c = out[(i + 1) % out.size()];
      if (std::abs(orient(a, b, c)) <= 1e-9 * std::max(1.0, distance(a, c))) {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  if (out.size() >= 3 && signed_area(out) < 0.0) std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace

GeoJsonImport parse_geojson_buildings(std::string_view document, double extent_m, std::optional<GeoPoint> center) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw GeoJsonParseError(e.byte, e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw ValidationError("document is not a GeoJSON FeatureCollection");

  GeoJsonImport result;
  std::vector<std::vector<GeoPoint>> rings;
  for (const json& feature : doc["features"]) {
    if (!is_polygonal(feature)) {
      ++result.skipped_features;
      continue;
    }
    ++result.polygon_features;
    try {
      for (auto& ring : outer_rings(feature["geometry"])) rings.push_back(std::move(ring));
    } catch (const std::exception&) {
      ++result.dropped_polygons;
    }
  }

  if (center) {
    result.origin = *center;
  } else {
    double lat_lo = std::numeric_limits<double>::infinity(), lat_hi = -lat_lo;
    double lon_lo = lat_lo, lon_hi = -lat_lo;
    for (const auto& ring : rings)
      for (const GeoPoint& p : ring) {
        lat_lo = std::min(lat_lo, p.lat);
        lat_hi = std::max(lat_hi, p.lat);
        lon_lo = std::min(lon_lo, p.lon);
        lon_hi = std::max(lon_hi, p.lon);
      }
    result.origin = rings.empty() ? GeoPoint{} : GeoPoint{(lat_lo + lat_hi) / 2, (lon_lo + lon_hi) / 2};
  }

  result.scene.extent_m = extent_m;
  result.scene.source = {extent_m / 2.0, extent_m / 2.0};
  for (const auto& ring : rings) {
    Polygon poly;
    for (const GeoPoint& p : ring) poly.push_back(project_local(p, result.origin, extent_m));
    poly = tidy(clip_to_square(tidy(std::move(poly)), extent_m));
    if (poly.size() < 3 || std::abs(signed_area(poly)) < 1e-6 || !is_simple_polygon(poly)) {
      ++result.dropped_polygons;
      continue;
    }
    if (point_in_polygon(result.scene.source, poly)) {
      ++result.source_buildings;
      continue;
    }
    result.scene.buildings.push_back(std::move(poly));
  }
  validate(result.scene);
  return result;
}

}  // namespace physgen::scene
