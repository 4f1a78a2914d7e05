#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "physgen/core/error.hpp"
#include "physgen/scene/geojson.hpp"

namespace physgen::pipeline {

struct BBox {
  double south = 0.0, west = 0.0, north = 0.0, east = 0.0;
};

/// Square box of side 2 * half_extent_m around `center`.
BBox bbox_around(scene::GeoPoint center, double half_extent_m);

class TransportError : public Error {
 public:
  TransportError(int attempts, const std::string& what)
      : Error(what + " (" + std::to_string(attempts) + " attempts)"), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

class OfflineMissError : public Error {
 public:
  using Error::Error;
};

struct OverpassOptions {
  std::string endpoint = "https://overpass-api.de/api/interpreter";
  /// Empty: $PHYSGEN_CACHE_DIR, else $HOME/.cache/physgen.
  std::filesystem::path cache_dir;
  bool offline = false;
  int attempts = 3;
  double backoff_s = 1.0;  // doubled after every failed attempt
  double timeout_s = 90.0;
};

struct FetchResult {
  std::string geojson;
  bool from_cache = false;
  int network_calls = 0;
  std::filesystem::path cache_file;
};

std::filesystem::path default_cache_dir();
std::string overpass_query(const BBox& box);
/// Cache file name for a bounding box (hash of the box rounded to 1e-7 deg).
std::string cache_key(const BBox& box);

/// Converts an Overpass "out geom" JSON response to a GeoJSON
/// FeatureCollection of building polygons. Closed ways become Polygons;
/// multipolygon relations become MultiPolygons of their closed outer members.
std::string overpass_to_geojson(std::string_view overpass_json);

/// POSTs the building query for `box`, converts the answer to GeoJSON and
/// caches it. Cached boxes are served without network access.
FetchResult fetch_overpass(const BBox& box, const OverpassOptions& options = {});

}  // namespace physgen::pipeline
