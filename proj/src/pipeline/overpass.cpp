#include "physgen/pipeline/overpass.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "physgen/core/image.hpp"
#include "physgen/core/rng.hpp"

namespace physgen::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

BBox bbox_around(scene::GeoPoint c, double half) {
  if (!(half > 0.0)) throw ValidationError("bbox half extent must be positive");
  constexpr double deg = 180.0 / 3.14159265358979323846;
  const double dlat = half / scene::kEarthRadiusM * deg;
  const double dlon = dlat / std::cos(c.lat / deg);
  return {c.lat - dlat, c.lon - dlon, c.lat + dlat, c.lon + dlon};
}

fs::path default_cache_dir() {
  if (const char* env = std::getenv("PHYSGEN_CACHE_DIR"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "physgen";
  return fs::temp_directory_path() / "physgen-cache";
}

namespace {

std::string bbox_text(const BBox& b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%.7f,%.7f,%.7f,%.7f", b.south, b.west, b.north, b.east);
  return buf;
}

void check_bbox(const BBox& b) {
  if (!(b.south < b.north) || !(b.west < b.east) || b.south < -90 || b.north > 90 || b.west < -180 || b.east > 180)
    throw ValidationError("invalid bounding box " + bbox_text(b));
}

json ring_of(const json& geometry) {
  json ring = json::array();
  for (const json& p : geometry) ring.push_back({p.at("lon").get<double>(), p.at("lat").get<double>()});
  return ring;
}

bool closed(const json& ring) { return ring.size() >= 4 && ring.front() == ring.back(); }

}  // namespace

std::string overpass_query(const BBox& box) {
  const std::string b = bbox_text(box);
  return "[out:json][timeout:90];(way[\"building\"](" + b + ");relation[\"building\"][\"type\"=\"multipolygon\"](" +
         b + "););out geom;";
}

std::string cache_key(const BBox& box) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "overpass_%016llx.geojson", static_cast<unsigned long long>(fnv1a64(bbox_text(box))));
  return buf;
}

std::string overpass_to_geojson(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("Overpass response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array())
    throw ValidationError("Overpass response has no 'elements' array");
  json features = json::array();
  for (const json& el : doc["elements"]) {
    const std::string type = el.value("type", "");
    const json tags = el.value("tags", json::object());
    const std::string id = type + "/" + std::to_string(el.value("id", 0LL));
    if (type == "way" && el.contains("geometry")) {
      json ring = ring_of(el["geometry"]);
      if (!closed(ring)) continue;
      features.push_back({{"type", "Feature"},
                          {"id", id},
                          {"properties", tags},
                          {"geometry", {{"type", "Polygon"}, {"coordinates", json::array({ring})}}}});
    } else if (type == "relation" && el.contains("members")) {
      json polys = json::array();
      for (const json& m : el["members"]) {
        if (m.value("role", "") != "outer" || !m.contains("geometry")) continue;
        json ring = ring_of(m["geometry"]);
        if (closed(ring)) polys.push_back(json::array({ring}));
      }
      if (polys.empty()) continue;
      features.push_back({{"type", "Feature"},
                          {"id", id},
                          {"properties", tags},
                          {"geometry", {{"type", "MultiPolygon"}, {"coordinates", polys}}}});
    }
  }
  return json{{"type", "FeatureCollection"}, {"features", features}}.dump();
}

FetchResult fetch_overpass(const BBox& box, const OverpassOptions& opt) {
  check_bbox(box);
  FetchResult res;
  const fs::path dir = opt.cache_dir.empty() ? default_cache_dir() : opt.cache_dir;
  res.cache_file = dir / cache_key(box);
  if (fs::exists(res.cache_file)) {
    res.geojson = read_text_file(res.cache_file);
    res.from_cache = true;
    return res;
  }
  if (opt.offline) throw OfflineMissError("offline mode: no cached response for bbox " + bbox_text(box));

  const std::string& url = opt.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("endpoint must be an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string host = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(host);
  if (!client.is_valid()) throw ValidationError("unsupported endpoint " + url);
  const auto timeout = std::chrono::duration<double>(opt.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  const int attempts = std::max(1, opt.attempts);
  double wait = opt.backoff_s;
  std::string last_error;
  for (int a = 1; a <= attempts; ++a) {
    ++res.network_calls;
    httplib::Params form{{"data", overpass_query(box)}};
    auto r = client.Post(path, form);
    if (r && r->status == 200) {
      res.geojson = overpass_to_geojson(r->body);
      fs::create_directories(dir);
      const fs::path tmp = res.cache_file.string() + ".tmp";
      write_text_file(tmp, res.geojson);
      fs::rename(tmp, res.cache_file);
      return res;
    }
    last_error = r ? "HTTP " + std::to_string(r->status) : httplib::to_string(r.error());
    if (a < attempts) {
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
      wait *= 2.0;
    }
  }
  throw TransportError(attempts, "Overpass request to " + url + " failed: " + last_error);
}

}  // namespace physgen::pipeline
