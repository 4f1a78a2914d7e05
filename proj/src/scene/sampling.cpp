#include "physgen/scene/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "physgen/core/rng.hpp"

namespace physgen::scene {

void SamplingCriteria::validate() const {
  if (min_buildings < 0) throw ValidationError("min_buildings must be non-negative");
  if (!(clear_radius_m >= 0.0) || !(clear_radius_m < inner_radius_m))
    throw ValidationError("clear radius must be smaller than the inner radius");
}

LocationVerdict check_location(const UrbanScene& scene, const SamplingCriteria& criteria) {
  LocationVerdict v;
  v.min_building_distance_m = std::numeric_limits<double>::infinity();
  for (const Polygon& poly : scene.buildings) {
    const double d = point_polygon_distance(scene.source, poly);
    v.min_building_distance_m = std::min(v.min_building_distance_m, d);
    if (d < criteria.inner_radius_m) ++v.buildings_within_inner;
  }
  if (v.min_building_distance_m < criteria.clear_radius_m) {
    v.reason = "building within " + std::to_string(criteria.clear_radius_m) + " m of the source";
    return v;
  }
  if (v.buildings_within_inner < criteria.min_buildings) {
    v.reason = "only " + std::to_string(v.buildings_within_inner) + " buildings within " +
               std::to_string(criteria.inner_radius_m) + " m";
    return v;
  }
  v.accepted = true;
  v.reason = "ok";
  return v;
}

namespace {

struct Candidate {
  Polygon poly;
  Vec2 center;
  double radius;  // bounding circle
};

Candidate make_footprint(Rng& rng, Vec2 center) {
  const double w = rng.uniform(8.0, 30.0);
  const double h = rng.uniform(8.0, 30.0);
  const double angle = rng.uniform(0.0, std::numbers::pi);
  Polygon local;
  if (rng.bernoulli(0.3)) {
    // L-shaped footprint: rectangle with one corner notch removed
    const double nx = w * rng.uniform(0.35, 0.65);
    const double ny = h * rng.uniform(0.35, 0.65);
    local = {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, -h / 2 + ny}, {-w / 2 + nx, -h / 2 + ny},
             {-w / 2 + nx, h / 2}, {-w / 2, h / 2}};
  } else {
    local = {{-w / 2, -h / 2}, {w / 2, -h / 2}, {w / 2, h / 2}, {-w / 2, h / 2}};
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Candidate out;
  out.center = center;
  out.radius = 0.5 * std::hypot(w, h);
  for (const Vec2& p : local) out.poly.push_back({center.x + c * p.x - s * p.y, center.y + s * p.x + c * p.y});
  return out;
}

bool fits(const Candidate& cand, const std::vector<Candidate>& placed, const UrbanScene& scene,
          const SamplingCriteria& criteria) {
  constexpr double kBorder = 3.0;
  constexpr double kGap = 6.0;
  for (const Vec2& v : cand.poly) {
    if (v.x < kBorder || v.y < kBorder || v.x > scene.extent_m - kBorder || v.y > scene.extent_m - kBorder)
      return false;
  }
  if (point_polygon_distance(scene.source, cand.poly) < criteria.clear_radius_m + 1.0) return false;
  for (const Candidate& other : placed) {
    if (distance(cand.center, other.center) < cand.radius + other.radius + kGap) return false;
  }
  return true;
}

}  // namespace

UrbanScene procedural_scene(std::uint64_t seed, const SamplingCriteria& criteria, const ProceduralOptions& options) {
  criteria.validate();
  if (criteria.inner_radius_m - criteria.clear_radius_m < 20.0)
    throw ValidationError("annulus between clear and inner radius is too thin for buildings");
  Rng rng(seed);
  UrbanScene scene;
  scene.extent_m = options.extent_m;
  scene.source = {options.extent_m / 2.0, options.extent_m / 2.0};

  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    std::vector<Candidate> placed;
    const int near_target = criteria.min_buildings + static_cast<int>(rng.uniform_int(2, 8));
    const int far_target = static_cast<int>(rng.uniform_int(8, 30));
    int tries = 0;
    while (static_cast<int>(placed.size()) < near_target && tries < 4000) {
      ++tries;
      const double r = rng.uniform(criteria.clear_radius_m + 5.0, criteria.inner_radius_m - 5.0);
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      Candidate cand = make_footprint(rng, scene.source + Vec2{r * std::cos(phi), r * std::sin(phi)});
      if (fits(cand, placed, scene, criteria)) placed.push_back(std::move(cand));
    }
    tries = 0;
    int far_placed = 0;
    while (far_placed < far_target && tries < 4000) {
      ++tries;
      const Vec2 c{rng.uniform(0.0, scene.extent_m), rng.uniform(0.0, scene.extent_m)};
      Candidate cand = make_footprint(rng, c);
      if (fits(cand, placed, scene, criteria)) {
        placed.push_back(std::move(cand));
        ++far_placed;
      }
    }
    UrbanScene candidate = scene;
    for (Candidate& c : placed) candidate.buildings.push_back(std::move(c.poly));
    try {
      candidate = normalized(std::move(candidate));
    } catch (const ValidationError&) {
      continue;
    }
    if (check_location(candidate, criteria).accepted) return candidate;
  }
  throw SceneGenerationError(options.max_attempts, "procedural scene could not satisfy the sampling criteria");
}

}  // namespace physgen::scene
