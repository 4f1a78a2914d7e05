#pragma once

#include <cstdint>
#include <string>

#include "physgen/scene/scene.hpp"

namespace physgen::scene {

/// Location acceptance rule for sound scenes: enough buildings near the
/// source, none right next to it.
struct SamplingCriteria {
  int min_buildings = 10;
  double inner_radius_m = 200.0;
  double clear_radius_m = 50.0;

  void validate() const;
};

struct LocationVerdict {
  bool accepted = false;
  std::string reason;
  int buildings_within_inner = 0;
  double min_building_distance_m = 0.0;
};

/// A building "intersects" a disc when its distance to the source is below
/// the radius (sources inside a footprint have distance 0).
LocationVerdict check_location(const UrbanScene& scene, const SamplingCriteria& criteria);

class SceneGenerationError : public Error {
 public:
  SceneGenerationError(int attempts, const std::string& what)
      : Error(what + " after " + std::to_string(attempts) + " attempts"), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

struct ProceduralOptions {
  double extent_m = 500.0;
  int max_attempts = 64;
};

/// Seeded synthetic city block layout centered on the source. Deterministic
/// per seed; the result always satisfies `criteria`.
UrbanScene procedural_scene(std::uint64_t seed, const SamplingCriteria& criteria = {},
                            const ProceduralOptions& options = {});

}  // namespace physgen::scene
