#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "physgen/core/image.hpp"
#include "physgen/scene/raster.hpp"
#include "physgen/sound/receivers.hpp"
#include "physgen/sound/task.hpp"

namespace physgen::sound {

inline constexpr double kFullScaleDb = 115.0;

struct PropagationMap {
  int resolution = 0;
  std::vector<double> levels_db;  // per receiver
  Image raster;                   // 8-bit grayscale, row 0 = north
  double full_scale_db = kFullScaleDb;
  double db_to_pixel_scale() const { return 255.0 / full_scale_db; }
};

struct RenderOptions {
  int resolution = 256;
  double full_scale_db = kFullScaleDb;
  /// Pixels this close to a facade take the nearest facade receiver.
  double facade_zone_m = 2.5;
  /// Per-pixel classes from scene::sight_grid. When set, NLoS pixels are
  /// silent and LoS pixels only draw on receivers with a positive level.
  const std::vector<scene::SightClass>* sight = nullptr;
};

class IncompleteInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// clamp(round(255 * L / full_scale), 0, 255)
std::uint8_t quantize_level(double level_db, double full_scale_db = kFullScaleDb);

PropagationMap render_map(const ReceiverSet& receivers, std::span<const double> levels_db,
                          const scene::UrbanScene& scene, const RenderOptions& options = {});

/// Receivers, solver and renderer in one call. Baseline maps are rendered
/// with the pixel sight mask so that shadowed pixels are exactly silent.
PropagationMap simulate_map(const SoundTask& task, const scene::UrbanScene& scene, int resolution,
                            unsigned workers = 1);

}  // namespace physgen::sound
