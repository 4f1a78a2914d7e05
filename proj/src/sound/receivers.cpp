#include "physgen/sound/receivers.hpp"

#include <algorithm>
#include <cmath>

namespace physgen::sound {

std::size_t ReceiverSet::count(ReceiverKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [&](const Receiver& r) { return r.kind == kind; }));
}

ReceiverSet place_receivers(const scene::UrbanScene& scene, const ReceiverOptions& options) {
  if (!(options.grid_step_m > 0.0) || !(options.facade_spacing_m > 0.0) || !(options.facade_offset_m >= 0.0))
    throw ValidationError("receiver spacings must be positive");
  const scene::SceneIndex index(scene);
  const double e = scene.extent_m;

  ReceiverSet set;
  set.grid_step_m = options.grid_step_m;
  set.lattice_size = static_cast<int>(std::floor(e / options.grid_step_m + 1e-9)) + 1;
  const int n = set.lattice_size;
  set.lattice.assign(static_cast<std::size_t>(n) * n, -1);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Vec2 p{i * options.grid_step_m, j * options.grid_step_m};
      if (index.is_indoor(p)) continue;
      set.lattice[static_cast<std::size_t>(j) * n + i] = static_cast<int>(set.points.size());
      set.points.push_back({p, ReceiverKind::kGrid});
    }
  }

  for (const scene::Polygon& poly : scene.buildings) {
    const double total = perimeter(poly);
    const auto samples = static_cast<std::size_t>(std::ceil(total / options.facade_spacing_m - 1e-9));
    std::size_t edge = 0;
    double edge_start = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double s = k * options.facade_spacing_m;
      Vec2 a = poly[edge], b = poly[(edge + 1) % poly.size()];
      while (edge + 1 < poly.size() && s >= edge_start + distance(a, b)) {
        edge_start += distance(a, b);
        ++edge;
        a = poly[edge];
        b = poly[(edge + 1) % poly.size()];
      }
      const double len = distance(a, b);
      const double u = len > 0.0 ? std::clamp((s - edge_start) / len, 0.0, 1.0) : 0.0;
      const Vec2 p = a + (b - a) * u + scene::outward_normal(a, b) * options.facade_offset_m;
      if (p.x < 0.0 || p.y < 0.0 || p.x > e || p.y > e) continue;
      if (index.is_indoor(p)) continue;
      if (index.distance_to_nearest_edge(p) < options.min_facade_clearance_m) continue;
      set.points.push_back({p, ReceiverKind::kFacade});
    }
  }
  return set;
}

}  // namespace physgen::sound
