#include "physgen/sound/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "physgen/sound/solver.hpp"

namespace physgen::sound {

namespace {

// Bucket grid for nearest-receiver lookups.
class NearestIndex {
 public:
  NearestIndex(double extent, double cell) : cell_(cell), n_(std::max(1, static_cast<int>(std::ceil(extent / cell)))) {
    buckets_.resize(static_cast<std::size_t>(n_) * n_);
  }

  void add(Vec2 p, std::size_t id) {
    buckets_[bucket(cell_of(p.x), cell_of(p.y))].push_back({p, id});
    ++size_;
  }

  /// Nearest point within max_r, or -1.
  long nearest(Vec2 p, double max_r) const {
    if (size_ == 0) return -1;
    const int cx = cell_of(p.x), cy = cell_of(p.y);
    long best = -1;
    double best_d = max_r;
    for (int ring = 0; ring <= n_; ++ring) {
      if ((ring - 1) * cell_ > best_d) break;
      for (int y = cy - ring; y <= cy + ring; ++y) {
        for (int x = cx - ring; x <= cx + ring; ++x) {
          if (std::max(std::abs(x - cx), std::abs(y - cy)) != ring) continue;
          if (x < 0 || y < 0 || x >= n_ || y >= n_) continue;
          for (const auto& [q, id] : buckets_[bucket(x, y)]) {
            const double d = distance(p, q);
            if (d < best_d || (d == best_d && best >= 0 && static_cast<long>(id) < best)) {
              best_d = d;
              best = static_cast<long>(id);
            }
          }
        }
      }
    }
    return best;
  }

 private:
  int cell_of(double v) const { return std::clamp(static_cast<int>(std::floor(v / cell_)), 0, n_ - 1); }
  std::size_t bucket(int x, int y) const { return static_cast<std::size_t>(y) * n_ + x; }

  double cell_;
  int n_;
  std::size_t size_ = 0;
  std::vector<std::vector<std::pair<Vec2, std::size_t>>> buckets_;
};

}  // namespace

std::uint8_t quantize_level(double level_db, double full_scale_db) {
  const double v = std::round(255.0 * level_db / full_scale_db);
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

PropagationMap render_map(const ReceiverSet& receivers, std::span<const double> levels_db,
                          const scene::UrbanScene& scene, const RenderOptions& options) {
  if (levels_db.size() != receivers.points.size())
    throw IncompleteInputError("render_map: " + std::to_string(levels_db.size()) + " levels for " +
                               std::to_string(receivers.points.size()) + " receivers");
  for (double l : levels_db)
    if (!std::isfinite(l)) throw IncompleteInputError("render_map: receiver level is not finite");
  if (!(options.full_scale_db > 0.0)) throw ValidationError("render_map: full scale must be positive");

  const scene::OccupancyMask mask = scene::rasterize_scene(scene, options.resolution);
  const int res = options.resolution;
  if (options.sight && options.sight->size() != mask.cells.size())
    throw ValidationError("render_map: sight mask size does not match the resolution");
  const bool masked = options.sight != nullptr;
  auto usable = [&](std::size_t i) { return !masked || levels_db[i] > 0.0; };

  const double extent = scene.extent_m;
  NearestIndex facade(extent, 5.0), any(extent, 5.0);
  for (std::size_t i = 0; i < receivers.points.size(); ++i) {
    if (!usable(i)) continue;
    any.add(receivers.points[i].pos, i);
    if (receivers.points[i].kind == ReceiverKind::kFacade) facade.add(receivers.points[i].pos, i);
  }

  std::vector<Box> zones;
  for (const scene::Polygon& poly : scene.buildings) {
    Box b = bounding_box(poly);
    b.lo -= Vec2{options.facade_zone_m, options.facade_zone_m};
    b.hi += Vec2{options.facade_zone_m, options.facade_zone_m};
    zones.push_back(b);
  }
  auto near_facade = [&](Vec2 p) {
    for (std::size_t b = 0; b < zones.size(); ++b) {
      if (!zones[b].contains(p)) continue;
      const scene::Polygon& poly = scene.buildings[b];
      for (std::size_t k = 0; k < poly.size(); ++k)
        if (point_segment_distance(p, {poly[k], poly[(k + 1) % poly.size()]}) <= options.facade_zone_m) return true;
    }
    return false;
  };
  const double facade_search = options.facade_zone_m + 6.0;

  const int n = receivers.lattice_size;
  const double step = receivers.grid_step_m;
  auto interpolate = [&](Vec2 p, double& out) {
    if (n < 2) return false;
    const double gx = std::clamp(p.x / step, 0.0, n - 1.0), gy = std::clamp(p.y / step, 0.0, n - 1.0);
    const int i0 = std::min(static_cast<int>(gx), n - 2), j0 = std::min(static_cast<int>(gy), n - 2);
    const double fx = gx - i0, fy = gy - j0;
    double acc = 0.0, wsum = 0.0;
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        const double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy);
        const int id = receivers.lattice_receiver(i0 + di, j0 + dj);
        if (id < 0 || w <= 0.0 || !usable(static_cast<std::size_t>(id))) continue;
        acc += w * levels_db[static_cast<std::size_t>(id)];
        wsum += w;
      }
    }
    if (wsum <= 1e-12) return false;
    out = acc / wsum;
    return true;
  };

  PropagationMap map;
  map.resolution = res;
  map.full_scale_db = options.full_scale_db;
  map.levels_db.assign(levels_db.begin(), levels_db.end());
  map.raster = Image(res, res, 1);
  for (int r = 0; r < res; ++r) {
    for (int c = 0; c < res; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * res + c;
      if (mask.cells[i]) continue;
      if (masked && (*options.sight)[i] != scene::SightClass::kLoS) continue;
      const Vec2 p = mask.pixel_center_meters(c, r);
      double level = 0.0;
      bool have = false;
      if (near_facade(p)) {
        const long f = facade.nearest(p, facade_search);
        if (f >= 0) {
          level = levels_db[static_cast<std::size_t>(f)];
          have = true;
        }
      }
      if (!have) have = interpolate(p, level);
      if (!have) {
        const long a = any.nearest(p, std::numeric_limits<double>::infinity());
        if (a >= 0) level = levels_db[static_cast<std::size_t>(a)];
      }
      map.raster.data[i] = quantize_level(level, options.full_scale_db);
    }
  }
  return map;
}

PropagationMap simulate_map(const SoundTask& task, const scene::UrbanScene& scene, int resolution, unsigned workers) {
  const SoundSolver solver(task, scene);
  const ReceiverSet receivers = place_receivers(solver.scene());
  const std::vector<double> levels = solver.levels(receivers, workers);
  RenderOptions opt;
  opt.resolution = resolution;
  std::vector<scene::SightClass> sight;
  if (task.variant == Variant::kBaseline) {
    const scene::OccupancyMask mask = scene::rasterize_scene(solver.scene(), resolution);
    sight = scene::sight_grid(mask, mask.to_pixel(solver.scene().source));
    opt.sight = &sight;
  }
  return render_map(receivers, levels, solver.scene(), opt);
}

}  // namespace physgen::sound
