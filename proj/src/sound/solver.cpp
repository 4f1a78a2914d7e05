#include "physgen/sound/solver.hpp"

#include <algorithm>
#include <cmath>

#include "physgen/core/parallel.hpp"
#include "physgen/sound/attenuation.hpp"

namespace physgen::sound {

double path_level(const PropagationPath& path, const SoundTask& task) {
  double level = path.source_level_db - geometric_spreading(std::max(path.length_m, 1.0)) -
                 atmospheric_absorption(path.length_m, task.alpha_air_db_per_km);
  if (path.kind == PathKind::kDiffracted)
    level -= diffraction_attenuation(path.delta_m, task.wavelength_m(), task.c_dprime);
  return level;
}

SoundSolver::SoundSolver(const SoundTask& task, scene::UrbanScene scene)
    : task_(task), scene_(std::move(scene)), index_(scene_) {
  validate(task_);
  scene::validate(scene_);
  if (task_.diffraction_enabled()) graph_.emplace(index_, scene_.source);
  if (task_.reflections_enabled()) images_ = enumerate_image_sources(index_, scene_.source, task_.reflection_order);
}

ReceiverLevel SoundSolver::evaluate(Vec2 rcv, std::vector<PropagationPath>* paths) const {
  ReceiverLevel out;
  if (index_.is_indoor(rcv)) {
    out.indoor = true;
    out.reachable = false;
    return out;
  }
  std::vector<PropagationPath> found;
  const Vec2 src = scene_.source;
  if (!index_.segment_blocked(src, rcv)) {
    PropagationPath p;
    p.kind = PathKind::kDirect;
    p.length_m = distance(src, rcv);
    p.source_level_db = task_.source_level_db;
    p.vertices = {src, rcv};
    found.push_back(std::move(p));
  } else if (graph_) {
    if (auto p = graph_->shortest_path(rcv)) {
      p->source_level_db = task_.source_level_db;
      found.push_back(std::move(*p));
    }
  }
  for (const ImageSource& img : images_) {
    if (auto p = specular_path(index_, img, src, rcv)) {
      p->source_level_db = reflected_source_level(task_.source_level_db, p->order, task_.alpha_vert);
      found.push_back(std::move(*p));
    }
  }
  if (found.empty()) {
    out.reachable = false;
  } else {
    std::vector<double> levels;
    levels.reserve(found.size());
    for (const PropagationPath& p : found) levels.push_back(path_level(p, task_));
    out.level_db = std::max(0.0, energetic_sum(levels));
  }
  if (paths) *paths = std::move(found);
  return out;
}

std::vector<double> SoundSolver::levels(const ReceiverSet& receivers, unsigned workers) const {
  std::vector<double> out(receivers.points.size(), 0.0);
  parallel_for(out.size(), workers, [&](std::size_t i) { out[i] = evaluate(receivers.points[i].pos).level_db; });
  return out;
}

double receiver_level(const SoundTask& task, const scene::UrbanScene& scene, Vec2 rcv) {
  return SoundSolver(task, scene).evaluate(rcv).level_db;
}

}  // namespace physgen::sound
