#pragma once

#include <optional>
#include <vector>

#include "physgen/scene/scene.hpp"
#include "physgen/sound/paths.hpp"
#include "physgen/sound/receivers.hpp"
#include "physgen/sound/task.hpp"

namespace physgen::sound {

struct ReceiverLevel {
  double level_db = 0.0;
  bool indoor = false;
  bool reachable = true;  // false when no path contributes
};

/// Level of one path: source level minus spreading, air absorption and, for
/// diffracted paths, the diffraction term. Spreading distance is clamped to
/// at least 1 m.
double path_level(const PropagationPath& path, const SoundTask& task);

/// Precomputes everything that depends only on (task, scene): the scene
/// index, the corner graph for diffraction and the image sources.
class SoundSolver {
 public:
  SoundSolver(const SoundTask& task, scene::UrbanScene scene);
  SoundSolver(const SoundSolver&) = delete;
  SoundSolver& operator=(const SoundSolver&) = delete;

  ReceiverLevel evaluate(Vec2 rcv, std::vector<PropagationPath>* paths = nullptr) const;
  std::vector<double> levels(const ReceiverSet& receivers, unsigned workers = 1) const;

  const SoundTask& task() const { return task_; }
  const scene::UrbanScene& scene() const { return scene_; }
  const scene::SceneIndex& index() const { return index_; }
  const std::vector<ImageSource>& image_sources() const { return images_; }

 private:
  SoundTask task_;
  scene::UrbanScene scene_;
  scene::SceneIndex index_;
  std::optional<DiffractionGraph> graph_;
  std::vector<ImageSource> images_;
};

/// One-off evaluation; builds a SoundSolver internally.
double receiver_level(const SoundTask& task, const scene::UrbanScene& scene, Vec2 rcv);

}  // namespace physgen::sound
