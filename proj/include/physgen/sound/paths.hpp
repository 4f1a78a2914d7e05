#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "physgen/scene/scene.hpp"

namespace physgen::sound {

enum class PathKind { kDirect, kDiffracted, kReflected };

struct PropagationPath {
  PathKind kind = PathKind::kDirect;
  double length_m = 0.0;
  double delta_m = 0.0;  // diffracted only: length minus straight-line distance
  double source_level_db = 0.0;
  int order = 0;  // number of reflections
  std::vector<Vec2> vertices;  // source first, receiver last
};

class PreconditionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Shortest obstacle-avoiding paths from one source. Nodes are the convex
/// building corners that touch free space; distances from the source are
/// computed once, so each receiver query is a scan over visible corners.
class DiffractionGraph {
 public:
  DiffractionGraph(const scene::SceneIndex& index, Vec2 source);

  /// Throws PreconditionError when the direct segment is unobstructed.
  /// Returns nullopt when no corner sequence reaches the receiver.
  std::optional<PropagationPath> shortest_path(Vec2 rcv) const;

  Vec2 source() const { return source_; }
  const std::vector<Vec2>& corners() const { return corners_; }
  /// Shortest distance from the source to each corner (infinity if unreachable).
  const std::vector<double>& corner_distances() const { return dist_; }

 private:
  const scene::SceneIndex* index_;
  Vec2 source_;
  std::vector<Vec2> corners_;
  std::vector<double> dist_;
  std::vector<int> pred_;  // -1 = reached straight from the source
  std::vector<std::size_t> order_;  // reachable corners
};

std::optional<PropagationPath> shortest_diffraction_path(const scene::UrbanScene& scene, Vec2 src, Vec2 rcv);

struct ImageSource {
  Vec2 position;
  /// Indices into SceneIndex::edges(), in the order the sound hits them.
  std::vector<std::size_t> edges;
  int order() const { return static_cast<int>(edges.size()); }
};

/// All mirrored sources up to `order`: each step mirrors the previous image
/// across every edge that faces it, except the edge it was generated from.
std::vector<ImageSource> enumerate_image_sources(const scene::SceneIndex& index, Vec2 src, int order);
std::vector<ImageSource> enumerate_image_sources(const scene::UrbanScene& scene, Vec2 src, int order);

/// Rebuilds the specular path for an image source. Returns nullopt unless
/// every reflection point lies on its edge and every leg is unobstructed.
/// The returned path carries source_level_db = 0; the caller sets it.
std::optional<PropagationPath> specular_path(const scene::SceneIndex& index, const ImageSource& image, Vec2 src,
                                             Vec2 rcv);

}  // namespace physgen::sound
