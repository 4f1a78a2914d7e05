#pragma once

#include <cstdint>
#include <vector>

#include "physgen/scene/scene.hpp"

namespace physgen::sound {

enum class ReceiverKind : std::uint8_t { kGrid, kFacade };

struct Receiver {
  Vec2 pos;
  ReceiverKind kind = ReceiverKind::kGrid;
};

struct ReceiverOptions {
  double grid_step_m = 5.0;
  double facade_spacing_m = 2.0;
  double facade_offset_m = 2.0;
  /// Facade points closer than this to any edge (inner corners) are dropped.
  double min_facade_clearance_m = 1.5;
};

struct ReceiverSet {
  std::vector<Receiver> points;
  double grid_step_m = 5.0;
  int lattice_size = 0;  // nodes per side
  /// Lattice node (i, j) -> index into points, or -1 when the node is indoor.
  /// Node (i, j) sits at (i * step, j * step).
  std::vector<int> lattice;

  int lattice_receiver(int i, int j) const { return lattice[static_cast<std::size_t>(j) * lattice_size + i]; }
  std::size_t count(ReceiverKind kind) const;
};

/// Regular lattice over the domain minus indoor points, followed by facade
/// receivers sampled along every building boundary.
ReceiverSet place_receivers(const scene::UrbanScene& scene, const ReceiverOptions& options = {});

}  // namespace physgen::sound
