#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "physgen/ball/sim.hpp"
#include "physgen/core/image.hpp"
#include "physgen/lens/lens.hpp"
#include "physgen/metrics/metrics.hpp"
#include "physgen/pipeline/manifest.hpp"
#include "physgen/scene/sampling.hpp"
#include "physgen/sound/task.hpp"

namespace physgen::pipeline {

enum class TaskKind { kSound, kLens, kBall };
std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view name);

/// One verdict per candidate, in order.
std::vector<scene::LocationVerdict> sample_locations(const std::vector<scene::UrbanScene>& candidates,
                                                     const scene::SamplingCriteria& criteria = {});

struct SoundOptions {
  sound::SoundTask task;
  int resolution = 256;
  scene::SamplingCriteria criteria;
  /// Imported scenes to draw from (cycled); procedural scenes when empty.
  std::vector<scene::UrbanScene> scenes;
};

struct LensOptions {
  int size = 256;
  double tangential_bound = 0.05;  // |p1|, |p2| <= bound
  double radial_bound = 0.0;       // |k1| <= bound; k2 = k3 = 0
};

struct BallOptions {
  std::optional<ball::Mode> mode;  // alternate modes when unset
  double beta_min_deg = 2.0, beta_max_deg = 25.0;
  double height_min_m = 0.5, height_max_m = 2.0;
  double dt_min_s = 0.1, dt_max_s = 1.0;
  double t0_max_s = 2.0;
  int max_attempts = 200;
  ball::BallSimConfig base;  // physical constants
};

struct GenerationSpec {
  TaskKind kind = TaskKind::kSound;
  SoundOptions sound;
  LensOptions lens;
  BallOptions ball;
};

/// Writes `<out>/<task>/<split>/<id>_{in,out}.png` plus `<id>.json` (and
/// landmark CSVs for lens), and `<out>/manifest.csv`. Per-sample seeds are
/// derived from (seed, index), so outputs do not depend on `workers`.
/// Failed samples keep a row whose status carries the error.
Manifest generate_dataset(const GenerationSpec& spec, std::size_t n, const std::filesystem::path& out_dir,
                          std::uint64_t seed, unsigned workers = 1);

/// Matches predictions to manifest targets by sample id. A prediction is
/// looked up as <pred>/<target_path>, <pred>/<target file name>, then
/// <pred>/<id>.png; lens samples prefer a landmark CSV (<id>_out.csv or
/// <id>.csv). Missing predictions are listed and lower the coverage.
metrics::EvalReport evaluate_predictions(const std::filesystem::path& pred_dir, const Manifest& manifest,
                                         const std::filesystem::path& dataset_root, TaskKind task);

/// Synthetic face-like lens input: shaded head with 68 dark landmark dots
/// in the usual jaw / brows / nose / eyes / mouth layout.
struct FaceSample {
  Image image;
  lens::LandmarkSet landmarks;
};
FaceSample synthetic_face(std::uint64_t seed, int size = 256);

/// Refines each guess to the darkness-weighted centroid of its dot within
/// `radius` pixels. Returns nullopt when a window holds no dot.
std::optional<lens::LandmarkSet> locate_landmarks(const Image& img, const lens::LandmarkSet& guess,
                                                  double radius = 4.0);

/// Ball config and the two frame states of a sample, as stored in its JSON.
struct BallSampleParams {
  ball::BallSimConfig cfg;
  double t0 = 0.0;
  ball::BallState input, target;
};
BallSampleParams sample_ball_params(std::uint64_t seed, std::size_t index, const BallOptions& options);

}  // namespace physgen::pipeline
