#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "physgen/ball/render.hpp"
#include "physgen/core/image.hpp"
#include "physgen/lens/lens.hpp"
#include "physgen/scene/raster.hpp"

namespace physgen::metrics {

/// Per-pixel sight classes aligned to a propagation map raster.
struct SightMask {
  int width = 0;
  int height = 0;
  std::vector<scene::SightClass> classes;

  bool los(int x, int y) const { return at(x, y) == scene::SightClass::kLoS; }
  bool nlos(int x, int y) const { return at(x, y) == scene::SightClass::kNLoS; }
  scene::SightClass at(int x, int y) const { return classes[static_cast<std::size_t>(y) * width + x]; }
};

/// Line of sight from `source_px` to each pixel center. Throws when the
/// source lies in a building cell.
SightMask los_mask(const scene::OccupancyMask& mask, Vec2 source_px);

struct SoundMetrics {
  std::optional<double> mae_los, mae_nlos, wmape_los, wmape_nlos;  // empty class -> nullopt
  std::size_t count_los = 0, count_nlos = 0;
};

/// Per-pixel percentage error: 100 |p - t| / t capped at 100; a silent truth
/// pixel scores 100 when predicted loud and 0 when predicted silent.
double wmape_term(double pred, double truth);

/// Gray-level MAE and wMAPE split by sight class; building pixels are skipped.
SoundMetrics sound_report(const Image& pred, const Image& truth, const SightMask& sight);

struct LandmarkMetrics {
  double x_err = 0.0;
  double y_err = 0.0;
  double combined_err = 0.0;  // RMS of Euclidean distances
  double xy_shift = 0.0;      // |x_err - y_err|
};

LandmarkMetrics landmark_report(const lens::LandmarkSet& pred, const lens::LandmarkSet& truth);

struct BallMetrics {
  int ball_count = 0;
  std::optional<double> pos_x, pos_y;  // |dx|, |dy| in pixels
  std::optional<double> rotation_deg;  // minimal circular difference
  std::optional<double> roundness_std;
  std::optional<double> slope_err;  // degrees
  std::optional<bool> behind_start;  // predicted center left of the input-frame center
  std::optional<bool> off_ground;    // rolling mode: gap to the ground line above tolerance
  // whether the two checks above apply to the sample; when they do, an
  // empty value means the detection failed
  bool start_checked = false;
  bool ground_checked = false;
};

/// Pixel tolerance of the "ball on the ground" check in rolling mode.
inline constexpr double kGroundGapTolerancePx = 2.0;
/// A prediction counts as behind the start only when it is this far left of
/// the input-frame center; keeps vertical drops from flagging detector noise.
inline constexpr double kBehindTolerancePx = 0.5;

BallMetrics ball_report(const Image& pred_img, const ball::BallState& truth_state, const ball::BallSimConfig& cfg,
                        const std::optional<ball::BallState>& input_state = std::nullopt);

/// Minimal circular difference in degrees, in [0, 180].
double angle_difference_deg(double a, double b);

struct BenchResult {
  std::size_t n = 0;
  unsigned workers = 1;
  double mean_ms = 0.0;  // per sample
  double std_ms = 0.0;   // over samples (single-threaded) or over rounds (multi-threaded)
};

/// Calls fn(i) three times for warm-up, then n timed times. With
/// workers > 1 the n calls run on a pool and the mean is wall time / n.
BenchResult runtime_bench(const std::function<void(std::size_t)>& fn, std::size_t n, unsigned workers = 1);

/// Flat per-sample record; absent values are non-evaluable.
struct SampleMetrics {
  std::string sample_id;
  std::map<std::string, std::optional<double>> values;
};

SampleMetrics to_sample(const std::string& id, const SoundMetrics& m);
SampleMetrics to_sample(const std::string& id, const LandmarkMetrics& m);
SampleMetrics to_sample(const std::string& id, const BallMetrics& m);

struct EvalReport {
  std::string task;
  std::vector<SampleMetrics> samples;
  std::map<std::string, double> mean;                // over evaluable samples
  std::map<std::string, double> non_evaluable_rate;  // fraction of applicable samples without a value
  std::size_t expected = 0;
  std::vector<std::string> missing;
  double coverage = 0.0;
  std::optional<double> runtime_ms_per_sample;

  /// Recomputes mean, non_evaluable_rate and coverage from samples.
  void aggregate();
  std::string to_json() const;
  std::string to_csv() const;
  /// Human-readable aggregate table.
  std::string format_table() const;
};

}  // namespace physgen::metrics
