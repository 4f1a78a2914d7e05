#include "physgen/metrics/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "physgen/core/parallel.hpp"

namespace physgen::metrics {

SightMask los_mask(const scene::OccupancyMask& mask, Vec2 source_px) {
  SightMask out;
  out.width = mask.width;
  out.height = mask.height;
  out.classes = scene::sight_grid(mask, source_px);
  return out;
}

double wmape_term(double pred, double truth) {
  if (truth == 0.0) return pred > 0.0 ? 100.0 : 0.0;
  return std::min(100.0, 100.0 * std::abs(pred - truth) / std::abs(truth));
}

SoundMetrics sound_report(const Image& pred, const Image& truth, const SightMask& sight) {
  if (pred.width != truth.width || pred.height != truth.height || pred.channels != 1 || truth.channels != 1)
    throw ValidationError("sound_report: rasters must be single-channel and of equal shape");
  if (sight.width != truth.width || sight.height != truth.height)
    throw ValidationError("sound_report: sight mask does not match the raster");
  double abs_sum[2] = {0, 0}, pct_sum[2] = {0, 0};
  std::size_t count[2] = {0, 0};
  for (int y = 0; y < truth.height; ++y) {
    for (int x = 0; x < truth.width; ++x) {
      const scene::SightClass c = sight.at(x, y);
      if (c == scene::SightClass::kBuilding) continue;
      const int k = c == scene::SightClass::kLoS ? 0 : 1;
      const double p = pred.at(x, y), t = truth.at(x, y);
      abs_sum[k] += std::abs(p - t);
      pct_sum[k] += wmape_term(p, t);
      ++count[k];
    }
  }
  SoundMetrics m;
  m.count_los = count[0];
  m.count_nlos = count[1];
  if (count[0]) {
    m.mae_los = abs_sum[0] / count[0];
    m.wmape_los = pct_sum[0] / count[0];
  }
  if (count[1]) {
    m.mae_nlos = abs_sum[1] / count[1];
    m.wmape_nlos = pct_sum[1] / count[1];
  }
  return m;
}

LandmarkMetrics landmark_report(const lens::LandmarkSet& pred, const lens::LandmarkSet& truth) {
  if (pred.points.size() != truth.points.size())
    throw ValidationError("landmark_report: " + std::to_string(pred.points.size()) + " predicted vs " +
                          std::to_string(truth.points.size()) + " true landmarks");
  LandmarkMetrics m;
  const std::size_t n = truth.points.size();
  if (n == 0) return m;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 d = pred.points[i] - truth.points[i];
    m.x_err += std::abs(d.x);
    m.y_err += std::abs(d.y);
    sq += squared_norm(d);
  }
  m.x_err /= n;
  m.y_err /= n;
  m.combined_err = std::sqrt(sq / n);
  m.xy_shift = std::abs(m.x_err - m.y_err);
  return m;
}

double angle_difference_deg(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

BallMetrics ball_report(const Image& pred_img, const ball::BallState& truth_state, const ball::BallSimConfig& cfg,
                        const std::optional<ball::BallState>& input_state) {
  const ball::BallDetection det = ball::detect_ball(pred_img, cfg);
  BallMetrics m;
  m.ball_count = det.ball_count;
  m.start_checked = input_state.has_value();
  m.ground_checked = cfg.mode == ball::Mode::kRolling;
  if (det.ground_angle_deg) m.slope_err = std::abs(*det.ground_angle_deg - cfg.slope_beta * 180.0 / std::numbers::pi);
  if (!det.position_valid) return m;
  const Vec2 c = ball::world_to_pixel(truth_state.pos, cfg);
  m.pos_x = std::abs(det.center_px.x - c.x);
  m.pos_y = std::abs(det.center_px.y - c.y);
  if (!det.radius_samples.empty()) m.roundness_std = det.roundness;
  if (det.angle_deg) m.rotation_deg = angle_difference_deg(*det.angle_deg, truth_state.phi * 180.0 / std::numbers::pi);
  if (input_state)
    m.behind_start = det.center_px.x < ball::world_to_pixel(input_state->pos, cfg).x - kBehindTolerancePx;
  if (cfg.mode == ball::Mode::kRolling && det.ground_gap_px)
    m.off_ground = std::abs(*det.ground_gap_px) > kGroundGapTolerancePx;
  return m;
}

BenchResult runtime_bench(const std::function<void(std::size_t)>& fn, std::size_t n, unsigned workers) {
  if (n < 10) throw ValidationError("runtime_bench needs n >= 10, got " + std::to_string(n));
  if (workers == 0) workers = 1;
  using clock = std::chrono::steady_clock;
  for (std::size_t i = 0; i < 3; ++i) fn(i);
  BenchResult r;
  r.n = n;
  r.workers = workers;
  std::vector<double> ms(n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto t0 = clock::now();
      fn(i);
      ms[i] = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    }
    r.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / n;
    double var = 0.0;
    for (double v : ms) var += (v - r.mean_ms) * (v - r.mean_ms);
    r.std_ms = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return r;
  }
  // Throughput: per-sample wall time of the whole pool, and the spread of
  // individual call durations.
  const auto t0 = clock::now();
  parallel_for(n, workers, [&](std::size_t i) {
    const auto s = clock::now();
    fn(i);
    ms[i] = std::chrono::duration<double, std::milli>(clock::now() - s).count();
  });
  r.mean_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count() / n;
  const double call_mean = std::accumulate(ms.begin(), ms.end(), 0.0) / n;
  double var = 0.0;
  for (double v : ms) var += (v - call_mean) * (v - call_mean);
  r.std_ms = std::sqrt(var / (n - 1));
  return r;
}

SampleMetrics to_sample(const std::string& id, const SoundMetrics& m) {
  return {id, {{"mae_los", m.mae_los}, {"mae_nlos", m.mae_nlos}, {"wmape_los", m.wmape_los}, {"wmape_nlos", m.wmape_nlos}}};
}

SampleMetrics to_sample(const std::string& id, const LandmarkMetrics& m) {
  return {id, {{"x_err", m.x_err}, {"y_err", m.y_err}, {"combined_err", m.combined_err}, {"xy_shift", m.xy_shift}}};
}

SampleMetrics to_sample(const std::string& id, const BallMetrics& m) {
  auto flag = [](const std::optional<bool>& b) -> std::optional<double> {
    if (!b) return std::nullopt;
    return *b ? 1.0 : 0.0;
  };
  SampleMetrics s{id, {}};
  s.values["ball_count"] = m.ball_count;
  s.values["balls_zero"] = m.ball_count == 0 ? 1.0 : 0.0;
  s.values["balls_multiple"] = m.ball_count > 1 ? 1.0 : 0.0;
  s.values["pos_x"] = m.pos_x;
  s.values["pos_y"] = m.pos_y;
  s.values["rotation_deg"] = m.rotation_deg;
  s.values["roundness_std"] = m.roundness_std;
  s.values["slope_err"] = m.slope_err;
  if (m.start_checked) s.values["behind_start"] = flag(m.behind_start);
  if (m.ground_checked) s.values["off_ground"] = flag(m.off_ground);
  return s;
}

}  // namespace physgen::metrics
