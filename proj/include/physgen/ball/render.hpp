#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "physgen/ball/sim.hpp"
#include "physgen/core/image.hpp"

namespace physgen::ball {

/// Fixed half-disk colors. The red half lies on the side of the dividing
/// diameter given by (-sin phi, cos phi) in image coordinates (y down).
inline constexpr std::array<std::uint8_t, 3> kRedHalf{255, 0, 0};
inline constexpr std::array<std::uint8_t, 3> kBlueHalf{0, 0, 255};

/// Continuous pixel coordinates of a world point; pixel (u, v) covers
/// [u, u+1) x [v, v+1).
Vec2 world_to_pixel(Vec2 world, const BallSimConfig& cfg);
Vec2 pixel_to_world(Vec2 px, const BallSimConfig& cfg);

/// True iff the whole disk lies inside the frame.
bool ball_in_frame(const BallState& state, const BallSimConfig& cfg);

struct RenderedFrame {
  Image image;
  bool ball_in_frame = true;
};

/// Deterministic per (state, cfg). Background colors all satisfy
/// r + b = 2 g, so (r + b - 2 g) / 255 equals the ball coverage of a pixel.
/// Sky colors have r < b, ground colors r > b; the ground line is a black
/// band of half-width 1 px and nothing else in the frame is near black.
RenderedFrame render_frame(const BallState& state, const BallSimConfig& cfg);

struct BallDetection {
  int ball_count = 0;
  bool position_valid = false;
  Vec2 center_px;
  std::vector<double> radius_samples;
  double radius_mean = 0.0;
  double roundness = 0.0;  // RMS deviation of the radius samples from radius_px
  std::optional<double> angle_deg;         // [0, 360)
  std::optional<double> ground_angle_deg;  // descending to the right is positive
  std::optional<double> ground_gap_px;     // center-to-line distance minus radius_px
};

BallDetection detect_ball(const Image& img, const BallSimConfig& cfg);

/// Coverage estimate used by the detector, clamped to [0, 1].
double ball_coverage(const Image& img, int x, int y);

}  // namespace physgen::ball
