#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "physgen/core/error.hpp"
#include "physgen/core/geometry.hpp"
#include "physgen/core/image.hpp"

namespace physgen::lens {

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// Brown-Conrady coefficients plus camera intrinsics.
struct LensParams {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  double p1 = 0.0, p2 = 0.0;
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;

  Intrinsics intrinsics() const { return {fx, fy, cx, cy}; }
  bool zero_coefficients() const { return k1 == 0.0 && k2 == 0.0 && k3 == 0.0 && p1 == 0.0 && p2 == 0.0; }

  /// fx = fy = width, principal point at the image center.
  static LensParams for_image(int width, int height);
};

/// Throws ValidationError unless fx, fy > 0 and everything is finite.
void validate(const LensParams& params);

Vec2 to_normalized(Vec2 px, const Intrinsics& k);
Vec2 to_pixels(Vec2 n, const Intrinsics& k);

/// Radial and tangential model in normalized coordinates:
///   x' = x (1 + k1 r^2 + k2 r^4 + k3 r^6) + 2 p1 x y + p2 (r^2 + 2 x^2)
///   y' = y (1 + k1 r^2 + k2 r^4 + k3 r^6) + p1 (r^2 + 2 y^2) + 2 p2 x y
Vec2 distort_normalized(Vec2 n, const LensParams& params);
Vec2 distort_point_full(Vec2 px, const LensParams& params);

/// Tangential-only forms in normalized coordinates.
Vec2 tangential_p1_only(Vec2 n, double p1);  // x' = x + 2 p1 x y,        y' = y + p1 (r^2 + 2 y^2)
Vec2 tangential_p2_only(Vec2 n, double p2);  // x' = x + p2 (r^2 + 2 x^2), y' = y + 2 p2 x y

/// Uses the single-coefficient form when one of p1, p2 is zero, the
/// combined tangential form otherwise.
Vec2 distort_point_tangential(Vec2 px, double p1, double p2, const Intrinsics& k);

class DivergenceError : public Error {
 public:
  DivergenceError(double residual, const std::string& what) : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

struct Inversion {
  Vec2 point;  // pixels
  int iterations = 0;
  double residual = 0.0;  // normalized units
};

inline constexpr int kMaxInversionIterations = 50;

/// Fixed-point iteration x <- (x_q - tangential(x)) / radial(x) until
/// |distort(x) - q| <= tol (normalized units). Throws DivergenceError after
/// kMaxInversionIterations.
Inversion invert_distortion_detailed(Vec2 q_px, const LensParams& params, double tol = 1e-12);
Vec2 invert_distortion(Vec2 q_px, const LensParams& params, double tol = 1e-12);

/// Output pixel o samples the input at distort_point_full(o) with bilinear
/// interpolation; pixel centers sit at integer coordinates and samples
/// outside [0, w-1] x [0, h-1] are black.
Image distort_image(const Image& img, const LensParams& params, unsigned workers = 1);

struct LandmarkSet {
  std::vector<Vec2> points;
  int width = 0;
  int height = 0;
};

class LandmarkDivergenceError : public DivergenceError {
 public:
  LandmarkDivergenceError(std::size_t index, double residual)
      : DivergenceError(residual, "landmark " + std::to_string(index) + " did not converge"), index_(index) {}
  std::size_t landmark_index() const { return index_; }

 private:
  std::size_t index_;
};

/// Moves each landmark to where distort_image places the feature under it.
LandmarkSet transform_landmarks(const LandmarkSet& lm, const LensParams& params, double tol = 1e-12);

/// CSV with header "index,x,y".
std::string landmarks_to_csv(const LandmarkSet& lm);
LandmarkSet landmarks_from_csv(const std::string& text, int width = 0, int height = 0);

std::string params_to_json(const LensParams& params);
LensParams params_from_json(const std::string& text);

}  // namespace physgen::lens
