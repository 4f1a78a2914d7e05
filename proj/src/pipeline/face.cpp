#include <algorithm>
#include <cmath>
#include <numbers>

#include "physgen/core/rng.hpp"
#include "physgen/pipeline/pipeline.hpp"

namespace physgen::pipeline {

namespace {

// 68-point layout in face units: x right, y down, origin between the eyes'
// row and the nose tip, face half width about 1.
std::vector<Vec2> face_template() {
  std::vector<Vec2> p;
  const double pi = std::numbers::pi;
  for (int k = 0; k <= 16; ++k) p.push_back({-0.95 * std::cos(pi * k / 16), 0.1 + 1.15 * std::sin(pi * k / 16)});
  for (int side : {-1, 1}) {
    for (int k = 0; k < 5; ++k) {
      const double u = side < 0 ? 1.0 - k / 4.0 : k / 4.0;  // left to right
      const double x = side * (0.2 + 0.55 * u);
      p.push_back({x, -0.45 - 0.1 * std::sin(pi * u)});
    }
  }
  for (int k = 0; k < 4; ++k) p.push_back({0.0, -0.3 + 0.18 * k});
  for (int k = 0; k < 5; ++k) p.push_back({-0.25 + 0.125 * k, 0.38 + 0.05 * std::sin(pi * k / 4)});
  for (double cx : {-0.45, 0.45}) {
    const double a = 0.2, b = 0.08;
    const double angles[6] = {180, 120, 60, 0, -60, -120};
    for (double deg : angles) {
      const double t = deg * pi / 180;
      p.push_back({cx + a * std::cos(t), -0.22 - b * std::sin(t)});
    }
  }
  for (int k = 0; k < 12; ++k) {
    const double t = pi - 2 * pi * k / 12;
    p.push_back({0.42 * std::cos(t), 0.75 - 0.17 * std::sin(t)});
  }
  for (int k = 0; k < 8; ++k) {
    const double t = pi - 2 * pi * k / 8;
    p.push_back({0.28 * std::cos(t), 0.75 - 0.07 * std::sin(t)});
  }
  return p;
}

constexpr double kDotSigma = 1.2;

}  // namespace

FaceSample synthetic_face(std::uint64_t seed, int size) {
  if (size < 64) throw ValidationError("face image size must be at least 64");
  Rng rng(derive_seed(seed, 0xface));
  const double unit = size / 256.0;
  const Vec2 center{size / 2.0 + rng.uniform(-8, 8) * unit, size * 0.47 + rng.uniform(-8, 8) * unit};
  const double scale = rng.uniform(60, 75) * unit;
  const double rot = rng.uniform(-10, 10) * std::numbers::pi / 180;
  const double cr = std::cos(rot), sr = std::sin(rot);
  auto place = [&](Vec2 q) { return center + Vec2{cr * q.x - sr * q.y, sr * q.x + cr * q.y} * scale; };

  FaceSample out;
  out.landmarks.width = out.landmarks.height = size;
  for (const Vec2& q : face_template())
    out.landmarks.points.push_back(place(q + Vec2{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)}));

  const double bg0[3] = {rng.uniform(40, 110), rng.uniform(40, 110), rng.uniform(60, 140)};
  const double skin[3] = {rng.uniform(190, 235), rng.uniform(150, 190), rng.uniform(120, 160)};
  out.image = Image(size, size, 3);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      // head ellipse in face units, pixel centers at integer coordinates
      const Vec2 d = Vec2{double(x), double(y)} - center;
      const Vec2 q{(cr * d.x + sr * d.y) / scale, (-sr * d.x + cr * d.y) / scale};
      const double e = (q.x / 1.05) * (q.x / 1.05) + ((q.y - 0.2) / 1.3) * ((q.y - 0.2) / 1.3);
      const double inside = std::clamp((1.0 - e) * scale / 2.0 + 0.5, 0.0, 1.0);
      const double shade = 1.0 - 0.12 * std::clamp(e, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double bg = bg0[c] * (0.8 + 0.4 * y / size);
        out.image.at(x, y, c) = static_cast<std::uint8_t>(std::lround(inside * skin[c] * shade + (1 - inside) * bg));
      }
    }
  }
  for (const Vec2& p : out.landmarks.points) {
    const int r = static_cast<int>(std::ceil(4 * kDotSigma));
    for (int y = static_cast<int>(std::round(p.y)) - r; y <= static_cast<int>(std::round(p.y)) + r; ++y) {
      for (int x = static_cast<int>(std::round(p.x)) - r; x <= static_cast<int>(std::round(p.x)) + r; ++x) {
        if (!out.image.in_bounds(x, y)) continue;
        const double d2 = (x - p.x) * (x - p.x) + (y - p.y) * (y - p.y);
        const double k = 1.0 - 0.85 * std::exp(-d2 / (2 * kDotSigma * kDotSigma));
        for (int c = 0; c < 3; ++c)
          out.image.at(x, y, c) = static_cast<std::uint8_t>(std::lround(out.image.at(x, y, c) * k));
      }
    }
  }
  return out;
}

std::optional<lens::LandmarkSet> locate_landmarks(const Image& img, const lens::LandmarkSet& guess, double radius) {
  if (img.empty()) return std::nullopt;
  auto lum = [&](int x, int y) {
    double s = 0.0;
    for (int c = 0; c < img.channels; ++c) s += img.at(x, y, c);
    return s / img.channels;
  };
  lens::LandmarkSet out = guess;
  const int r = static_cast<int>(std::ceil(radius));
  for (Vec2& p : out.points) {
    const int cx = static_cast<int>(std::round(p.x)), cy = static_cast<int>(std::round(p.y));
    double bright = 0.0;
    for (int y = cy - r - 2; y <= cy + r + 2; ++y)
      for (int x = cx - r - 2; x <= cx + r + 2; ++x)
        if (img.in_bounds(x, y)) bright = std::max(bright, lum(x, y));
    double sw = 0, sx = 0, sy = 0;
    for (int y = cy - r; y <= cy + r; ++y) {
      for (int x = cx - r; x <= cx + r; ++x) {
        if (!img.in_bounds(x, y) || std::hypot(x - p.x, y - p.y) > radius) continue;
        const double w = std::max(0.0, 0.5 * bright - lum(x, y));
        sw += w;
        sx += w * x;
        sy += w * y;
      }
    }
    if (sw <= 0.0) return std::nullopt;
    p = {sx / sw, sy / sw};
  }
  return out;
}

}  // namespace physgen::pipeline
