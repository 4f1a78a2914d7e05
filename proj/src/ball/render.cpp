#include "physgen/ball/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "physgen/core/rng.hpp"

namespace physgen::ball {

namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr int kSuper = 8;
constexpr int kLinesPerRegion = 12;

// r + b = 2 g with |r - b| >= 40; sky has b > r, ground r > b.
Rgb region_color(Rng& rng, bool ground) {
  const int g = static_cast<int>(rng.uniform_int(60, 195));
  const int half = static_cast<int>(rng.uniform_int(20, std::min(g, 235 - g)));
  const int r = ground ? g + half : g - half;
  const int b = ground ? g - half : g + half;
  return {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
}

struct Line {
  Segment seg;
  double half_width;
  Rgb color;
};

// Signed distance (pixels) from the ground line; positive below it.
double below_ground(Vec2 p, const BallSimConfig& cfg) {
  const double sb = std::sin(cfg.slope_beta), cb = std::cos(cfg.slope_beta);
  const Vec2 d = p - cfg.ground_anchor_px;
  return -d.x * sb + d.y * cb;
}

void put(Image& img, int x, int y, const Rgb& c) {
  for (int k = 0; k < 3; ++k) img.at(x, y, k) = c[k];
}

}  // namespace

Vec2 world_to_pixel(Vec2 w, const BallSimConfig& cfg) {
  return {cfg.ground_anchor_px.x + w.x / cfg.scale, cfg.ground_anchor_px.y - w.y / cfg.scale};
}

Vec2 pixel_to_world(Vec2 px, const BallSimConfig& cfg) {
  return {(px.x - cfg.ground_anchor_px.x) * cfg.scale, (cfg.ground_anchor_px.y - px.y) * cfg.scale};
}

bool ball_in_frame(const BallState& state, const BallSimConfig& cfg) {
  const Vec2 c = world_to_pixel(state.pos, cfg);
  const double r = cfg.radius_px, n = cfg.frame_size;
  return c.x - r >= 0.0 && c.y - r >= 0.0 && c.x + r <= n && c.y + r <= n;
}

RenderedFrame render_frame(const BallState& state, const BallSimConfig& cfg) {
  const int n = cfg.frame_size;
  if (n <= 0) throw ValidationError("frame_size must be positive");
  Rng rng(derive_seed(cfg.background_seed, 0xba11));
  const Rgb sky = region_color(rng, false), ground = region_color(rng, true);
  std::vector<Line> sky_lines, ground_lines;
  for (int region = 0; region < 2; ++region) {
    auto& lines = region == 0 ? sky_lines : ground_lines;
    for (int i = 0; i < kLinesPerRegion; ++i) {
      Line l;
      l.seg.a = {rng.uniform(0, n), rng.uniform(0, n)};
      l.seg.b = {rng.uniform(0, n), rng.uniform(0, n)};
      l.half_width = 0.5 * static_cast<double>(rng.uniform_int(1, 3));
      l.color = region_color(rng, region == 1);
      lines.push_back(l);
    }
  }

  RenderedFrame out;
  out.image = Image(n, n, 3);
  Image& img = out.image;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const Vec2 p{x + 0.5, y + 0.5};
      const double d = below_ground(p, cfg);
      if (std::abs(d) <= 1.0) {
        put(img, x, y, {0, 0, 0});
        continue;
      }
      const bool is_ground = d > 0.0;
      Rgb c = is_ground ? ground : sky;
      for (const Line& l : is_ground ? ground_lines : sky_lines)
        if (point_segment_distance(p, l.seg) <= l.half_width) c = l.color;
      put(img, x, y, c);
    }
  }

  out.ball_in_frame = ball_in_frame(state, cfg);
  const Vec2 c = world_to_pixel(state.pos, cfg);
  const double R = cfg.radius_px;
  if (!std::isfinite(c.x) || !std::isfinite(c.y)) return out;
  const Vec2 side{-std::sin(state.phi), std::cos(state.phi)};
  const int x0 = std::max(0, static_cast<int>(std::floor(c.x - R - 1)));
  const int x1 = std::min(n - 1, static_cast<int>(std::ceil(c.x + R + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(c.y - R - 1)));
  const int y1 = std::min(n - 1, static_cast<int>(std::ceil(c.y + R + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      int red = 0, blue = 0;
      for (int j = 0; j < kSuper; ++j) {
        for (int i = 0; i < kSuper; ++i) {
          const Vec2 q = Vec2{x + (i + 0.5) / kSuper, y + (j + 0.5) / kSuper} - c;
          if (squared_norm(q) > R * R) continue;
          (dot(q, side) >= 0.0 ? red : blue) += 1;
        }
      }
      if (red + blue == 0) continue;
      constexpr int total = kSuper * kSuper;
      const int bg = total - red - blue;
      double ideal[3];
      for (int k = 0; k < 3; ++k)
        ideal[k] = (red * kRedHalf[k] + blue * kBlueHalf[k] + bg * double(img.at(x, y, k))) / total;
      // Round r and g, then pick b so that r + b - 2 g is exactly the
      // rounded coverage; keeps the detector independent of the background.
      int r = static_cast<int>(std::lround(ideal[0]));
      const int g = static_cast<int>(std::lround(ideal[1]));
      const int f = static_cast<int>(std::lround(255.0 * (red + blue) / total));
      int b = f + 2 * g - r;
      // rounding can push b one step out of range next to saturated blue
      // or black; move the excess into r
      if (b > 255) {
        r += b - 255;
        b = 255;
      } else if (b < 0) {
        r += b;
        b = 0;
      }
      r = std::clamp(r, 0, 255);
      put(img, x, y, {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)});
    }
  }
  return out;
}

double ball_coverage(const Image& img, int x, int y) {
  if (img.channels < 3) return 0.0;
  const int f = int(img.at(x, y, 0)) + int(img.at(x, y, 2)) - 2 * int(img.at(x, y, 1));
  return std::clamp(f / 255.0, 0.0, 1.0);
}

namespace {

struct Component {
  std::vector<int> pixels;
};

std::vector<Component> components(const std::vector<double>& alpha, int w, int h) {
  std::vector<int> label(alpha.size(), -1);
  std::vector<Component> out;
  std::vector<int> stack;
  for (int start = 0; start < w * h; ++start) {
    if (alpha[start] <= 0.5 || label[start] >= 0) continue;
    Component comp;
    label[start] = static_cast<int>(out.size());
    stack.push_back(start);
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      comp.pixels.push_back(i);
      const int x = i % w, y = i / w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          const int j = ny * w + nx;
          if (alpha[j] > 0.5 && label[j] < 0) {
            label[j] = label[start];
            stack.push_back(j);
          }
        }
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

double bilinear(const std::vector<double>& a, int w, int h, Vec2 p) {
  const double fx = p.x - 0.5, fy = p.y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx)), y0 = static_cast<int>(std::floor(fy));
  const double tx = fx - x0, ty = fy - y0;
  auto at = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return a[static_cast<std::size_t>(y) * w + x];
  };
  return (1 - ty) * ((1 - tx) * at(x0, y0) + tx * at(x0 + 1, y0)) + ty * ((1 - tx) * at(x0, y0 + 1) + tx * at(x0 + 1, y0 + 1));
}

// Least-squares line v = a + b u through the per-column mean rows of black
// pixels, with one round of outlier rejection.
std::optional<std::pair<double, double>> fit_ground(const Image& img, const std::vector<double>& alpha) {
  std::vector<Vec2> pts;
  for (int x = 0; x < img.width; ++x) {
    double sum = 0.0;
    int cnt = 0;
    for (int y = 0; y < img.height; ++y) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      if (alpha[i] >= 0.1) continue;
      if (std::max({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)}) < 40) {
        sum += y + 0.5;
        ++cnt;
      }
    }
    if (cnt >= 1 && cnt <= 5) pts.push_back({x + 0.5, sum / cnt});
  }
  std::optional<std::pair<double, double>> fit;
  for (int round = 0; round < 2; ++round) {
    if (pts.size() < 20) return std::nullopt;
    double su = 0, sv = 0, suu = 0, suv = 0;
    for (const Vec2& p : pts) {
      su += p.x;
      sv += p.y;
      suu += p.x * p.x;
      suv += p.x * p.y;
    }
    const double k = static_cast<double>(pts.size());
    const double den = k * suu - su * su;
    if (den == 0.0) return std::nullopt;
    const double b = (k * suv - su * sv) / den;
    const double a = (sv - b * su) / k;
    fit = std::pair{a, b};
    std::erase_if(pts, [&](const Vec2& p) { return std::abs(p.y - (a + b * p.x)) > 1.5; });
  }
  return fit;
}

}  // namespace

BallDetection detect_ball(const Image& img, const BallSimConfig& cfg) {
  BallDetection det;
  if (img.empty() || img.channels < 3) return det;
  const int w = img.width, h = img.height;
  std::vector<double> alpha(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) alpha[static_cast<std::size_t>(y) * w + x] = ball_coverage(img, x, y);

  const auto line = fit_ground(img, alpha);
  if (line) det.ground_angle_deg = std::atan(line->second) * 180.0 / std::numbers::pi;

  const double R = cfg.radius_px;
  std::vector<Component> comps = components(alpha, w, h);
  std::erase_if(comps, [](const Component& c) { return c.pixels.size() < 20; });
  det.ball_count = static_cast<int>(comps.size());
  if (det.ball_count != 1) return det;

  // Coverage-weighted centroid over the component grown by two pixels.
  int bx0 = w, by0 = h, bx1 = -1, by1 = -1;
  for (int i : comps[0].pixels) {
    bx0 = std::min(bx0, i % w);
    bx1 = std::max(bx1, i % w);
    by0 = std::min(by0, i / w);
    by1 = std::max(by1, i / w);
  }
  bx0 = std::max(0, bx0 - 2);
  by0 = std::max(0, by0 - 2);
  bx1 = std::min(w - 1, bx1 + 2);
  by1 = std::min(h - 1, by1 + 2);
  double sa = 0, sx = 0, sy = 0;
  for (int y = by0; y <= by1; ++y) {
    for (int x = bx0; x <= bx1; ++x) {
      const double a = alpha[static_cast<std::size_t>(y) * w + x];
      sa += a;
      sx += a * (x + 0.5);
      sy += a * (y + 0.5);
    }
  }
  if (sa <= 0.0) return det;
  const Vec2 c{sx / sa, sy / sa};
  det.center_px = c;
  det.position_valid = true;

  // Radius: walk each ray outward to the 0.5 coverage crossing.
  constexpr int kRays = 72;
  constexpr double kStep = 0.25;
  double sq = 0.0, sum = 0.0;
  for (int k = 0; k < kRays; ++k) {
    const double th = 2.0 * std::numbers::pi * k / kRays;
    const Vec2 dir{std::cos(th), std::sin(th)};
    double prev = 0.0;
    double found = -1.0;
    for (double t = kStep; t <= 3.0 * R; t += kStep) {
      if (bilinear(alpha, w, h, c + dir * t) < 0.5) {
        double lo = prev, hi = t;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (bilinear(alpha, w, h, c + dir * mid) >= 0.5 ? lo : hi) = mid;
        }
        found = 0.5 * (lo + hi);
        break;
      }
      prev = t;
    }
    if (found < 0.0) continue;
    det.radius_samples.push_back(found);
    sum += found;
    sq += (found - R) * (found - R);
  }
  if (!det.radius_samples.empty()) {
    const double m = static_cast<double>(det.radius_samples.size());
    det.radius_mean = sum / m;
    det.roundness = std::sqrt(sq / m);
  }

  // Rotation: first moment of (r - b) over fully covered interior pixels.
  double mx = 0.0, my = 0.0;
  // soft 2 px window edge so the pixel grid does not bias the direction
  const double inner = std::max(1.0, det.radius_mean - 3.0);
  for (int y = by0; y <= by1; ++y) {
    for (int x = bx0; x <= bx1; ++x) {
      const Vec2 p{x + 0.5, y + 0.5};
      const double wgt = std::clamp((inner - distance(p, c)) / 2.0 + 0.5, 0.0, 1.0);
      if (wgt == 0.0 || alpha[static_cast<std::size_t>(y) * w + x] < 0.98) continue;
      const double gval = wgt * (int(img.at(x, y, 0)) - int(img.at(x, y, 2))) / 255.0;
      mx += gval * (p.x - c.x);
      my += gval * (p.y - c.y);
    }
  }
  if (std::hypot(mx, my) > 1e-6 * R * R * R) {
    double deg = std::atan2(-mx, my) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    det.angle_deg = deg;
  }

  if (line) {
    const auto [a, b] = *line;
    // distance from c to v = a + b u, ball above (smaller v) is positive
    det.ground_gap_px = (a + b * c.x - c.y) / std::sqrt(1.0 + b * b) - R;
  }
  return det;
}

}  // namespace physgen::ball
