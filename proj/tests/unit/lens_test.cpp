#include <doctest.h>

#include <cmath>
#include <numeric>

#include "physgen/core/rng.hpp"
#include "physgen/lens/lens.hpp"

using namespace physgen;
using namespace physgen::lens;

namespace {

LensParams random_tangential(Rng& rng, double bound = 0.05) {
  LensParams p = LensParams::for_image(256, 256);
  p.p1 = rng.uniform(-bound, bound);
  p.p2 = rng.uniform(-bound, bound);
  return p;
}

Image checkerboard(int n, int square) {
  Image img(n, n, 1);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) img.at(x, y) = ((x / square + y / square) % 2) ? 255 : 0;
  return img;
}

void splat(Image& img, Vec2 c, double sigma) {
  for (int y = static_cast<int>(c.y) - 6; y <= static_cast<int>(c.y) + 6; ++y)
    for (int x = static_cast<int>(c.x) - 6; x <= static_cast<int>(c.x) + 6; ++x) {
      if (!img.in_bounds(x, y)) continue;
      const double d2 = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
      const double v = 255.0 * std::exp(-d2 / (2 * sigma * sigma));
      img.at(x, y) = static_cast<std::uint8_t>(std::max<double>(img.at(x, y), std::round(v)));
    }
}

// intensity-weighted centroids of 4-connected components above `thr`
std::vector<Vec2> blob_centroids(const Image& img, int thr) {
  std::vector<int> label(img.data.size(), -1);
  std::vector<Vec2> out;
  for (int y0 = 0; y0 < img.height; ++y0)
    for (int x0 = 0; x0 < img.width; ++x0) {
      if (img.at(x0, y0) <= thr || label[img.index(x0, y0)] >= 0) continue;
      const int id = static_cast<int>(out.size());
      std::vector<std::pair<int, int>> stack{{x0, y0}};
      label[img.index(x0, y0)] = id;
      double sw = 0, sx = 0, sy = 0;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        const double w = img.at(x, y);
        sw += w;
        sx += w * x;
        sy += w * y;
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const int nx = x + dx, ny = y + dy;
          if (!img.in_bounds(nx, ny) || img.at(nx, ny) <= thr || label[img.index(nx, ny)] >= 0) continue;
          label[img.index(nx, ny)] = id;
          stack.push_back({nx, ny});
        }
      }
      out.push_back({sx / sw, sy / sw});
    }
  return out;
}

}  // namespace

TEST_CASE("zero coefficients are exact identities") {
  const LensParams p = LensParams::for_image(256, 256);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec2 q{rng.uniform(0, 255), rng.uniform(0, 255)};
    CHECK(distort_point_full(q, p) == q);
    CHECK(distort_point_tangential(q, 0, 0, p.intrinsics()) == q);
    const Inversion inv = invert_distortion_detailed(q, p);
    CHECK(inv.point == q);
    CHECK(inv.iterations == 1);
  }
  Image img(64, 48, 3);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  CHECK(distort_image(img, LensParams::for_image(64, 48)) == img);
  LandmarkSet lm{{{1.5, 2.25}, {30, 40}}, 64, 48};
  CHECK(transform_landmarks(lm, LensParams::for_image(64, 48)).points == lm.points);
}

TEST_CASE("principal point is fixed for every coefficient setting") {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    LensParams p = LensParams::for_image(256, 200);
    p.k1 = rng.uniform(-1, 1);
    p.k2 = rng.uniform(-1, 1);
    p.k3 = rng.uniform(-1, 1);
    p.p1 = rng.uniform(-0.1, 0.1);
    p.p2 = rng.uniform(-0.1, 0.1);
    const Vec2 c{p.cx, p.cy};
    CHECK(distort_point_full(c, p) == c);
    CHECK(distort_point_tangential(c, p.p1, p.p2, p.intrinsics()) == c);
    CHECK(invert_distortion(c, p) == c);
  }
}

TEST_CASE("tangential substitution example") {
  LensParams p;
  p.p1 = 0.01;
  const Vec2 d = distort_normalized({0.5, 0.5}, p);
  CHECK(d.x == doctest::Approx(0.505).epsilon(1e-15));
  CHECK(d.y == doctest::Approx(0.51).epsilon(1e-15));
  const Vec2 t = tangential_p1_only({0.5, 0.5}, 0.01);
  CHECK(t.x == doctest::Approx(0.505).epsilon(1e-15));
  CHECK(t.y == doctest::Approx(0.51).epsilon(1e-15));
}

TEST_CASE("axis coupling of the single-coefficient forms") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(-1, 1), y = rng.uniform(-1, 1), c = rng.uniform(-0.1, 0.1);
    const Vec2 a = tangential_p1_only({x, 0.0}, c);
    CHECK(a.x == x);
    CHECK(a.y == doctest::Approx(c * x * x).epsilon(1e-14));
    const Vec2 b = tangential_p2_only({0.0, y}, c);
    CHECK(b.y == y);
  }
}

TEST_CASE("single-coefficient forms agree with the full model at zero radial terms") {
  Rng rng(4);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec2 n{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const double c = rng.uniform(-0.1, 0.1);
    LensParams a;
    a.p1 = c;
    LensParams b;
    b.p2 = c;
    worst = std::max(worst, norm(tangential_p1_only(n, c) - distort_normalized(n, a)));
    worst = std::max(worst, norm(tangential_p2_only(n, c) - distort_normalized(n, b)));
    LensParams both;
    both.p1 = rng.uniform(-0.1, 0.1);
    both.p2 = rng.uniform(-0.1, 0.1);
    both.fx = both.fy = 1;
    worst = std::max(worst, norm(distort_point_tangential(n, both.p1, both.p2, both.intrinsics()) -
                                 distort_point_full(n, both)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("invert_distortion round trips") {
  Rng rng(5);
  double worst_fwd = 0, worst_back = 0;
  for (int i = 0; i < 1000; ++i) {
    LensParams p = random_tangential(rng);
    const Vec2 x{rng.uniform(0, 255), rng.uniform(0, 255)};
    const Vec2 back = invert_distortion(distort_point_full(x, p), p);
    worst_back = std::max(worst_back, norm(to_normalized(back, p.intrinsics()) - to_normalized(x, p.intrinsics())));
    const Vec2 fwd = distort_point_full(invert_distortion(x, p), p);
    worst_fwd = std::max(worst_fwd, norm(to_normalized(fwd, p.intrinsics()) - to_normalized(x, p.intrinsics())));
  }
  CHECK(worst_back <= 1e-9);
  CHECK(worst_fwd <= 1e-12);
}

TEST_CASE("invert_distortion reports divergence") {
  LensParams p = LensParams::for_image(256, 256);
  p.p1 = 10;
  try {
    invert_distortion({250, 10}, p);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.residual() > 1e-12);
  }
  LandmarkSet lm{{{128, 128}, {250, 10}}, 256, 256};
  try {
    transform_landmarks(lm, p);
    FAIL("expected divergence");
  } catch (const LandmarkDivergenceError& e) {
    CHECK(e.landmark_index() == 1);
  }
}

TEST_CASE("distort_image: p2 displaces horizontal edges antisymmetrically about the principal axis") {
  const Image board = checkerboard(256, 64);
  LensParams p = LensParams::for_image(256, 256);
  p.p2 = 0.02;
  const Image out = distort_image(board, p);
  // sub-pixel row where the column profile crosses mid-gray near a given edge
  auto edge_row = [&](int x, double y_edge) {
    for (int y = static_cast<int>(y_edge) - 8; y < static_cast<int>(y_edge) + 8; ++y) {
      const double a = out.at(x, y) - 127.5, b = out.at(x, y + 1) - 127.5;
      if ((a < 0) != (b < 0)) return y + a / (a - b);
    }
    return std::nan("");
  };
  double biggest = 0;
  int pairs = 0;
  for (double ye : {63.5, 191.5}) {
    for (int a : {8, 20, 30, 40, 90, 100}) {
      const double dl = edge_row(128 - a, ye) - ye, dr = edge_row(128 + a, ye) - ye;
      REQUIRE(std::isfinite(dl));
      REQUIRE(std::isfinite(dr));
      CHECK(std::abs(dl + dr) < 0.1);
      biggest = std::max(biggest, std::abs(dl));
      ++pairs;
    }
  }
  CHECK(biggest > 0.8);
}

TEST_CASE("distort_image: a single marker lands at the inverse-mapped position") {
  Rng rng(6);
  for (int i = 0; i < 40; ++i) {
    const LensParams p = random_tangential(rng);
    Image img(256, 256, 1);
    const int mx = rng.uniform_int(40, 215), my = rng.uniform_int(40, 215);
    img.at(mx, my) = 255;
    const Image out = distort_image(img, p);
    double sw = 0, sx = 0, sy = 0;
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x) {
        sw += out.at(x, y);
        sx += out.at(x, y) * x;
        sy += out.at(x, y) * y;
      }
    REQUIRE(sw > 0);
    const Vec2 want = invert_distortion({double(mx), double(my)}, p);
    CHECK(distance({sx / sw, sy / sw}, want) < 0.75);
  }
}

TEST_CASE("transform_landmarks agrees with dots found in the distorted image") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const LensParams p = random_tangential(rng);
    Image img(256, 256, 1);
    LandmarkSet grid{{}, 256, 256};
    for (int j = 1; j <= 7; ++j)
      for (int i = 1; i <= 7; ++i) {
        grid.points.push_back({i * 32.0 + 0.3, j * 32.0 - 0.2});
        splat(img, grid.points.back(), 1.6);
      }
    const Image out = distort_image(img, p);
    const auto blobs = blob_centroids(out, 30);
    const LandmarkSet moved = transform_landmarks(grid, p);
    double total = 0;
    for (const Vec2& q : moved.points) {
      double best = 1e9;
      for (const Vec2& b : blobs) best = std::min(best, distance(q, b));
      total += best;
    }
    CHECK(total / moved.points.size() < 0.5);
    CHECK(blobs.size() == moved.points.size());
  }
}

TEST_CASE("landmark CSV and params JSON round trip") {
  LandmarkSet lm{{{1.0 / 3.0, 2.5}, {100.125, 7e-5}}, 256, 256};
  const LandmarkSet back = landmarks_from_csv(landmarks_to_csv(lm), 256, 256);
  CHECK(back.points == lm.points);
  CHECK_THROWS_AS(landmarks_from_csv("index,x,y\n0,1\n"), ValidationError);
  CHECK_THROWS_AS(landmarks_from_csv("index,x,y\n1,1,2\n"), ValidationError);
  LensParams p = LensParams::for_image(256, 256);
  p.p1 = 0.0123456789012345;
  p.k2 = -1e-7;
  const LensParams q = params_from_json(params_to_json(p));
  CHECK(q.p1 == p.p1);
  CHECK(q.k2 == p.k2);
  CHECK(q.cx == 128);
  CHECK_THROWS_AS(params_from_json("{\"fx\": -1, \"fy\": 1, \"cx\": 0, \"cy\": 0}"), ValidationError);
  CHECK_THROWS_AS(params_from_json("{"), ValidationError);
}
