#include <doctest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <thread>

#include <json.hpp>

#include "los_oracle.hpp"
#include "physgen/core/rng.hpp"
#include "physgen/metrics/metrics.hpp"

using namespace physgen;
using namespace physgen::metrics;

namespace {

scene::OccupancyMask empty_mask(int n) {
  scene::OccupancyMask m;
  m.width = m.height = n;
  m.meters_per_pixel = 1.0;
  m.cells.assign(static_cast<std::size_t>(n) * n, 0);
  return m;
}

SightMask random_sight(Rng& rng, int n) {
  SightMask s;
  s.width = s.height = n;
  for (int i = 0; i < n * n; ++i) s.classes.push_back(static_cast<scene::SightClass>(rng.uniform_int(0, 2)));
  return s;
}

Image random_gray(Rng& rng, int n, double zero_fraction) {
  Image img(n, n, 1);
  for (auto& v : img.data) v = rng.bernoulli(zero_fraction) ? 0 : static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return img;
}

}  // namespace

TEST_CASE("sight mask") {
  const scene::OccupancyMask open = empty_mask(32);
  const SightMask all = los_mask(open, {10.5, 7.5});
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(all.los(x, y));
  CHECK(all.los(10, 7));

  scene::OccupancyMask wall = empty_mask(64);
  for (int y = 20; y < 44; ++y) wall.cells[static_cast<std::size_t>(y) * 64 + 30] = 1;
  const Vec2 src{12.3, 31.7};
  const SightMask s = los_mask(wall, src);
  Rng rng(3);
  int shadowed = 0;
  for (int k = 0; k < 1000; ++k) {
    const int x = static_cast<int>(rng.uniform_int(0, 63)), y = static_cast<int>(rng.uniform_int(0, 63));
    if (wall.blocked(x, y)) {
      CHECK(s.at(x, y) == scene::SightClass::kBuilding);
      continue;
    }
    const bool ref = oracle::sampled_line_of_sight(wall, src, {x + 0.5, y + 0.5});
    CHECK(s.los(x, y) == ref);
    shadowed += !ref;
  }
  CHECK(shadowed > 100);
  CHECK_THROWS_AS(los_mask(wall, {30.5, 30.5}), ValidationError);
}

TEST_CASE("sound report basics") {
  Rng rng(11);
  const SightMask sight = random_sight(rng, 16);
  const Image t = random_gray(rng, 16, 0.2);
  const SoundMetrics same = sound_report(t, t, sight);
  CHECK(*same.mae_los == 0.0);
  CHECK(*same.mae_nlos == 0.0);
  CHECK(*same.wmape_los == 0.0);
  CHECK(*same.wmape_nlos == 0.0);

  const Image silent(16, 16, 1, 0), loud(16, 16, 1, 7);
  const SoundMetrics adv = sound_report(loud, silent, sight);
  CHECK(*adv.wmape_los == 100.0);
  CHECK(*adv.wmape_nlos == 100.0);
  CHECK(*adv.mae_los == 7.0);
  CHECK(*sound_report(silent, silent, sight).wmape_los == 0.0);

  // MAE is symmetric, wMAPE is not
  const Image p = random_gray(rng, 16, 0.2);
  CHECK(*sound_report(p, t, sight).mae_los == *sound_report(t, p, sight).mae_los);

  CHECK_THROWS_AS(sound_report(Image(8, 8, 1), t, sight), ValidationError);
  SightMask only_buildings = sight;
  std::fill(only_buildings.classes.begin(), only_buildings.classes.end(), scene::SightClass::kBuilding);
  CHECK_FALSE(sound_report(p, t, only_buildings).mae_los.has_value());
}

TEST_CASE("sound report matches a naive loop") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const SightMask sight = random_sight(rng, 16);
    const Image t = random_gray(rng, 16, 0.3), p = random_gray(rng, 16, 0.3);
    const SoundMetrics m = sound_report(p, t, sight);
    for (scene::SightClass cls : {scene::SightClass::kLoS, scene::SightClass::kNLoS}) {
      double ae = 0.0, pe = 0.0;
      int n = 0;
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          if (sight.classes[y * 16 + x] != cls) continue;
          const double a = p.data[y * 16 + x], b = t.data[y * 16 + x];
          ae += std::abs(a - b);
          double e;
          if (b == 0.0)
            e = a > 0.0 ? 100.0 : 0.0;
          else
            e = std::min(100.0, 100.0 * std::abs(a - b) / b);
          pe += e;
          ++n;
        }
      }
      const bool los = cls == scene::SightClass::kLoS;
      REQUIRE(n > 0);
      CHECK(*(los ? m.mae_los : m.mae_nlos) == ae / n);
      CHECK(*(los ? m.wmape_los : m.wmape_nlos) == pe / n);
      CHECK(*(los ? m.wmape_los : m.wmape_nlos) <= 100.0);
    }
  }
}

TEST_CASE("landmark report") {
  Rng rng(13);
  lens::LandmarkSet a, b;
  for (int i = 0; i < 68; ++i) {
    a.points.push_back({rng.uniform(0, 256), rng.uniform(0, 256)});
    b.points.push_back({rng.uniform(0, 256), rng.uniform(0, 256)});
  }
  const LandmarkMetrics zero = landmark_report(a, a);
  CHECK(zero.x_err == 0.0);
  CHECK(zero.combined_err == 0.0);

  lens::LandmarkSet shifted = a;
  for (Vec2& p : shifted.points) p.x += 3.0;
  const LandmarkMetrics sh = landmark_report(shifted, a);
  CHECK(sh.x_err == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sh.y_err == 0.0);
  CHECK(sh.combined_err == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sh.xy_shift == doctest::Approx(3.0).epsilon(1e-12));

  const LandmarkMetrics m = landmark_report(a, b);
  double sx = 0, sy = 0, sq = 0;
  for (int i = 0; i < 68; ++i) {
    const double dx = a.points[i].x - b.points[i].x, dy = a.points[i].y - b.points[i].y;
    sx += std::abs(dx);
    sy += std::abs(dy);
    sq += dx * dx + dy * dy;
  }
  CHECK(std::abs(m.x_err - sx / 68) < 1e-12);
  CHECK(std::abs(m.y_err - sy / 68) < 1e-12);
  CHECK(std::abs(m.combined_err - std::sqrt(sq / 68)) < 1e-12);
  CHECK(std::abs(m.xy_shift - std::abs(sx / 68 - sy / 68)) < 1e-12);

  b.points.pop_back();
  CHECK_THROWS_AS(landmark_report(a, b), ValidationError);
}

TEST_CASE("ball report") {
  ball::BallSimConfig cfg;
  cfg.slope_beta = 10 * std::numbers::pi / 180;
  cfg.background_seed = 5;
  ball::BallState truth;
  truth.pos = {0.3, 0.4};
  truth.phi = 1.1;
  const Image frame = ball::render_frame(truth, cfg).image;
  ball::BallState input = truth;
  input.pos.x -= 0.4;
  const BallMetrics m = ball_report(frame, truth, cfg, input);
  CHECK(m.ball_count == 1);
  CHECK(*m.pos_x <= 0.5);
  CHECK(*m.pos_y <= 0.5);
  CHECK(*m.rotation_deg <= 1.0);
  CHECK(*m.roundness_std <= 0.3);
  CHECK(*m.slope_err <= 0.5);
  CHECK(*m.behind_start == false);
  CHECK_FALSE(m.off_ground.has_value());

  ball::BallState turned = truth;
  turned.phi += 30 * std::numbers::pi / 180;
  const BallMetrics r = ball_report(ball::render_frame(turned, cfg).image, truth, cfg);
  CHECK(*r.rotation_deg == doctest::Approx(30.0).epsilon(0.03));
  CHECK(*r.pos_x <= 0.5);

  const BallMetrics blank = ball_report(Image(256, 256, 3, 0), truth, cfg);
  CHECK(blank.ball_count == 0);
  CHECK_FALSE(blank.pos_x.has_value());
  CHECK_FALSE(blank.rotation_deg.has_value());
  CHECK_FALSE(blank.roundness_std.has_value());
  CHECK_FALSE(blank.slope_err.has_value());

  // background change leaves every criterion unchanged
  ball::BallSimConfig other = cfg;
  other.background_seed = 6;
  const BallMetrics m2 = ball_report(ball::render_frame(truth, other).image, truth, cfg, input);
  CHECK(m2.pos_x == m.pos_x);
  CHECK(m2.pos_y == m.pos_y);
  CHECK(m2.rotation_deg == m.rotation_deg);
  CHECK(m2.roundness_std == m.roundness_std);
  CHECK(m2.slope_err == m.slope_err);

  cfg.mode = ball::Mode::kRolling;
  ball::BallState on = truth;
  on.pos = {0.0, cfg.radius_m() / std::cos(cfg.slope_beta)};
  CHECK(*ball_report(ball::render_frame(on, cfg).image, on, cfg).off_ground == false);
  on.pos.y += 0.2;
  CHECK(*ball_report(ball::render_frame(on, cfg).image, on, cfg).off_ground == true);

  // vertical drop: same x in both frames is not "behind"
  ball::BallSimConfig flat = cfg;
  flat.mode = ball::Mode::kBouncing;
  const BallMetrics same_x = ball_report(ball::render_frame(truth, flat).image, truth, flat, truth);
  CHECK(*same_x.behind_start == false);
  ball::BallState ahead = truth;
  ahead.pos.x += 0.05;  // 5 px
  CHECK(*ball_report(ball::render_frame(truth, flat).image, truth, flat, ahead).behind_start == true);

  CHECK(angle_difference_deg(350, 10) == doctest::Approx(20));
  CHECK(angle_difference_deg(-90, 90) == doctest::Approx(180));
}

TEST_CASE("runtime bench") {
  CHECK_THROWS_AS(runtime_bench([](std::size_t) {}, 0), ValidationError);
  CHECK_THROWS_AS(runtime_bench([](std::size_t) {}, 9), ValidationError);
  int calls = 0;
  const BenchResult r = runtime_bench(
      [&](std::size_t) {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      },
      10);
  CHECK(calls == 13);
  CHECK(r.mean_ms >= 9.0);
  CHECK(r.mean_ms <= 15.0);
  const BenchResult mt =
      runtime_bench([](std::size_t) { std::this_thread::sleep_for(std::chrono::milliseconds(10)); }, 12, 4);
  CHECK(mt.workers == 4);
  CHECK(mt.mean_ms < 9.0);  // sleeping calls overlap
}

TEST_CASE("eval report aggregation and serialization") {
  EvalReport rep;
  rep.task = "ball";
  rep.expected = 4;
  BallMetrics ok;
  ok.ball_count = 1;
  ok.pos_x = 1.0;
  ok.pos_y = 2.0;
  BallMetrics ok2 = ok;
  ok2.pos_x = 3.0;
  rep.samples = {to_sample("a", ok), to_sample("b", ok2), to_sample("c", BallMetrics{})};
  rep.missing = {"d"};
  rep.aggregate();
  CHECK(rep.coverage == doctest::Approx(0.75));
  CHECK(rep.mean.at("pos_x") == doctest::Approx(2.0));
  CHECK(rep.non_evaluable_rate.at("pos_x") == doctest::Approx(1.0 / 3));
  CHECK(rep.mean.at("balls_zero") == doctest::Approx(1.0 / 3));
  CHECK(rep.mean.count("rotation_deg") == 0);
  CHECK(rep.non_evaluable_rate.at("rotation_deg") == 1.0);
  // checks that do not apply to a sample are left out, not counted as failures
  CHECK(rep.non_evaluable_rate.count("off_ground") == 0);
  BallMetrics rolling = ok;
  rolling.ground_checked = true;
  rolling.off_ground = false;
  BallMetrics rolling_failed = ok;
  rolling_failed.ground_checked = true;
  EvalReport mixed;
  mixed.samples = {to_sample("a", ok), to_sample("b", rolling), to_sample("c", rolling_failed)};
  mixed.aggregate();
  CHECK(mixed.non_evaluable_rate.at("off_ground") == doctest::Approx(0.5));
  CHECK(mixed.mean.at("off_ground") == 0.0);

  const auto j = nlohmann::json::parse(rep.to_json());
  CHECK(j["task"] == "ball");
  CHECK(j["missing"][0] == "d");
  CHECK(j["samples"][2]["pos_x"].is_null());
  const std::string csv = rep.to_csv();
  CHECK(csv.rfind("sample_id,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(rep.format_table().find("missing d") != std::string::npos);
}
