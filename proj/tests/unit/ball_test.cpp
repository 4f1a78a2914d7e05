#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ball_oracle.hpp"
#include "physgen/ball/render.hpp"
#include "physgen/ball/sim.hpp"
#include "physgen/core/rng.hpp"

using namespace physgen;
using namespace physgen::ball;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

BallSimConfig random_config(Rng& rng, Mode mode) {
  BallSimConfig cfg;
  cfg.mode = mode;
  cfg.slope_beta = rng.uniform(0.0, 25.0) * kDeg;
  cfg.start_height = mode == Mode::kBouncing ? rng.uniform(0.5, 2.0) : 0.0;
  cfg.start_x = rng.uniform(-1.0, 0.5);
  cfg.spring_c = rng.uniform(2000.0, 8000.0);
  cfg.damper_d = rng.uniform(1.0, 6.0);
  return cfg;
}

double mechanical_energy(const BallState& s, const BallSimConfig& cfg) {
  return 0.5 * cfg.mass * squared_norm(s.vel) + cfg.mass * cfg.g * s.pos.y;
}

double angle_diff_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360.0 - d);
}

}  // namespace

TEST_CASE("free fall closed form") {
  BallSimConfig cfg;
  cfg.start_height = 10.0;
  const Trajectory traj(cfg, 1.2);
  const BallState s = traj.state_at(1.0);
  CHECK(s.pos.y == doctest::Approx(10.0 - 9.81 / 2).epsilon(1e-14));
  CHECK(s.pos.x == 0.0);
  CHECK(s.phase == Phase::kFreeFall);
}

TEST_CASE("level ground keeps the motion vertical") {
  BallSimConfig cfg;
  cfg.start_height = 1.5;
  const Trajectory traj(cfg, 5.0);
  CHECK(traj.bounces().size() > 3);
  for (const BallState& s : traj.sample(0.01)) {
    CHECK(s.pos.x == 0.0);
    CHECK(s.vel.x == 0.0);
  }
}

TEST_CASE("config validation") {
  BallSimConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.start_height = 0.1;  // radius is 0.15 m
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = {};
  cfg.slope_beta = 31 * kDeg;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = {};
  cfg.slope_beta = 20 * kDeg;
  cfg.friction_mu = 0.05;
  CHECK_THROWS_WITH_AS(validate(cfg), doctest::Contains("friction_mu >="), ValidationError);
  cfg = {};
  cfg.dt_frame = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  cfg = {};
  cfg.spring_c = 0.0;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
  CHECK(parse_mode("Rolling") == Mode::kRolling);
  CHECK_THROWS_AS(parse_mode("sliding"), ValidationError);
}

TEST_CASE("contact restitution matches a numerically integrated contact") {
  BallSimConfig cfg;
  const ContactResult r = contact_impulse({0.0, -3.0}, 0.0, cfg);
  REQUIRE(r.separated);
  const oracle::ContactOutcome o = oracle::rk4_contact(-3.0, 0.0, cfg);
  REQUIRE(o.separated);
  CHECK(r.velocity.x == 0.0);
  CHECK(r.velocity.y == doctest::Approx(o.vn_out).epsilon(1e-7));
  CHECK(r.restitution > 0.0);
  CHECK(r.restitution < 1.0);

  Rng rng(41);
  for (int i = 0; i < 20; ++i) {
    BallSimConfig c;
    c.spring_c = rng.uniform(1000, 10000);
    c.damper_d = rng.uniform(0.5, 8.0);
    const double beta = rng.uniform(0.0, 30.0) * kDeg;
    const double vn = -rng.uniform(0.5, 6.0);
    const Vec2 un{std::sin(beta), std::cos(beta)};
    const ContactResult cr = contact_impulse(un * vn, beta, c);
    const oracle::ContactOutcome co = oracle::rk4_contact(vn, beta, c);
    CHECK(cr.separated == co.separated);
    if (cr.separated) CHECK(dot(cr.velocity, un) == doctest::Approx(co.vn_out).epsilon(1e-7));
  }
}

TEST_CASE("undamped contact conserves the normal speed") {
  BallSimConfig cfg;
  cfg.damper_d = 0.0;
  for (double vn : {0.2, 1.0, 4.0}) {
    const ContactResult r = contact_impulse({0.7, -vn}, 0.0, cfg);
    REQUIRE(r.separated);
    CHECK(r.velocity.y == doctest::Approx(vn).epsilon(1e-12));
    CHECK(r.velocity.x == 0.7);
  }
}

TEST_CASE("oblique contact keeps the tangential component") {
  BallSimConfig cfg;
  for (double deg : {10.0, 35.0, 70.0, 85.0}) {
    const double th = deg * kDeg;  // incidence from the surface
    const Vec2 v{3.0 * std::cos(th), -3.0 * std::sin(th)};
    const ContactResult r = contact_impulse(v, 0.0, cfg);
    REQUIRE(r.separated);
    const double e = oracle::rk4_contact(v.y, 0.0, cfg).vn_out / -v.y;
    CHECK(r.velocity.x == v.x);
    // angles measured from the surface
    CHECK(std::tan(std::atan2(r.velocity.y, r.velocity.x)) == doctest::Approx(e * std::tan(th)).epsilon(1e-6));
    CHECK(norm(r.velocity) <= norm(v));
  }
  CHECK_THROWS_AS(contact_impulse({1.0, 0.5}, 0.0, cfg), ValidationError);
}

TEST_CASE("heavy damping gives no separation") {
  BallSimConfig cfg;
  cfg.damper_d = 60.0;  // above critical damping 2 sqrt(c m) = 40
  const ContactResult r = contact_impulse({0.4, -2.0}, 0.0, cfg);
  CHECK_FALSE(r.separated);
  CHECK(r.velocity.y == 0.0);
  CHECK(r.velocity.x == 0.4);
  cfg.damper_d = 3.0;
  const ContactResult slow = contact_impulse({0.0, -0.01}, 0.0, cfg);  // gravity preload wins
  CHECK_FALSE(slow.separated);
}

TEST_CASE("rolling accelerations") {
  BallSimConfig cfg;
  cfg.mode = Mode::kRolling;
  const RollingAccel flat = rolling_dynamics(0.0, cfg);
  CHECK(flat.linear == 0.0);
  CHECK(flat.angular == 0.0);
  const RollingAccel a = rolling_dynamics(10 * kDeg, cfg);
  CHECK(a.linear == doctest::Approx(1.2167).epsilon(1e-4));
  CHECK(a.linear == doctest::Approx(5.0 / 7.0 * 9.81 * std::sin(10 * kDeg)).epsilon(1e-14));
  const double r = cfg.radius_m(), J = 0.4 * cfg.mass * r * r;
  CHECK(a.friction_force * r == doctest::Approx(J * a.angular).epsilon(1e-14));
  CHECK(a.normal_force == doctest::Approx(cfg.mass * 9.81 * std::cos(10 * kDeg)));
  // the two balances as an independent linear solve
  const double M[2][2] = {{cfg.mass, 1.0}, {J / (r * r), -1.0}};
  const double rhs[2] = {cfg.mass * 9.81 * std::sin(10 * kDeg), 0.0};
  const double det = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  const double xdd = (rhs[0] * M[1][1] - M[0][1] * rhs[1]) / det;
  CHECK(a.linear == doctest::Approx(xdd).epsilon(1e-13));
  cfg.friction_mu = 0.01;
  CHECK_THROWS_AS(rolling_dynamics(10 * kDeg, cfg), ValidationError);
}

TEST_CASE("impact angle") {
  CHECK(impact_angle({1.0, -1.0}) == doctest::Approx(-std::numbers::pi / 4));
  CHECK(impact_angle({2.0, 0.0}) == 0.0);
  CHECK(impact_angle({0.0, -3.0}) == doctest::Approx(-std::numbers::pi / 2));

  BallSimConfig cfg;
  cfg.slope_beta = 12 * kDeg;
  cfg.start_height = 1.3;
  const Trajectory traj(cfg, 3.0);
  REQUIRE(traj.bounces().size() >= 3);
  for (std::size_t k = 0; k < traj.pieces().size() && k < traj.bounces().size(); ++k) {
    const TrajectoryPiece& p = traj.pieces()[k];
    // independent touch-down time by bisection on the slope-normal gap
    const double r = cfg.radius_m(), gn = 9.81 * std::cos(cfg.slope_beta);
    auto gap = [&](double tau) { return p.n0 + p.vn0 * tau - 0.5 * gn * tau * tau - r; };
    double lo = 0.0, hi = 10.0;
    if (p.vn0 > 0.0) lo = p.vn0 / gn;  // apex
    for (int i = 0; i < 200; ++i) ((gap(0.5 * (lo + hi)) > 0.0) ? lo : hi) = 0.5 * (lo + hi);
    const double tau = 0.5 * (lo + hi);
    CHECK(p.t1 - p.t0 == doctest::Approx(tau).epsilon(1e-9));
    const double vs = p.vs0 + 9.81 * std::sin(cfg.slope_beta) * tau, vn = p.vn0 - gn * tau;
    const Vec2 v = Vec2{std::cos(cfg.slope_beta), -std::sin(cfg.slope_beta)} * vs +
                   Vec2{std::sin(cfg.slope_beta), std::cos(cfg.slope_beta)} * vn;
    CHECK(std::abs(impact_angle(traj.bounces()[k].v_in) - std::atan2(v.y, v.x)) < 1e-9);
  }
}

TEST_CASE("flight pieces follow the slope-frame time polynomials") {
  Rng rng(7);
  for (int i = 0; i < 20; ++i) {
    const BallSimConfig cfg = random_config(rng, Mode::kBouncing);
    const Trajectory traj(cfg, 2.0);
    const double sb = std::sin(cfg.slope_beta), cb = std::cos(cfg.slope_beta);
    for (const TrajectoryPiece& p : traj.pieces()) {
      if (p.phase != Phase::kFlight && p.phase != Phase::kFreeFall) continue;
      for (int k = 0; k <= 8; ++k) {
        const double tau = (p.t1 - p.t0) * k / 8.0;
        const double x = p.s0 + p.vs0 * tau + 0.5 * 9.81 * sb * tau * tau;
        const double y = p.n0 + p.vn0 * tau - 0.5 * 9.81 * cb * tau * tau;
        const Vec2 w{x * cb + y * sb, -x * sb + y * cb};
        const Vec2 got = traj.state_at(p.t0 + tau).pos;
        const double scale = std::max(1.0, norm(w));
        CHECK(distance(got, w) / scale < 1e-12);
      }
    }
  }
}

TEST_CASE("trajectory agrees with a brute-force integrator") {
  Rng rng(2024);
  for (int i = 0; i < 4; ++i) {
    BallSimConfig cfg = random_config(rng, i == 3 ? Mode::kRolling : Mode::kBouncing);
    if (i == 0) cfg.slope_beta = 0.0;
    const auto states = simulate_trajectory(cfg, 3.0, 0.01);
    const auto ref = oracle::brute_trajectory(cfg, 3.0, 0.01);
    REQUIRE(states.size() == ref.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < states.size(); ++k) worst = std::max(worst, distance(states[k].pos, ref[k]));
    INFO("config " << i << " worst deviation " << worst);
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("physical invariants over random configurations") {
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const Mode mode = i % 4 == 3 ? Mode::kRolling : Mode::kBouncing;
    const BallSimConfig cfg = random_config(rng, mode);
    const Trajectory traj(cfg, 3.0);
    const double r = cfg.radius_m();
    INFO("config " << i);

    double prev_x = -1e300;
    for (const BallState& s : traj.sample(0.002)) {
      CHECK(ground_distance(s.pos, cfg.slope_beta) - r >= -1e-4);
      if (cfg.slope_beta > 0.0) {
        CHECK(s.pos.x >= prev_x - 1e-12);
        prev_x = s.pos.x;
      }
      if (s.phase == Phase::kRolling || s.phase == Phase::kRest) {
        const double along = dot(s.vel, Vec2{std::cos(cfg.slope_beta), -std::sin(cfg.slope_beta)});
        CHECK(std::abs(along - s.omega * r) <= 1e-6);
      }
    }

    // apex energies of successive flights
    double prev_e = 1e300;
    for (const TrajectoryPiece& p : traj.pieces()) {
      if (p.phase != Phase::kFlight && p.phase != Phase::kFreeFall) continue;
      const double apex = p.vn0 > 0.0 ? p.vn0 / (cfg.g * std::cos(cfg.slope_beta)) : 0.0;
      if (p.t0 + apex >= traj.horizon()) break;
      const double e = mechanical_energy(traj.state_at(p.t0 + apex), cfg);
      CHECK(e < prev_e);
      prev_e = e;
    }

    for (const TrajectoryPiece& p : traj.pieces()) {
      if (p.phase != Phase::kRolling || p.t1 - p.t0 < 0.2) continue;
      const Vec2 us{std::cos(cfg.slope_beta), -std::sin(cfg.slope_beta)};
      const double v0 = dot(traj.state_at(p.t0 + 0.05).vel, us), v1 = dot(traj.state_at(p.t0 + 0.15).vel, us);
      CHECK((v1 - v0) / 0.1 == doctest::Approx(5.0 / 7.0 * cfg.g * std::sin(cfg.slope_beta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("undamped bounces reflect about the normal") {
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    BallSimConfig cfg = random_config(rng, Mode::kBouncing);
    cfg.damper_d = 0.0;
    const Trajectory traj(cfg, 2.0);
    const Vec2 us{std::cos(cfg.slope_beta), -std::sin(cfg.slope_beta)};
    const Vec2 un{std::sin(cfg.slope_beta), std::cos(cfg.slope_beta)};
    REQUIRE(!traj.bounces().empty());
    for (const BounceEvent& b : traj.bounces()) {
      REQUIRE(b.contact.separated);
      const double in = std::atan2(std::abs(dot(b.v_in, us)), std::abs(dot(b.v_in, un)));
      const double out = std::atan2(std::abs(dot(b.contact.velocity, us)), std::abs(dot(b.contact.velocity, un)));
      CHECK(std::abs(in - out) < 1e-9);
    }
  }
}

TEST_CASE("rolling mode") {
  BallSimConfig cfg;
  cfg.mode = Mode::kRolling;
  cfg.start_height = 0.0;
  cfg.slope_beta = 15 * kDeg;
  const Trajectory traj(cfg, 2.0);
  const BallState s = traj.state_at(1.0);
  CHECK(s.phase == Phase::kRolling);
  CHECK(ground_distance(s.pos, cfg.slope_beta) == doctest::Approx(cfg.radius_m()).epsilon(1e-12));
  CHECK(traj.state_at(0.0).pos.x == doctest::Approx(0.0).epsilon(1e-15));
  const double travelled = distance(s.pos, traj.state_at(0.0).pos);
  CHECK(travelled == doctest::Approx(0.5 * 5.0 / 7.0 * 9.81 * std::sin(cfg.slope_beta)).epsilon(1e-12));
  cfg.slope_beta = 0.0;
  CHECK(Trajectory(cfg, 1.0).state_at(0.5).phase == Phase::kRest);
}

TEST_CASE("render is deterministic and periodic in the angle") {
  BallSimConfig cfg;
  cfg.slope_beta = 8 * kDeg;
  cfg.background_seed = 17;
  BallState s;
  s.pos = {0.2, 0.6};
  s.phi = 0.7;
  const RenderedFrame a = render_frame(s, cfg), b = render_frame(s, cfg);
  CHECK(a.image == b.image);
  CHECK(a.ball_in_frame);
  s.phi += 2 * std::numbers::pi;
  CHECK(render_frame(s, cfg).image == a.image);
  cfg.background_seed = 18;
  CHECK_FALSE(render_frame(s, cfg).image == a.image);
  s.pos = {5.0, 0.6};
  const RenderedFrame out = render_frame(s, cfg);
  CHECK_FALSE(out.ball_in_frame);
  CHECK(out.image.width == 256);
}

TEST_CASE("render and detect round trip") {
  Rng rng(314);
  double worst_c = 0, worst_a = 0, worst_r = 0, worst_g = 0;
  for (int i = 0; i < 200; ++i) {
    BallSimConfig cfg;
    cfg.slope_beta = rng.uniform(0.0, 30.0) * kDeg;
    cfg.background_seed = rng.next_u64();
    BallState s;
    // anywhere in the frame, above the ground line
    const Vec2 px{rng.uniform(20.0, 236.0), 0.0};
    const double ground_v = cfg.ground_anchor_px.y + (px.x - cfg.ground_anchor_px.x) * std::tan(cfg.slope_beta);
    const double lo = 20.0, hi = ground_v - 15.0 / std::cos(cfg.slope_beta);
    if (hi <= lo) continue;
    const double v = i % 3 == 0 ? hi : rng.uniform(lo, hi);
    s.pos = pixel_to_world({px.x, v}, cfg);
    s.phi = rng.uniform(-10.0, 10.0);
    const RenderedFrame f = render_frame(s, cfg);
    REQUIRE(f.ball_in_frame);
    const BallDetection d = detect_ball(f.image, cfg);
    REQUIRE(d.ball_count == 1);
    REQUIRE(d.angle_deg.has_value());
    REQUIRE(d.ground_angle_deg.has_value());
    const Vec2 c = world_to_pixel(s.pos, cfg);
    double truth_deg = std::fmod(s.phi * 180.0 / std::numbers::pi, 360.0);
    if (truth_deg < 0) truth_deg += 360.0;
    worst_c = std::max(worst_c, distance(d.center_px, c));
    worst_a = std::max(worst_a, angle_diff_deg(*d.angle_deg, truth_deg));
    worst_r = std::max(worst_r, d.roundness);
    worst_g = std::max(worst_g, std::abs(*d.ground_angle_deg - cfg.slope_beta * 180.0 / std::numbers::pi));
  }
  INFO("center " << worst_c << " angle " << worst_a << " roundness " << worst_r << " ground " << worst_g);
  CHECK(worst_c < 0.5);
  CHECK(worst_a < 1.0);
  CHECK(worst_r < 0.3);
  CHECK(worst_g < 0.5);
}

TEST_CASE("detection ignores the background") {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    BallSimConfig cfg;
    cfg.slope_beta = rng.uniform(0.0, 25.0) * kDeg;
    BallState s;
    s.pos = {rng.uniform(-0.8, 0.8), 0.0};
    s.pos.y = -s.pos.x * std::tan(cfg.slope_beta) + rng.uniform(0.2, 1.0);
    s.phi = rng.uniform(0.0, 6.3);
    cfg.background_seed = 1;
    const BallDetection a = detect_ball(render_frame(s, cfg).image, cfg);
    cfg.background_seed = 2;
    const BallDetection b = detect_ball(render_frame(s, cfg).image, cfg);
    CHECK(a.ball_count == b.ball_count);
    CHECK(a.center_px == b.center_px);
    CHECK(a.radius_samples == b.radius_samples);
    CHECK(a.angle_deg == b.angle_deg);
    CHECK(a.ground_angle_deg == b.ground_angle_deg);
  }
}

TEST_CASE("detector validity flags") {
  BallSimConfig cfg;
  const BallDetection blank = detect_ball(Image(256, 256, 3, 255), cfg);
  CHECK(blank.ball_count == 0);
  CHECK_FALSE(blank.position_valid);
  CHECK_FALSE(blank.angle_deg.has_value());
  CHECK_FALSE(blank.ground_angle_deg.has_value());

  BallState s;
  s.pos = {-0.5, 0.5};
  Image img = render_frame(s, cfg).image;
  BallState t = s;
  t.pos = {0.5, 0.5};
  const Image other = render_frame(t, cfg).image;
  for (int y = 0; y < 256; ++y)
    for (int x = 128; x < 256; ++x)
      for (int k = 0; k < 3; ++k) img.at(x, y, k) = other.at(x, y, k);
  const BallDetection two = detect_ball(img, cfg);
  CHECK(two.ball_count == 2);
  CHECK_FALSE(two.position_valid);
  CHECK_FALSE(two.angle_deg.has_value());
}

TEST_CASE("coverage is encoded exactly in every channel combination") {
  Rng rng(77);
  for (int i = 0; i < 30; ++i) {
    BallSimConfig cfg;
    cfg.slope_beta = rng.uniform(0.0, 25.0) * kDeg;
    cfg.background_seed = rng.next_u64();
    BallState s;
    s.pos = pixel_to_world({rng.uniform(30.0, 226.0), rng.uniform(30.0, 120.0)}, cfg);
    s.phi = rng.uniform(0.0, 6.3);
    const Image img = render_frame(s, cfg).image;
    const Vec2 c = world_to_pixel(s.pos, cfg);
    for (int y = static_cast<int>(c.y) - 17; y <= static_cast<int>(c.y) + 17; ++y)
      for (int x = static_cast<int>(c.x) - 17; x <= static_cast<int>(c.x) + 17; ++x) {
        int inside = 0;
        for (int j = 0; j < 8; ++j)
          for (int k = 0; k < 8; ++k) {
            const double dx = x + (k + 0.5) / 8 - c.x, dy = y + (j + 0.5) / 8 - c.y;
            inside += dx * dx + dy * dy <= cfg.radius_px * cfg.radius_px;
          }
        const int f = int(img.at(x, y, 0)) + int(img.at(x, y, 2)) - 2 * int(img.at(x, y, 1));
        CHECK(f == std::lround(255.0 * inside / 64));
      }
  }
}
