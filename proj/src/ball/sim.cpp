#include "physgen/ball/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace physgen::ball {

std::string_view to_string(Mode m) { return m == Mode::kRolling ? "rolling" : "bouncing"; }

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::kFreeFall: return "free_fall";
    case Phase::kContact: return "contact";
    case Phase::kFlight: return "flight";
    case Phase::kRolling: return "rolling";
    case Phase::kRest: return "rest";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "rolling") return Mode::kRolling;
  if (s == "bouncing") return Mode::kBouncing;
  throw ValidationError("unknown ball mode '" + std::string(name) + "'");
}

Phase parse_phase(std::string_view name) {
  for (Phase p : {Phase::kFreeFall, Phase::kContact, Phase::kFlight, Phase::kRolling, Phase::kRest})
    if (to_string(p) == name) return p;
  throw ValidationError("unknown ball phase '" + std::string(name) + "'");
}

double min_rolling_friction(double slope_beta) { return 2.0 / 7.0 * std::tan(slope_beta); }

void validate(const BallSimConfig& cfg) {
  constexpr double max_slope = 30.0 * std::numbers::pi / 180.0;
  if (!(cfg.slope_beta >= 0.0 && cfg.slope_beta <= max_slope + 1e-12))
    throw ValidationError("slope must be within [0, 30] degrees");
  if (!(cfg.radius_px > 0.0) || !(cfg.scale > 0.0)) throw ValidationError("radius and scale must be positive");
  if (!(cfg.g > 0.0) || !(cfg.mass > 0.0)) throw ValidationError("g and mass must be positive");
  if (!(cfg.spring_c > 0.0) || !(cfg.damper_d >= 0.0))
    throw ValidationError("spring constant must be positive and damping non-negative");
  if (!(cfg.dt_frame > 0.0)) throw ValidationError("dt_frame must be positive");
  if (!std::isfinite(cfg.start_x) || !std::isfinite(cfg.start_height)) throw ValidationError("start must be finite");
  if (cfg.mode == Mode::kBouncing && cfg.start_height * std::cos(cfg.slope_beta) < cfg.radius_m() - 1e-12)
    throw ValidationError("ball starts underground");
  const double need = min_rolling_friction(cfg.slope_beta);
  if (cfg.friction_mu < need - 1e-15)
    throw ValidationError("rolling without slipping needs friction_mu >= " + std::to_string(need));
}

ContactResult contact_impulse(Vec2 v_in, double beta, const BallSimConfig& cfg) {
  if (!(cfg.mass > 0.0) || !(cfg.spring_c > 0.0) || !(cfg.damper_d >= 0.0))
    throw ValidationError("contact_impulse: invalid contact constants");
  const Vec2 us{std::cos(beta), -std::sin(beta)}, un{std::sin(beta), std::cos(beta)};
  const double vt = dot(v_in, us), vn = dot(v_in, un);
  if (!(vn < 0.0)) throw ValidationError("contact_impulse: ball is not approaching the ground");

  ContactResult out;
  out.velocity = us * vt;
  const double m = cfg.mass, c = cfg.spring_c, d = cfg.damper_d;
  const double zp = -m * cfg.g * std::cos(beta) / c;  // static compression
  const double gamma = d / (2.0 * m);
  const double w0 = std::sqrt(c / m);
  if (gamma >= w0) {
    out.duration = std::numeric_limits<double>::infinity();
    return out;  // (over)critically damped: never lifts off
  }
  const double wd = std::sqrt(w0 * w0 - gamma * gamma);
  const double A = -zp, B = (vn + gamma * A) / wd;
  auto z = [&](double t) { return zp + std::exp(-gamma * t) * (A * std::cos(wd * t) + B * std::sin(wd * t)); };
  const double C = vn, D = -gamma * B - wd * A;
  auto zdot = [&](double t) { return std::exp(-gamma * t) * (C * std::cos(wd * t) + D * std::sin(wd * t)); };
  // z' = R sin(wd t + psi) with psi in (-pi, 0): first minimum, then first maximum
  const double psi = std::atan2(C, D);
  const double t_min = -psi / wd, t_max = (std::numbers::pi - psi) / wd;
  if (!(z(t_max) > 0.0)) {
    out.duration = t_max;
    return out;
  }
  double lo = t_min, hi = t_max;
  for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
    const double mid = 0.5 * (lo + hi);
    (z(mid) < 0.0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    const double step = z(t) / zdot(t);
    if (!std::isfinite(step) || std::abs(step) > hi - lo + 1e-12) break;
    t -= step;
  }
  const double vz = zdot(t);
  out.velocity = us * vt + un * vz;
  out.separated = true;
  out.restitution = vz / -vn;
  out.duration = t;
  return out;
}

RollingAccel rolling_dynamics(double beta, const BallSimConfig& cfg) {
  const double m = cfg.mass, r = cfg.radius_m();
  const double J = 0.4 * m * r * r;
  RollingAccel a;
  a.linear = cfg.g * std::sin(beta) / (1.0 + J / (m * r * r));
  a.angular = a.linear / r;
  a.friction_force = J * a.angular / r;
  a.normal_force = m * cfg.g * std::cos(beta);
  if (a.friction_force > cfg.friction_mu * a.normal_force * (1.0 + 1e-12))
    throw ValidationError("rolling without slipping needs friction_mu >= " + std::to_string(min_rolling_friction(beta)));
  return a;
}

double impact_angle(Vec2 v) {
  if (v.x == 0.0) return std::copysign(std::numbers::pi / 2.0, v.y);
  return std::atan2(v.y, v.x);
}

double ground_distance(Vec2 world, double beta) { return world.x * std::sin(beta) + world.y * std::cos(beta); }

namespace {

// Smallest positive root of n0 - r + vn t + an t^2 / 2 = 0 (an < 0), or +inf.
double time_to_ground(double gap, double vn, double an) {
  const double a = 0.5 * an, b = vn, c = gap;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::numeric_limits<double>::infinity();
  const double sq = std::sqrt(disc);
  double t = b >= 0.0 ? (b + sq) / (-2.0 * a) : 2.0 * c / (sq - b);
  for (int i = 0; i < 2; ++i) {
    const double f = c + t * (b + a * t), df = b + 2.0 * a * t;
    if (f == 0.0 || df == 0.0) break;
    t -= f / df;
  }
  return t;
}

}  // namespace

Trajectory::Trajectory(const BallSimConfig& cfg, double horizon) : cfg_(cfg), horizon_(horizon) {
  validate(cfg_);
  if (!(horizon >= 0.0)) throw ValidationError("horizon must be non-negative");
  const double beta = cfg_.slope_beta, r = cfg_.radius_m(), g = cfg_.g;
  us_ = {std::cos(beta), -std::sin(beta)};
  un_ = {std::sin(beta), std::cos(beta)};
  const RollingAccel roll = rolling_dynamics(beta, cfg_);

  auto rolling_piece = [&](double t0, double s0, double vs0, double phi0) {
    TrajectoryPiece p;
    p.phase = (roll.linear == 0.0 && vs0 == 0.0) ? Phase::kRest : Phase::kRolling;
    p.t0 = t0;
    p.t1 = std::max(t0, horizon_);
    p.s0 = s0;
    p.n0 = r;
    p.vs0 = vs0;
    p.as = roll.linear;
    p.phi0 = phi0;
    p.omega0 = vs0 / r;
    p.alpha = roll.angular;
    return p;
  };

  if (cfg_.mode == Mode::kRolling) {
    const double s0 = (cfg_.start_x - r * std::sin(beta)) / std::cos(beta);
    pieces_.push_back(rolling_piece(0.0, s0, 0.0, 0.0));
    return;
  }

  TrajectoryPiece cur;
  cur.phase = Phase::kFreeFall;
  const Vec2 start{cfg_.start_x, -cfg_.start_x * std::tan(beta) + cfg_.start_height};
  cur.s0 = dot(start, us_);
  cur.n0 = dot(start, un_);
  cur.as = g * std::sin(beta);
  cur.an = -g * std::cos(beta);
  constexpr int kMaxBounces = 100000;
  for (int bounce = 0;; ++bounce) {
    const double tau = time_to_ground(cur.n0 - r, cur.vn0, cur.an);
    const double tc = cur.t0 + tau;
    if (!(tc < horizon_)) {
      cur.t1 = std::max(cur.t0, horizon_);
      pieces_.push_back(cur);
      return;
    }
    cur.t1 = tc;
    pieces_.push_back(cur);
    const double vs = cur.vs0 + cur.as * tau, vn = cur.vn0 + cur.an * tau;
    const double s = cur.s0 + tau * (cur.vs0 + 0.5 * cur.as * tau);
    const double phi = cur.phi0 + cur.omega0 * tau;
    BounceEvent ev;
    ev.t = tc;
    ev.v_in = us_ * vs + un_ * std::min(vn, -std::numeric_limits<double>::min());
    ev.contact = contact_impulse(ev.v_in, beta, cfg_);
    bounces_.push_back(ev);
    const double vn_out = dot(ev.contact.velocity, un_);
    if (!ev.contact.separated || vn_out <= 0.0 || bounce >= kMaxBounces) {
      pieces_.push_back(rolling_piece(tc, s, vs, phi));
      return;
    }
    TrajectoryPiece next;
    next.phase = Phase::kFlight;
    next.t0 = tc;
    next.s0 = s;
    next.n0 = r;
    next.vs0 = vs;
    next.vn0 = vn_out;
    next.as = cur.as;
    next.an = cur.an;
    next.phi0 = phi;
    next.omega0 = vs / r;
    cur = next;
  }
}

Vec2 Trajectory::to_world(double s, double n) const { return us_ * s + un_ * n; }
Vec2 Trajectory::to_slope(Vec2 w) const { return {dot(w, us_), dot(w, un_)}; }

BallState Trajectory::state_at(double t) const {
  if (!(t >= 0.0)) throw ValidationError("state_at: negative time");
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t,
                             [](double v, const TrajectoryPiece& p) { return v < p.t0; });
  const TrajectoryPiece& p = *std::prev(it);
  const double tau = t - p.t0;
  BallState st;
  st.t = t;
  st.phase = p.phase;
  const double s = p.s0 + tau * (p.vs0 + 0.5 * p.as * tau);
  const double n = p.n0 + tau * (p.vn0 + 0.5 * p.an * tau);
  st.pos = to_world(s, n);
  st.vel = us_ * (p.vs0 + p.as * tau) + un_ * (p.vn0 + p.an * tau);
  if (p.phase == Phase::kFreeFall) {
    // vertical drop; avoid rotation round-off in x
    st.pos.x = cfg_.start_x;
    st.vel.x = 0.0;
  }
  st.phi = p.phi0 + tau * (p.omega0 + 0.5 * p.alpha * tau);
  st.omega = p.omega0 + p.alpha * tau;
  return st;
}

std::vector<BallState> Trajectory::sample(double dt) const {
  if (!(dt > 0.0)) throw ValidationError("sample step must be positive");
  std::vector<BallState> out;
  for (std::size_t k = 0;; ++k) {
    const double t = k * dt;
    if (t > horizon_ + 1e-12) break;
    out.push_back(state_at(std::min(t, horizon_)));
  }
  return out;
}

std::vector<BallState> simulate_trajectory(const BallSimConfig& cfg, double horizon, double sample_dt) {
  return Trajectory(cfg, horizon).sample(sample_dt);
}

}  // namespace physgen::ball
