#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "physgen/core/error.hpp"
#include "physgen/core/geometry.hpp"

namespace physgen::ball {

enum class Mode { kRolling, kBouncing };
enum class Phase { kFreeFall, kContact, kFlight, kRolling, kRest };

std::string_view to_string(Mode m);
std::string_view to_string(Phase p);
Mode parse_mode(std::string_view name);
Phase parse_phase(std::string_view name);

/// World frame: meters, y up, ground line through the origin descending to
/// the right at angle slope_beta. Pixel (u, v) = ground_anchor_px + (x, -y) / scale.
struct BallSimConfig {
  Mode mode = Mode::kBouncing;
  double slope_beta = 0.0;    // radians
  double start_height = 1.0;  // vertical height of the ball center above the ground line (bouncing)
  double start_x = 0.0;       // world x of the ball center at t = 0
  double dt_frame = 0.5;      // seconds between input and target frame
  double radius_px = 15.0;
  double g = 9.81;
  double mass = 0.1;
  double spring_c = 4000.0;
  double damper_d = 3.0;
  double friction_mu = 0.5;
  double scale = 0.01;  // meters per pixel
  std::uint64_t background_seed = 0;
  int frame_size = 256;
  Vec2 ground_anchor_px{128.0, 200.0};

  double radius_m() const { return radius_px * scale; }
};

/// Rejects non-physical or out-of-range configurations, including a ball
/// that starts underground and slopes that need more friction than
/// friction_mu to roll without slipping.
void validate(const BallSimConfig& cfg);

struct BallState {
  double t = 0.0;
  Vec2 pos;  // world, meters
  Vec2 vel;  // world, m/s
  double phi = 0.0;    // rotation, radians, clockwise on screen
  double omega = 0.0;  // d(phi)/dt; rolling downhill gives omega * r = speed
  Phase phase = Phase::kFreeFall;
};

struct ContactResult {
  Vec2 velocity;  // world frame, after the contact
  bool separated = false;
  double restitution = 0.0;  // outgoing / incoming normal speed (0 without separation)
  double duration = 0.0;     // time from touch-down to separation (or to the first rebound maximum)
};

/// Resolves a ground contact with the spring-damper law
/// m z'' + d z' + c z = -m g cos(beta), z(0) = 0, z'(0) = v_n < 0,
/// solved in closed form. The tangential component is kept. Without
/// separation the normal component is removed (the ball starts rolling).
ContactResult contact_impulse(Vec2 v_in, double slope_beta, const BallSimConfig& cfg);

struct RollingAccel {
  double linear = 0.0;   // along the slope, downhill positive
  double angular = 0.0;  // d(omega)/dt
  double friction_force = 0.0;
  double normal_force = 0.0;
};

/// No-slip rolling of a solid sphere: x'' = g sin(beta) / (1 + J / (m r^2)),
/// J = 2/5 m r^2. Throws ValidationError when the required friction exceeds
/// mu * F_N.
RollingAccel rolling_dynamics(double slope_beta, const BallSimConfig& cfg);

/// Minimum friction coefficient for rolling without slipping: 2/7 tan(beta).
double min_rolling_friction(double slope_beta);

/// atan2(v_y, v_x); +-pi/2 for vertical impacts.
double impact_angle(Vec2 v);

struct BounceEvent {
  double t = 0.0;
  Vec2 v_in;
  ContactResult contact;
};

/// Piece of the trajectory with constant accelerations in the slope frame
/// (s downhill along the ground, n along the ground normal).
struct TrajectoryPiece {
  Phase phase = Phase::kFreeFall;
  double t0 = 0.0;
  double t1 = 0.0;  // end time; the last piece runs to the horizon
  double s0 = 0.0, n0 = 0.0, vs0 = 0.0, vn0 = 0.0, as = 0.0, an = 0.0;
  double phi0 = 0.0, omega0 = 0.0, alpha = 0.0;
};

class Trajectory {
 public:
  Trajectory(const BallSimConfig& cfg, double horizon);

  BallState state_at(double t) const;
  /// States at t = 0, dt, 2 dt, ... <= horizon.
  std::vector<BallState> sample(double dt) const;

  const std::vector<TrajectoryPiece>& pieces() const { return pieces_; }
  const std::vector<BounceEvent>& bounces() const { return bounces_; }
  double horizon() const { return horizon_; }
  const BallSimConfig& config() const { return cfg_; }

  /// Slope frame <-> world frame.
  Vec2 to_world(double s, double n) const;
  Vec2 to_slope(Vec2 world) const;

 private:
  BallSimConfig cfg_;
  double horizon_;
  Vec2 us_, un_;  // unit vectors of the slope frame
  std::vector<TrajectoryPiece> pieces_;
  std::vector<BounceEvent> bounces_;
};

std::vector<BallState> simulate_trajectory(const BallSimConfig& cfg, double horizon, double sample_dt);

/// Signed distance from a world point to the ground line (positive above).
double ground_distance(Vec2 world, double slope_beta);

}  // namespace physgen::ball
