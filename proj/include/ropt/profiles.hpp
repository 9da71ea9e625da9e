#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "ropt/geometry.hpp"

namespace ropt {

/// One linear velocity ramp: starting at time `start` (relative to profile
/// time zero) the velocity moves linearly to `end_velocity` over `duration`.
struct Ramp {
  double start = 0.0;
  double end_velocity = 0.0;
  double duration = 0.0;
};

/// Piecewise-linear velocity profile made of consecutive ramps. Between the
/// end of one ramp and the start of the next the velocity holds constant, as
/// it does after the last ramp. Negative evaluation times return v0.
struct RampProfile {
  double v0 = 0.0;
  std::vector<Ramp> ramps;
  // total time this profile has already been executed for; bookkeeping for
  // the planner's warm start, does not shift evaluation
  double offset = 0.0;
};

/// Normalizes ramp ordering: sorts by start time (stable) and pushes each
/// start to at least the previous ramp's end so ramps never overlap.
inline RampProfile make_ramp_profile(double v0, std::vector<Ramp> ramps, double offset = 0.0) {
  for (const auto& r : ramps)
    if (r.duration < 0.0) throw std::invalid_argument("make_ramp_profile: negative duration");
  std::stable_sort(ramps.begin(), ramps.end(),
                   [](const Ramp& a, const Ramp& b) { return a.start < b.start; });
  double prev_end = ramps.empty() ? 0.0 : ramps.front().start;
  for (auto& r : ramps) {
    r.start = std::max(r.start, prev_end);
    prev_end = r.start + r.duration;
  }
  return RampProfile{v0, std::move(ramps), offset};
}

/// Profile value without the physical >= 0 clamp. The planner's constraint
/// penalty evaluates this raw signal so that infeasible negative-velocity
/// candidates are visible to it.
inline double velocity_at_raw(const RampProfile& p, double t) {
  double v = p.v0;
  for (const auto& r : p.ramps) {
    if (t <= r.start) return v;
    if (r.duration <= 0.0) {
      v = r.end_velocity;
      continue;
    }
    if (t < r.start + r.duration)
      return v + (r.end_velocity - v) * (t - r.start) / r.duration;
    v = r.end_velocity;
  }
  return v;
}

enum class FixedKind { Constant, Stop, Accelerate };

/// Non-optimized fallback maneuver: hold the current velocity, ramp to a
/// standstill, or ramp up to a target velocity.
struct FixedProfile {
  FixedKind kind = FixedKind::Constant;
  double v0 = 0.0;
  double anchor_time = 0.0;      // time to reach anchor_velocity
  double anchor_velocity = 0.0;
};

inline FixedProfile make_constant_profile(double v0) {
  return {FixedKind::Constant, v0, 0.0, v0};
}

/// Ramp to zero with the given comfortable deceleration (positive magnitude).
inline FixedProfile make_stop_profile(double v0, double comfort_decel = 2.0) {
  if (comfort_decel <= 0.0) throw std::invalid_argument("make_stop_profile: decel must be > 0");
  return {FixedKind::Stop, v0, std::max(v0, 0.0) / comfort_decel, 0.0};
}

/// Ramp to target_velocity with the given comfortable acceleration.
inline FixedProfile make_accelerate_profile(double v0, double target_velocity,
                                            double comfort_accel = 2.0) {
  if (comfort_accel <= 0.0) throw std::invalid_argument("make_accelerate_profile: accel must be > 0");
  const double dt = std::max(target_velocity - v0, 0.0) / comfort_accel;
  return {FixedKind::Accelerate, v0, dt, target_velocity};
}

inline double velocity_at_raw(const FixedProfile& p, double t) {
  if (t <= 0.0 || p.anchor_time <= 0.0)
    return p.kind == FixedKind::Constant || t <= 0.0 ? p.v0 : p.anchor_velocity;
  if (t >= p.anchor_time) return p.anchor_velocity;
  return p.v0 + (p.anchor_velocity - p.v0) * t / p.anchor_time;
}

using VelocityProfile = std::variant<RampProfile, FixedProfile>;

inline double velocity_at_raw(const VelocityProfile& p, double t) {
  return std::visit([t](const auto& prof) { return velocity_at_raw(prof, t); }, p);
}

/// Physical velocity: raw profile clamped at zero (no reversing).
inline double velocity_at(const VelocityProfile& p, double t) {
  return std::max(velocity_at_raw(p, t), 0.0);
}

struct TrajectoryState {
  double time = 0.0;
  double longitudinal = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double jerk = 0.0;
  PathPose pose;
  double sigma_lon = 0.0;
  double sigma_lat = 0.0;
};

/// Discrete rollout at fixed step dt; states[k] is the state at time k*dt.
struct Trajectory {
  double dt = 0.0;
  std::vector<TrajectoryState> states;
};

struct RolloutParams {
  double horizon = 10.0;     // s
  double dt = 0.25;          // s, rollout step
  double sigma0_lon = 1.0;   // m, initial longitudinal position spread
  double sigma0_lat = 0.3;   // m, lateral spread (constant along the rollout)
  double growth = 0.03;      // longitudinal spread growth per meter traveled
};

namespace detail {

inline void fill_derivatives(Trajectory& traj) {
  auto& st = traj.states;
  const std::size_t n = st.size();
  if (n < 2) {
    for (auto& s : st) s.acceleration = s.jerk = 0.0;
    return;
  }
  for (std::size_t k = 0; k + 1 < n; ++k)
    st[k].acceleration = (st[k + 1].velocity - st[k].velocity) / traj.dt;
  st[n - 1].acceleration = st[n - 2].acceleration;
  for (std::size_t k = 0; k + 1 < n; ++k)
    st[k].jerk = (st[k + 1].acceleration - st[k].acceleration) / traj.dt;
  st[n - 1].jerk = st[n - 2].jerk;
}

}  // namespace detail

/// Integrates a velocity profile along a path from arclength l0. Positions
/// use explicit Euler with the profile's clamped velocity; the longitudinal
/// position uncertainty grows proportionally to distance traveled while the
/// lateral uncertainty stays constant.
inline Trajectory rollout(const VelocityProfile& profile, const Path& path, double l0,
                          const RolloutParams& rp) {
  if (rp.dt <= 0.0 || rp.horizon <= 0.0)
    throw std::invalid_argument("rollout: horizon and dt must be > 0");
  if (l0 < 0.0 || l0 > path.length())
    throw std::domain_error("rollout: start arclength outside path");
  const std::size_t n_steps = static_cast<std::size_t>(std::llround(rp.horizon / rp.dt));

  Trajectory traj;
  traj.dt = rp.dt;
  traj.states.resize(n_steps + 1);
  double l = l0;
  double sigma = rp.sigma0_lon;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    auto& s = traj.states[k];
    s.time = static_cast<double>(k) * rp.dt;
    s.velocity = velocity_at(profile, s.time);
    s.longitudinal = l;
    s.sigma_lon = sigma;
    s.sigma_lat = rp.sigma0_lat;
    s.pose = pose_at_extended(path, l);
    l += s.velocity * rp.dt;
    sigma += rp.growth * s.velocity * rp.dt;
  }
  detail::fill_derivatives(traj);
  return traj;
}

/// Constant-velocity prediction for another agent on its own path.
inline Trajectory extrapolate_constant(const Path& path, double l0, double v,
                                       const RolloutParams& rp) {
  return rollout(make_constant_profile(v), path, l0, rp);
}

}  // namespace ropt
