#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ropt/geometry.hpp"

namespace ropt {

struct IdmParams {
  double max_accel = 3.0;        // a, m/s^2
  double comfort_decel = 2.0;    // b, m/s^2
  double exponent = 4.0;         // delta
  double cruise_velocity = 11.0; // v_c, m/s
  double min_gap = 2.0;          // d_0, m
  double time_headway = 0.8;     // T, s
  double lateral_accel = 4.0;    // comfortable curve limit, m/s^2
  double curvature_threshold = 0.05;  // 1/m, curve detection
};

/// Intelligent Driver Model acceleration. Without a leader only the free
/// road term applies. The gap d must be positive when a leader is given.
inline double idm_accel(double v_follow, std::optional<double> v_lead, std::optional<double> gap,
                        const IdmParams& p, double cruise_override = -1.0) {
  const double v_c = cruise_override > 0.0 ? cruise_override : p.cruise_velocity;
  if (v_c <= 0.0) throw std::domain_error("idm_accel: cruise velocity must be > 0");
  const double free_term = p.max_accel * (1.0 - std::pow(v_follow / v_c, p.exponent));
  if (!v_lead.has_value() || !gap.has_value()) return free_term;
  const double d = *gap;
  if (d <= 0.0) throw std::domain_error("idm_accel: leader gap must be > 0");
  const double dv = v_follow - *v_lead;
  const double interaction =
      (p.min_gap + v_follow * p.time_headway) / d +
      v_follow * dv / (2.0 * d * std::sqrt(p.max_accel * p.comfort_decel));
  return free_term - p.max_accel * interaction * interaction;
}

/// Effective cruise velocity at arclength l: if a bounded curve lies ahead,
/// the cruise velocity is capped so that the comfortable lateral acceleration
/// is not exceeded at the curve's peak curvature.
inline double curve_cruise_velocity(const Path& path, double l, const IdmParams& p) {
  const auto curve = max_curvature_ahead(path, l, p.curvature_threshold);
  if (!curve.found || curve.kappa_max <= 0.0) return p.cruise_velocity;
  return std::min(p.cruise_velocity, std::sqrt(p.lateral_accel / curve.kappa_max));
}

/// Deceleration that brings the vehicle to rest exactly after dist_to_stop,
/// floored at the physical limit. At rest, or once the stop point is passed,
/// the maneuver degenerates to holding still / full braking.
inline double stop_maneuver_accel(double v, double dist_to_stop, double floor_decel = -4.0) {
  if (v <= 0.0) return 0.0;
  if (dist_to_stop <= 0.0) return floor_decel;
  return std::max(-v * v / (2.0 * dist_to_stop), floor_decel);
}

struct IidmParams {
  double accel_gain_threshold = 0.2;  // m/s^2, incentive threshold
  double safe_decel = -2.0;           // m/s^2, follower safety bound b_s
  double politeness = 1.0;            // p
  double projection_window = 50.0;    // m, decision range before the crossing
};

/// A vehicle on the main road, described in that path's arclength frame.
struct MainRoadCar {
  double longitudinal = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

struct MergeDecision {
  bool merge = false;
  double driver_accel = 0.0;       // executed: merging accel or stop maneuver
  double merging_accel = 0.0;      // a~_d
  double stop_accel = 0.0;         // a_d
  double follower_accel = 0.0;     // a~_f (0 when no follower)
  bool has_follower = false;
  double incentive_gain = 0.0;
  bool safety_ok = true;
};

struct MergeScene {
  double driver_velocity = 0.0;
  double driver_arclength = 0.0;        // on the merging path
  double dist_to_stop_line = 0.0;       // along the merging path, may be < 0
  double conflict_arclength_ego = 0.0;  // crossing position on the merging path
  double conflict_arclength_main = 0.0; // crossing position on the main path
};

namespace detail {

struct Neighbors {
  const MainRoadCar* leader = nullptr;
  const MainRoadCar* follower = nullptr;
  double lead_gap = 0.0;
  double follow_gap = 0.0;
};

inline Neighbors neighbors_around(const std::vector<MainRoadCar>& cars, double position) {
  Neighbors n;
  for (const auto& c : cars) {
    const double rel = c.longitudinal - position;
    if (rel > 0.0) {
      if (!n.leader || rel < n.lead_gap) {
        n.leader = &c;
        n.lead_gap = rel;
      }
    } else {
      if (!n.follower || -rel < n.follow_gap) {
        n.follower = &c;
        n.follow_gap = -rel;
      }
    }
  }
  // touching gaps would blow up the interaction term; clamp to a sliver so
  // the decision sees an arbitrarily bad but finite acceleration
  n.lead_gap = std::max(n.lead_gap, 0.01);
  n.follow_gap = std::max(n.follow_gap, 0.01);
  return n;
}

}  // namespace detail

/// Merge decision by lane projection: the driver is virtually placed on the
/// main road, shifted back from the crossing by its own remaining distance
/// to it. Merging requires both an acceleration incentive over the stop
/// maneuver (weighted by politeness for the follower) and that the follower
/// is not forced below the safe deceleration bound.
inline MergeDecision iidm_decide(const MergeScene& scene, const std::vector<MainRoadCar>& cars,
                                 const Path& ego_path, const IdmParams& idm,
                                 const IidmParams& iidm) {
  const double dist_to_conflict = scene.conflict_arclength_ego - scene.driver_arclength;
  const double projected = scene.conflict_arclength_main - dist_to_conflict;
  const auto nb = detail::neighbors_around(cars, projected);

  const double cruise = curve_cruise_velocity(ego_path, scene.driver_arclength, idm);
  const double merging_accel =
      nb.leader ? idm_accel(scene.driver_velocity, nb.leader->velocity, nb.lead_gap, idm, cruise)
                : idm_accel(scene.driver_velocity, std::nullopt, std::nullopt, idm, cruise);
  const double stop_accel = stop_maneuver_accel(scene.driver_velocity, scene.dist_to_stop_line);

  MergeDecision d;
  d.merging_accel = merging_accel;
  d.stop_accel = stop_accel;
  d.has_follower = nb.follower != nullptr;
  d.incentive_gain = merging_accel - stop_accel;
  if (nb.follower) {
    d.follower_accel =
        idm_accel(nb.follower->velocity, scene.driver_velocity, nb.follow_gap, idm);
    d.incentive_gain += iidm.politeness * (d.follower_accel - nb.follower->acceleration);
    d.safety_ok = d.follower_accel >= iidm.safe_decel;
  }
  d.merge = d.incentive_gain > iidm.accel_gain_threshold && d.safety_ok;
  d.driver_accel = d.merge ? merging_accel : stop_accel;
  return d;
}

/// Predictive variant: forward-simulates the hypothetical merge (driver
/// accelerates behind the projected leader, main-road cars keep constant
/// velocity) and requires the incentive and safety criteria to hold at every
/// step over the whole horizon.
inline bool predictive_iidm_decide(const MergeScene& scene, const std::vector<MainRoadCar>& cars,
                                   const Path& ego_path, const IdmParams& idm,
                                   const IidmParams& iidm, double horizon, double dt) {
  if (horizon <= 0.0 || dt <= 0.0)
    throw std::invalid_argument("predictive_iidm_decide: horizon and dt must be > 0");
  const int n = static_cast<int>(std::llround(horizon / dt));

  double l = scene.driver_arclength;
  double v = scene.driver_velocity;
  std::vector<MainRoadCar> moved = cars;
  for (int k = 0; k <= n; ++k) {
    const double t = k * dt;
    for (std::size_t i = 0; i < cars.size(); ++i)
      moved[i].longitudinal = cars[i].longitudinal + cars[i].velocity * t;

    MergeScene step = scene;
    step.driver_arclength = l;
    step.driver_velocity = v;
    step.dist_to_stop_line = scene.dist_to_stop_line - (l - scene.driver_arclength);
    const MergeDecision d = iidm_decide(step, moved, ego_path, idm, iidm);
    if (!d.safety_ok || d.incentive_gain <= iidm.accel_gain_threshold) return false;

    v = std::max(v + d.merging_accel * dt, 0.0);
    l += v * dt;
  }
  return true;
}

}  // namespace ropt
