#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ropt/geometry.hpp"
#include "ropt/idm.hpp"
#include "ropt/planner.hpp"
#include "ropt/profiles.hpp"
#include "ropt/risk.hpp"

namespace ropt {

enum class PlannerKind { Ropt, Iidm, PredictiveIidm };

inline const char* planner_name(PlannerKind k) {
  switch (k) {
    case PlannerKind::Ropt: return "ropt";
    case PlannerKind::Iidm: return "iidm";
    case PlannerKind::PredictiveIidm: return "predictive_iidm";
  }
  return "unknown";
}

inline std::optional<PlannerKind> planner_from_name(const std::string& s) {
  if (s == "ropt") return PlannerKind::Ropt;
  if (s == "iidm") return PlannerKind::Iidm;
  if (s == "predictive_iidm") return PlannerKind::PredictiveIidm;
  return std::nullopt;
}

struct ScenarioConfig {
  double traffic_velocity = 10.0;   // m/s, constant main-road speed
  double mean_headway = 3.0;        // s, default spawn headway (lambda)
  double headway_noise = 0.5;       // s, uniform jitter half-width
  double min_headway = 1.0;         // s, truncation floor
  double backfill_duration = 40.0;  // s of stream generated before t = 0
  double sim_dt = 0.1;              // s
  double timeout = 120.0;           // s
  double ego_start_velocity = 5.0;  // m/s
  double crash_distance = 1.0;      // m, center distance counting as a crash
  double despawn_past_conflict = 100.0;  // m beyond the crossing
  double merge_speed_tolerance = 0.5;    // m/s, stability completion band
  double merge_stable_duration = 3.0;    // s of non-decreasing neighbor gaps
  double abort_margin = 5.0;        // m before the crossing an abort aims for; far
                                    // enough back that a completed stop clears the
                                    // crossing traffic, so only overshoots get hit
  double distance_capture_margin = 5.0;  // m before the crossing where
                                         // neighbor distances start recording
};

/// Full experiment description: the two paths, their crossing, and every
/// model parameter set. Immutable during an episode.
struct Scenario {
  std::vector<Vec2> ego_waypoints;   // raw inputs, kept for serialization
  std::vector<Vec2> main_waypoints;
  Path ego_path;
  Path main_path;
  IntersectionPoint conflict;
  double stop_line_arclength = 0.0;
  ScenarioConfig config;
  RiskParams risk;
  BenefitWeights benefit;
  IdmParams idm;
  IidmParams iidm;
  OptimizerConfig optimizer;
  RolloutParams rollout;
};

/// Right-turn merge onto a straight priority road: 40 m approach, a quarter
/// circle of 10 m radius, then 100 m along the priority road. The stop line
/// sits at the curve entry.
inline Scenario make_default_scenario() {
  Scenario sc;
  sc.ego_waypoints.push_back({0.0, -50.0});
  sc.ego_waypoints.push_back({0.0, -10.0});
  const Vec2 center{10.0, -10.0};
  for (int i = 1; i <= 45; ++i) {  // 2 degree steps from west to north of center
    const double psi = M_PI - (M_PI / 2.0) * i / 45.0;
    sc.ego_waypoints.push_back(center + Vec2{10.0 * std::cos(psi), 10.0 * std::sin(psi)});
  }
  sc.ego_waypoints.push_back({110.0, 0.0});
  sc.main_waypoints = {{-140.0, 0.0}, {0.0, 0.0}, {160.0, 0.0}};
  sc.ego_path = build_path(sc.ego_waypoints);
  sc.main_path = build_path(sc.main_waypoints);

  const auto crossing = find_intersection(sc.ego_path, sc.main_path);
  if (!crossing) throw std::logic_error("make_default_scenario: paths do not cross");
  sc.conflict = *crossing;
  sc.stop_line_arclength = 40.0;
  // committed merges sprint through the curve near the handling limit; a
  // comfort-level bound would stretch the crossing long enough that no
  // accepted gap could survive the approach
  sc.idm.lateral_accel = 7.0;
  return sc;
}

/// Recomputes the crossing; call after replacing either path.
inline void refresh_conflict(Scenario& sc) {
  const auto crossing = find_intersection(sc.ego_path, sc.main_path);
  if (!crossing) throw std::invalid_argument("scenario paths do not cross");
  sc.conflict = *crossing;
}

/// Spawn times of the main-road stream: noisy headways around the mean,
/// truncated below, generated from before episode start so the road is
/// already populated at t = 0. Deterministic in (config, lambda, seed).
inline std::vector<double> generate_traffic(const ScenarioConfig& cfg, double lambda,
                                            std::uint64_t seed) {
  if (lambda <= 0.0) throw std::invalid_argument("generate_traffic: lambda must be > 0");
  std::mt19937_64 rng(seed);
  std::vector<double> spawns;
  double t = -cfg.backfill_duration;
  const double until = cfg.timeout + lambda + cfg.headway_noise;
  while (true) {
    double h = lambda;
    if (cfg.headway_noise > 0.0) {
      std::uniform_real_distribution<double> jitter(-cfg.headway_noise, cfg.headway_noise);
      h += jitter(rng);
    }
    t += std::max(h, cfg.min_headway);
    if (t > until) break;
    spawns.push_back(t);
  }
  return spawns;
}

enum class EpisodeStatus { Merged, Crash, Starved, PlannerError };

inline const char* status_name(EpisodeStatus s) {
  switch (s) {
    case EpisodeStatus::Merged: return "merged";
    case EpisodeStatus::Crash: return "crash";
    case EpisodeStatus::Starved: return "starved";
    case EpisodeStatus::PlannerError: return "planner_error";
  }
  return "unknown";
}

enum class EventKind { MergeCommit, CurveLimited, SafetyAbort, AbortStop, Crash, Merged };

inline const char* event_name(EventKind k) {
  switch (k) {
    case EventKind::MergeCommit: return "merge_commit";
    case EventKind::CurveLimited: return "curve_limited";
    case EventKind::SafetyAbort: return "safety_abort";
    case EventKind::AbortStop: return "abort_stop";
    case EventKind::Crash: return "crash";
    case EventKind::Merged: return "merged";
  }
  return "unknown";
}

struct EpisodeEvent {
  double time = 0.0;
  EventKind kind = EventKind::MergeCommit;
  double ego_longitudinal = 0.0;
  double ego_velocity = 0.0;
  double value = 0.0;  // event-specific: distance to crossing, follower accel, ...
};

struct EpisodeRecord {
  std::uint64_t seed = 0;
  PlannerKind planner = PlannerKind::Ropt;
  double lambda = 0.0;
  double param = 0.0;  // politeness (IDM variants) or distance weight in EUR/km
  EpisodeStatus status = EpisodeStatus::Starved;
  bool merged = false;
  bool crash = false;
  double d_back_min = std::numeric_limits<double>::infinity();
  double d_front_min = std::numeric_limits<double>::infinity();
  int n_gap = 0;
  double t_gap = std::numeric_limits<double>::quiet_NaN();
  double merge_start_time = std::numeric_limits<double>::quiet_NaN();
  double merge_end_time = std::numeric_limits<double>::quiet_NaN();
  double end_time = 0.0;
  std::vector<EpisodeEvent> events;
};

namespace detail {

struct EgoPhase {
  enum Kind { Approach, Merging, Aborting } kind = Approach;
};

struct StabilityTracker {
  double since = -1.0;  // start of the candidate stable window
  double last_front = std::numeric_limits<double>::infinity();
  double last_back = std::numeric_limits<double>::infinity();

  void reset() { since = -1.0; }

  // distances may be infinite when a neighbor is missing; treat a missing
  // neighbor as trivially non-approaching
  void update(double t, bool speed_ok, double front, double back) {
    const bool front_ok = !(front < last_front - 0.01);
    const bool back_ok = !(back < last_back - 0.01);
    last_front = front;
    last_back = back;
    if (!speed_ok || !front_ok || !back_ok) {
      since = -1.0;
      return;
    }
    if (since < 0.0) since = t;
  }

  bool stable_for(double t, double duration) const { return since >= 0.0 && t - since >= duration; }
};

}  // namespace detail

/// Runs one merge episode and returns its outcome and indicators.
/// `lambda` is the mean spawn headway;`param` is the politeness factor for
/// the IDM-family planners and the distance payout in EUR/km for the
/// risk-optimal planner. Fully deterministic in its arguments.
inline EpisodeRecord run_episode(const Scenario& sc, PlannerKind kind, double lambda, double param,
                                 std::uint64_t seed, std::ostream* step_log = nullptr) {
  const ScenarioConfig& cfg = sc.config;
  const double conflict_ego = sc.conflict.arclength_a;
  const double conflict_main = sc.conflict.arclength_b;
  const double despawn_l = std::min(conflict_main + cfg.despawn_past_conflict, sc.main_path.length());
  const double v_f = cfg.traffic_velocity;

  IidmParams iidm = sc.iidm;
  BenefitWeights weights = sc.benefit;
  if (kind == PlannerKind::Ropt)
    weights.distance = param / 1000.0;  // EUR/km -> EUR/m
  else
    iidm.politeness = param;

  const std::vector<double> spawns = generate_traffic(cfg, lambda, seed);

  EpisodeRecord rec;
  rec.seed = seed;
  rec.planner = kind;
  rec.lambda = lambda;
  rec.param = param;

  double ego_l = 0.0;
  double ego_v = cfg.ego_start_velocity;
  PlannerState planner_state;
  std::optional<VelocityProfile> held_profile;  // last plan, followed between replans
  std::string held_label;
  double plan_age = 0.0;
  detail::EgoPhase phase;
  detail::StabilityTracker stability;
  bool curve_limit_reported = false;
  double cross_time = std::numeric_limits<double>::quiet_NaN();
  double end_time = cfg.timeout;
  EpisodeStatus status = EpisodeStatus::Starved;

  const auto emit = [&](double t, EventKind ek, double value) {
    rec.events.push_back({t, ek, ego_l, ego_v, value});
  };

  const int n_steps = static_cast<int>(std::llround(cfg.timeout / cfg.sim_dt));
  std::vector<MainRoadCar> cars;
  for (int step = 0; step < n_steps; ++step) {
    const double t = step * cfg.sim_dt;

    cars.clear();
    for (const double s : spawns) {
      const double l = (t - s) * v_f;
      if (l < 0.0) break;  // spawns are sorted; later cars are further back
      if (l <= despawn_l) cars.push_back({l, v_f, 0.0});
    }

    std::string phase_label = "approach";
    if (kind == PlannerKind::Ropt) {
      const bool replan = !held_profile || plan_age + 0.5 * cfg.sim_dt >= sc.optimizer.replan_period;
      if (replan) {
        std::vector<OtherAgent> others;
        const double ego_main_proj = conflict_main - (conflict_ego - ego_l);
        for (const auto& c : cars) {
          const bool reachable =
              c.longitudinal + v_f * sc.rollout.horizon >= ego_main_proj - 30.0 &&
              c.longitudinal <= ego_main_proj + sc.optimizer.v_max * sc.rollout.horizon + 30.0;
          if (reachable) others.push_back({&sc.main_path, c.longitudinal, c.velocity});
        }
        const PlanResult plan = plan_step(sc.ego_path, ego_l, ego_v, others, sc.risk, weights,
                                          sc.optimizer, sc.rollout, planner_state, plan_age);
        planner_state = plan.state;
        held_profile = plan.profile;
        held_label = plan.candidates[planner_state.active_candidate].label;
        plan_age = 0.0;
      }
      const double v_now = velocity_at(*held_profile, plan_age);
      const double v_next = velocity_at(*held_profile, plan_age + cfg.sim_dt);
      ego_l += 0.5 * (v_now + v_next) * cfg.sim_dt;
      ego_v = v_next;
      plan_age += cfg.sim_dt;
      phase_label = held_label;
    } else {
      MergeScene scene;
      scene.driver_velocity = ego_v;
      scene.driver_arclength = ego_l;
      scene.dist_to_stop_line = sc.stop_line_arclength - ego_l;
      scene.conflict_arclength_ego = conflict_ego;
      scene.conflict_arclength_main = conflict_main;
      const double dist_to_conflict = conflict_ego - ego_l;

      double accel = 0.0;
      switch (phase.kind) {
        case detail::EgoPhase::Approach: {
          // drive freely until stopping at the line requires comfort-level
          // braking, then execute the stop maneuver; this is the same
          // baseline behavior the merge incentive assumes for staying
          const double free_accel = idm_accel(ego_v, std::nullopt, std::nullopt, sc.idm,
                                              curve_cruise_velocity(sc.ego_path, ego_l, sc.idm));
          const double stop_accel = stop_maneuver_accel(ego_v, scene.dist_to_stop_line);
          const bool must_brake =
              -stop_accel >= sc.idm.comfort_decel || scene.dist_to_stop_line <= 0.5;
          accel = must_brake ? stop_accel : free_accel;
          if (dist_to_conflict <= iidm.projection_window && dist_to_conflict > 0.0) {
            bool merge = false;
            const MergeDecision d = iidm_decide(scene, cars, sc.ego_path, sc.idm, iidm);
            if (kind == PlannerKind::Iidm)
              merge = d.merge;
            else
              // predicting at the integration step keeps the forward model
              // aligned with the simulated merge; a coarser step lets
              // hairline-margin commits slip through and abort late
              merge = predictive_iidm_decide(scene, cars, sc.ego_path, sc.idm, iidm,
                                             sc.rollout.horizon, cfg.sim_dt);
            if (merge) {
              phase.kind = detail::EgoPhase::Merging;
              emit(t, EventKind::MergeCommit, d.incentive_gain);
              accel = d.merging_accel;
            }
          }
          phase_label = "approach";
          break;
        }
        case detail::EgoPhase::Merging: {
          const MergeDecision d = iidm_decide(scene, cars, sc.ego_path, sc.idm, iidm);
          accel = d.merging_accel;
          const double cruise = curve_cruise_velocity(sc.ego_path, ego_l, sc.idm);
          if (!curve_limit_reported && cruise < sc.idm.cruise_velocity) {
            emit(t, EventKind::CurveLimited, cruise);
            curve_limit_reported = true;
          }
          if (ego_l < conflict_ego && d.has_follower && !d.safety_ok) {
            phase.kind = detail::EgoPhase::Aborting;
            emit(t, EventKind::SafetyAbort, d.follower_accel);
            accel = stop_maneuver_accel(ego_v, conflict_ego - cfg.abort_margin - ego_l);
          }
          phase_label = "merging";
          break;
        }
        case detail::EgoPhase::Aborting: {
          accel = stop_maneuver_accel(ego_v, conflict_ego - cfg.abort_margin - ego_l);
          if (ego_v <= 1e-3) {
            phase.kind = detail::EgoPhase::Approach;
            emit(t, EventKind::AbortStop, conflict_ego - ego_l);
          }
          phase_label = "aborting";
          break;
        }
      }
      ego_v = std::max(ego_v + accel * cfg.sim_dt, 0.0);
      ego_l += ego_v * cfg.sim_dt;
    }

    const double t_next = (step + 1) * cfg.sim_dt;
    if (!std::isfinite(ego_v) || !std::isfinite(ego_l)) {
      status = EpisodeStatus::PlannerError;
      end_time = t_next;
      break;
    }
    if (std::isnan(cross_time) && ego_l >= conflict_ego) {
      cross_time = t_next;
      if (std::isnan(rec.merge_start_time)) rec.merge_start_time = t_next;
    }

    // neighbor distances in the main road's arclength frame, once the ego
    // is entering the lane
    const double ego_main_proj = conflict_main - (conflict_ego - ego_l);
    double front = std::numeric_limits<double>::infinity();
    double back = std::numeric_limits<double>::infinity();
    for (const auto& c : cars) {
      const double lc = c.longitudinal + c.velocity * cfg.sim_dt;  // after this step
      if (lc > despawn_l) continue;
      const double rel = lc - ego_main_proj;
      if (rel >= 0.0)
        front = std::min(front, rel);
      else
        back = std::min(back, -rel);
    }
    if (ego_l >= conflict_ego - cfg.distance_capture_margin) {
      rec.d_front_min = std::min(rec.d_front_min, front);
      rec.d_back_min = std::min(rec.d_back_min, back);
    }

    const PathPose ego_pose = pose_at_extended(sc.ego_path, ego_l);
    bool crashed = false;
    for (const auto& c : cars) {
      const double lc = c.longitudinal + c.velocity * cfg.sim_dt;
      if (lc > despawn_l) continue;
      const PathPose cp = pose_at_extended(sc.main_path, lc);
      if (distance(ego_pose.world_position, cp.world_position) < cfg.crash_distance) {
        crashed = true;
        break;
      }
    }
    if (crashed) {
      status = EpisodeStatus::Crash;
      end_time = t_next;
      emit(t_next, EventKind::Crash, 0.0);
      break;
    }

    if (ego_l >= sc.ego_path.length()) {
      status = EpisodeStatus::Merged;
      end_time = t_next;
      rec.merge_end_time = t_next;
      emit(t_next, EventKind::Merged, 0.0);
      break;
    }
    if (ego_l > conflict_ego) {
      const bool speed_ok = std::abs(ego_v - v_f) < cfg.merge_speed_tolerance;
      stability.update(t_next, speed_ok, front, back);
      if (stability.stable_for(t_next, cfg.merge_stable_duration)) {
        status = EpisodeStatus::Merged;
        end_time = t_next;
        rec.merge_end_time = t_next;
        emit(t_next, EventKind::Merged, 0.0);
        break;
      }
    }

    if (step_log) {
      *step_log << "t=" << t_next << " l=" << ego_l << " v=" << ego_v << " state=" << phase_label
                << " cars=" << cars.size() << " d_front=" << front << " d_back=" << back << "\n";
    }
  }

  rec.status = status;
  rec.merged = status == EpisodeStatus::Merged;
  rec.crash = status == EpisodeStatus::Crash;
  rec.end_time = end_time;

  // gap bookkeeping against the conflict-point arrival times of the stream
  std::vector<double> arrivals;
  arrivals.reserve(spawns.size());
  for (const double s : spawns) arrivals.push_back(s + conflict_main / v_f);
  const double ref = std::isnan(cross_time) ? end_time : cross_time;
  int n_gap = 0;
  for (const double a : arrivals)
    if (a > 0.0 && a <= ref) ++n_gap;
  rec.n_gap = n_gap;
  if (!std::isnan(cross_time)) {
    auto next = std::upper_bound(arrivals.begin(), arrivals.end(), cross_time);
    if (next == arrivals.begin() || next == arrivals.end())
      rec.t_gap = std::numeric_limits<double>::infinity();
    else
      rec.t_gap = *next - *(next - 1);
  }
  return rec;
}

}  // namespace ropt
