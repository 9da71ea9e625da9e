#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ropt/geometry.hpp"
#include "ropt/idm.hpp"
#include "ropt/nelder_mead.hpp"
#include "ropt/profiles.hpp"
#include "ropt/risk.hpp"

namespace ropt {

struct OptimizerConfig {
  int multi_starts = 5;        // ramp candidates per replan
  double v_seed_min = 2.0;     // m/s, lowest seed velocity
  double v_max = 12.0;         // m/s, upper velocity bound
  double ramp_duration = 2.5;  // s, fixed length of every ramp
  double accel_min = -4.0;     // m/s^2
  double accel_max = 3.0;      // m/s^2
  double penalty_weight = 1.0e6;      // EUR per unit of constraint violation
  double comfort_decel = 2.0;  // stop candidate ramp rate
  double comfort_accel = 2.0;  // accelerate candidate ramp rate
  double replan_period = 0.2;  // s between optimizations; the active profile
                               // is followed open-loop in between
  NelderMeadConfig search;
};

/// Evenly spaced seed velocities for the multi-start search.
inline std::vector<double> seed_velocities(const OptimizerConfig& opt) {
  if (opt.multi_starts < 1) throw std::invalid_argument("seed_velocities: need at least one seed");
  std::vector<double> seeds(opt.multi_starts);
  if (opt.multi_starts == 1) {
    seeds[0] = 0.5 * (opt.v_seed_min + opt.v_max);
    return seeds;
  }
  const double span = (opt.v_max - opt.v_seed_min) / (opt.multi_starts - 1);
  for (int j = 0; j < opt.multi_starts; ++j) seeds[j] = opt.v_seed_min + j * span;
  return seeds;
}

/// Soft constraint violation integral of a raw (unclamped) profile: velocity
/// outside [0, v_max] and finite-difference acceleration outside
/// [accel_min, accel_max], integrated over the horizon.
inline double constraint_penalty(const VelocityProfile& profile, const RolloutParams& rp,
                                 const OptimizerConfig& opt) {
  const std::size_t n = static_cast<std::size_t>(std::llround(rp.horizon / rp.dt));
  std::vector<double> v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) v[k] = velocity_at_raw(profile, k * rp.dt);
  double penalty = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = (v[k + 1] - v[k]) / rp.dt;
    penalty += (std::max(v[k] - opt.v_max, 0.0) + std::max(-v[k], 0.0) +
                std::max(a - opt.accel_max, 0.0) + std::max(opt.accel_min - a, 0.0)) *
               rp.dt;
  }
  return penalty;
}

/// Carries the previously selected maneuver between replans so the search
/// can warm-start from it.
struct PlannerState {
  int active_candidate = -1;
  std::optional<RampProfile> active_profile;  // present for ramp candidates
  double offset = 0.0;  // s, total time the active maneuver has been executed
};

struct OtherAgent {
  const Path* path = nullptr;
  double longitudinal = 0.0;
  double velocity = 0.0;
};

struct CandidateReport {
  int index = 0;
  std::string label;
  double cost = 0.0;       // risk - benefit, EUR
  double penalty = 0.0;    // constraint violation integral
  double objective = 0.0;  // cost + weighted penalty
};

struct PlanResult {
  VelocityProfile profile;
  Trajectory trajectory;
  RiskBreakdown breakdown;
  PlannerState state;
  std::vector<CandidateReport> candidates;
};

namespace detail {

/// Shifts the stored maneuver to the new time origin and, whenever the
/// executed offset crosses a multiple of the ramp duration, re-parametrizes
/// it with one more ramp. The insertion never changes the velocity signal:
/// the new ramp holds the velocity that was already held at its position;
/// it only gives the optimizer a fresh pair of ramps to work with.
inline void advance_active_profile(PlannerState& state, double elapsed, double ramp_duration) {
  if (!state.active_profile || elapsed <= 0.0) return;
  RampProfile& prof = *state.active_profile;
  for (auto& r : prof.ramps) r.start -= elapsed;

  const double old_offset = state.offset;
  state.offset += elapsed;
  prof.offset = state.offset;

  const auto crossings = [&](double offset) {
    return static_cast<long long>(std::floor(offset / ramp_duration + 1e-9));
  };
  long long pending = crossings(state.offset) - crossings(old_offset);
  while (pending-- > 0 && prof.ramps.size() >= 2) {
    Ramp& last = prof.ramps.back();
    if (last.start < ramp_duration) {
      Ramp next;
      next.start = last.start + last.duration;
      next.duration = ramp_duration;
      next.end_velocity = last.end_velocity;
      prof.ramps.push_back(next);
    } else {
      const Ramp& before = prof.ramps[prof.ramps.size() - 2];
      Ramp held;
      held.start = std::max(last.start - ramp_duration, before.start + before.duration);
      held.duration = ramp_duration;
      held.end_velocity = before.end_velocity;
      prof.ramps.insert(prof.ramps.end() - 1, held);
    }
  }
}

struct RampDofs {
  double v1 = 0.0;
  double v2 = 0.0;
  double s2 = 0.0;
};

inline RampDofs extract_dofs(const RampProfile& prof) {
  const std::size_t n = prof.ramps.size();
  return {prof.ramps[n - 2].end_velocity, prof.ramps[n - 1].end_velocity,
          prof.ramps[n - 1].start};
}

inline RampProfile with_dofs(const RampProfile& base, const RampDofs& d) {
  RampProfile prof = base;
  const std::size_t n = prof.ramps.size();
  prof.ramps[n - 2].end_velocity = d.v1;
  prof.ramps[n - 1].end_velocity = d.v2;
  prof.ramps[n - 1].start = std::max(d.s2, prof.ramps[n - 2].start);
  return make_ramp_profile(prof.v0, prof.ramps, prof.offset);
}

}  // namespace detail

/// One replanning step: optimizes the last two ramps of each double-ramp
/// candidate (multi-start over seed velocities, warm-started from the
/// previously selected maneuver), evaluates the three fixed fallbacks, and
/// selects the candidate with the lowest risk-minus-benefit cost. Ties go to
/// the lowest candidate index.
inline PlanResult plan_step(const Path& ego_path, double ego_l, double ego_v,
                            const std::vector<OtherAgent>& others, const RiskParams& risk,
                            const BenefitWeights& weights, const OptimizerConfig& opt,
                            const RolloutParams& rp, PlannerState state,
                            double elapsed_since_last_plan) {
  detail::advance_active_profile(state, elapsed_since_last_plan, opt.ramp_duration);

  std::vector<Trajectory> other_trajs;
  other_trajs.reserve(others.size());
  for (const auto& o : others) other_trajs.push_back(extrapolate_constant(*o.path, o.longitudinal, o.velocity, rp));

  const auto evaluate = [&](const VelocityProfile& prof) {
    const Trajectory traj = rollout(prof, ego_path, ego_l, rp);
    RiskBreakdown b = evaluate_cost(traj, other_trajs, risk, weights);
    return std::pair<double, RiskBreakdown>(b.cost, std::move(b));
  };

  const auto seeds = seed_velocities(opt);
  const int n_ramp = opt.multi_starts;
  const int idx_constant = n_ramp;
  const int idx_stop = n_ramp + 1;
  const int idx_accel = n_ramp + 2;

  struct Scored {
    VelocityProfile profile;
    double cost = 0.0;
    double penalty = 0.0;
    double objective = std::numeric_limits<double>::infinity();
    std::string label;
  };
  std::vector<Scored> scored(n_ramp + 3);

  for (int j = 0; j < n_ramp; ++j) {
    RampProfile base;
    if (j == state.active_candidate && state.active_profile &&
        state.active_profile->ramps.size() >= 2) {
      base = *state.active_profile;
    } else {
      base.v0 = ego_v;
      base.ramps = {{0.0, seeds[j], opt.ramp_duration},
                    {opt.ramp_duration, seeds[j], opt.ramp_duration}};
    }

    const auto build = [&](const std::vector<double>& z) {
      detail::RampDofs d;
      d.v1 = std::clamp(z[0], 0.0, 1.0) * opt.v_max;
      d.v2 = std::clamp(z[1], 0.0, 1.0) * opt.v_max;
      d.s2 = std::clamp(z[2], 0.0, 1.0) * rp.horizon;
      return detail::with_dofs(base, d);
    };
    const auto objective = [&](const std::vector<double>& z) {
      const VelocityProfile prof = build(z);
      return evaluate(prof).first + opt.penalty_weight * constraint_penalty(prof, rp, opt);
    };

    const auto d0 = detail::extract_dofs(base);
    const std::vector<double> z0 = {d0.v1 / opt.v_max, d0.v2 / opt.v_max, d0.s2 / rp.horizon};
    const auto found = nelder_mead(objective, z0, opt.search);

    auto& s = scored[j];
    s.profile = build(found.x);
    s.penalty = constraint_penalty(s.profile, rp, opt);
    s.cost = evaluate(s.profile).first;
    s.objective = s.cost + opt.penalty_weight * s.penalty;
    s.label = "ramp" + std::to_string(j);
  }

  const auto score_fixed = [&](int idx, VelocityProfile prof, const char* label) {
    auto& s = scored[idx];
    s.profile = std::move(prof);
    s.penalty = constraint_penalty(s.profile, rp, opt);
    s.cost = evaluate(s.profile).first;
    s.objective = s.cost + opt.penalty_weight * s.penalty;
    s.label = label;
  };
  score_fixed(idx_constant, make_constant_profile(ego_v), "constant");
  score_fixed(idx_stop, make_stop_profile(ego_v, opt.comfort_decel), "stop");
  score_fixed(idx_accel, make_accelerate_profile(ego_v, opt.v_max, opt.comfort_accel), "accelerate");

  int best = 0;
  for (int i = 1; i < static_cast<int>(scored.size()); ++i)
    if (scored[i].objective < scored[best].objective) best = i;

  PlanResult result;
  result.profile = scored[best].profile;
  const auto final_eval = evaluate(result.profile);
  result.trajectory = rollout(result.profile, ego_path, ego_l, rp);
  result.breakdown = final_eval.second;

  PlannerState next;
  next.active_candidate = best;
  next.offset = best == state.active_candidate ? state.offset : 0.0;
  if (best < n_ramp) next.active_profile = std::get<RampProfile>(scored[best].profile);
  result.state = next;

  result.candidates.reserve(scored.size());
  for (int i = 0; i < static_cast<int>(scored.size()); ++i)
    result.candidates.push_back(
        {i, scored[i].label, scored[i].cost, scored[i].penalty, scored[i].objective});
  return result;
}

}  // namespace ropt
