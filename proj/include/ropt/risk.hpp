#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ropt/geometry.hpp"
#include "ropt/profiles.hpp"

namespace ropt {

/// Planar Gaussian position uncertainty aligned with a heading: sigma_lon
/// along the heading, sigma_lat across it.
struct UncertaintyEllipse {
  Vec2 mean;
  double sigma_lon = 1.0;
  double sigma_lat = 1.0;
  double heading = 0.0;
};

struct Cov2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;
};

inline Cov2 covariance(const UncertaintyEllipse& e) {
  const double c = std::cos(e.heading);
  const double s = std::sin(e.heading);
  const double a = e.sigma_lon * e.sigma_lon;
  const double b = e.sigma_lat * e.sigma_lat;
  return {c * c * a + s * s * b, c * s * (a - b), s * s * a + c * c * b};
}

/// Probability density mass of two Gaussian-distributed positions coinciding:
/// the Gaussian of the difference evaluated at zero, clamped to [0, 1] so it
/// can act as a per-step event probability.
inline double collision_probability(const UncertaintyEllipse& e1, const UncertaintyEllipse& e2) {
  if (e1.sigma_lon <= 0.0 || e1.sigma_lat <= 0.0 || e2.sigma_lon <= 0.0 || e2.sigma_lat <= 0.0)
    throw std::domain_error("collision_probability: sigmas must be > 0");
  const Cov2 c1 = covariance(e1);
  const Cov2 c2 = covariance(e2);
  const double xx = c1.xx + c2.xx;
  const double xy = c1.xy + c2.xy;
  const double yy = c1.yy + c2.yy;
  const double det = xx * yy - xy * xy;
  if (det <= 0.0) throw std::domain_error("collision_probability: degenerate covariance");
  const Vec2 d = e2.mean - e1.mean;
  const double quad = (d.x * d.x * yy - 2.0 * d.x * d.y * xy + d.y * d.y * xx) / det;
  const double p = std::exp(-0.5 * quad) / (2.0 * M_PI * std::sqrt(det));
  return std::min(p, 1.0);
}

struct CurveRiskParams {
  double lateral_accel_max = 7.0;  // m/s^2, handling limit
  double sigma1 = 0.8;             // m/s^2, spread of the handling limit
  // evaluate the lateral acceleration as sqrt(kappa*v) instead of kappa*v^2
  bool literal_lateral_accel = false;
};

/// Probability of losing control in a curve: a Gaussian tail in the margin
/// between the demanded lateral acceleration and the handling limit, clamped
/// to [0, 1]. Zero curvature far from the limit yields a negligible value.
inline double curve_probability(double v, double kappa, const CurveRiskParams& cp) {
  if (cp.sigma1 <= 0.0) throw std::domain_error("curve_probability: sigma1 must be > 0");
  const double a_lat = cp.literal_lateral_accel ? std::sqrt(std::max(kappa * v, 0.0))
                                                : kappa * v * v;
  const double margin = std::max(cp.lateral_accel_max - std::abs(a_lat), 0.0);
  const double p = std::exp(-0.5 * margin * margin / (cp.sigma1 * cp.sigma1)) /
                   std::sqrt(2.0 * M_PI * cp.sigma1 * cp.sigma1);
  return std::min(p, 1.0);
}

struct DamageParams {
  double max_cost = 1.0e4;  // EUR
  double steepness = 0.5;   // 1/(m/s)
  double midpoint = 8.0;    // m/s
  // keep the sign printed in the source logistic, which decreases with speed
  bool literal_decreasing = false;
};

/// Expected damage cost of an event at the given impact speed. The logistic
/// increases with speed by default.
inline double damage(const DamageParams& dp, double impact_speed) {
  const double sign = dp.literal_decreasing ? 1.0 : -1.0;
  return dp.max_cost / (1.0 + std::exp(sign * dp.steepness * (impact_speed - dp.midpoint)));
}

struct RiskParams {
  double base_event_rate = 0.2;  // 1/s, background hazard tau_0^-1
  double event_dt = 0.25;        // s, converts per-step probabilities to rates;
                                 // must equal the rollout step
  CurveRiskParams curve;
  DamageParams collision_damage{1.0e4, 0.5, 8.0, false};
  DamageParams curve_damage{5.0e3, 0.8, 15.0, false};
};

struct BenefitWeights {
  double distance = 1.0e-3;  // EUR per meter traveled (b^t)
  double comfort_accel = 1.0e-3;   // EUR*s/m penalty on |accel|
  double comfort_jerk = 2.0e-4;    // EUR*s^2/m penalty on |jerk|
};

/// Per-step and aggregate results of the survival-weighted risk evaluation.
/// cost == risk - benefit holds exactly.
struct RiskBreakdown {
  double risk = 0.0;     // EUR
  double benefit = 0.0;  // EUR
  double cost = 0.0;     // EUR
  std::vector<double> survival;        // S after each step
  std::vector<double> collision_rate;  // tau_coll^-1 per step, 1/s
  std::vector<double> curve_rate;      // tau_curv^-1 per step, 1/s
};

/// Discrete survival curve for a sequence of total event rates: S after step
/// k integrates the hazard of steps 0..k. Values are non-increasing and in
/// (0, 1] for finite non-negative rates.
inline std::vector<double> survival_curve(const std::vector<double>& total_rates, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("survival_curve: dt must be > 0");
  std::vector<double> s(total_rates.size());
  double hazard = 0.0;
  for (std::size_t k = 0; k < total_rates.size(); ++k) {
    if (total_rates[k] < 0.0) throw std::domain_error("survival_curve: negative rate");
    hazard += total_rates[k] * dt;
    s[k] = std::exp(-hazard);
  }
  return s;
}

namespace detail {

inline UncertaintyEllipse ellipse_of(const TrajectoryState& s) {
  return {s.pose.world_position, s.sigma_lon, s.sigma_lat, s.pose.heading};
}

inline Vec2 velocity_vector(const TrajectoryState& s) {
  return {s.velocity * std::cos(s.pose.heading), s.velocity * std::sin(s.pose.heading)};
}

// Conservative screen: skip the Gaussian when the means are separated by
// far more than the combined spread can reach.
inline bool far_apart(const TrajectoryState& a, const TrajectoryState& b) {
  const double dx = a.pose.world_position.x - b.pose.world_position.x;
  const double dy = a.pose.world_position.y - b.pose.world_position.y;
  const double reach = 7.0 * (std::max(a.sigma_lon, a.sigma_lat) +
                              std::max(b.sigma_lon, b.sigma_lat));
  return dx * dx + dy * dy > reach * reach;
}

}  // namespace detail

/// Survival-weighted risk of an ego trajectory against constant-step
/// predictions of other agents. All trajectories must share the step size
/// and length. Sums run over the steps k = 0..N-1 (left endpoints); the
/// survival after step k already includes step k's hazard.
inline RiskBreakdown evaluate_risk(const Trajectory& ego, const std::vector<Trajectory>& others,
                                   const RiskParams& params) {
  if (ego.states.size() < 2) throw std::invalid_argument("evaluate_risk: trajectory too short");
  if (std::abs(params.event_dt - ego.dt) > 1e-12)
    throw std::invalid_argument("evaluate_risk: event_dt must match the rollout step");
  for (const auto& o : others)
    if (o.states.size() != ego.states.size() || std::abs(o.dt - ego.dt) > 1e-12)
      throw std::invalid_argument("evaluate_risk: mismatched other trajectory");

  const std::size_t n = ego.states.size() - 1;
  const double dt = ego.dt;
  RiskBreakdown out;
  out.collision_rate.resize(n);
  out.curve_rate.resize(n);
  std::vector<double> damage_rate(n);
  std::vector<double> total_rate(n);

  for (std::size_t k = 0; k < n; ++k) {
    const auto& es = ego.states[k];
    const auto ego_ellipse = detail::ellipse_of(es);
    const Vec2 ego_vel = detail::velocity_vector(es);

    double p_sum = 0.0;
    double weighted_damage = 0.0;
    for (const auto& o : others) {
      const auto& os = o.states[k];
      if (detail::far_apart(es, os)) continue;
      const double p = collision_probability(ego_ellipse, detail::ellipse_of(os));
      if (p <= 0.0) continue;
      const Vec2 rel = detail::velocity_vector(os) - ego_vel;
      p_sum += p;
      weighted_damage += p * damage(params.collision_damage, norm(rel));
    }
    const double p_coll = std::min(p_sum, 1.0);
    const double d_coll = p_sum > 0.0 ? weighted_damage / p_sum : 0.0;

    const double p_curv = curve_probability(es.velocity, es.pose.local_curvature, params.curve);
    const double d_curv = damage(params.curve_damage, es.velocity);

    out.collision_rate[k] = p_coll / dt;
    out.curve_rate[k] = p_curv / dt;
    total_rate[k] = params.base_event_rate + out.collision_rate[k] + out.curve_rate[k];
    damage_rate[k] = out.collision_rate[k] * d_coll + out.curve_rate[k] * d_curv;
  }
  out.survival = survival_curve(total_rate, dt);
  for (std::size_t k = 0; k < n; ++k) out.risk += damage_rate[k] * out.survival[k] * dt;
  out.cost = out.risk;
  return out;
}

/// Survival-discounted benefit of a trajectory: payout per meter traveled
/// minus comfort penalties on acceleration and jerk.
inline double evaluate_benefit(const Trajectory& ego, const std::vector<double>& survival,
                               const BenefitWeights& w) {
  if (ego.states.size() < 2) throw std::invalid_argument("evaluate_benefit: trajectory too short");
  if (survival.size() + 1 != ego.states.size())
    throw std::invalid_argument("evaluate_benefit: survival length mismatch");
  double benefit = 0.0;
  for (std::size_t k = 0; k + 1 < ego.states.size(); ++k) {
    const auto& s = ego.states[k];
    benefit += (w.distance * std::abs(s.velocity) - w.comfort_accel * std::abs(s.acceleration) -
                w.comfort_jerk * std::abs(s.jerk)) *
               survival[k] * ego.dt;
  }
  return benefit;
}

/// Full cost of a candidate trajectory: risk minus benefit.
inline RiskBreakdown evaluate_cost(const Trajectory& ego, const std::vector<Trajectory>& others,
                                   const RiskParams& params, const BenefitWeights& weights) {
  RiskBreakdown b = evaluate_risk(ego, others, params);
  b.benefit = evaluate_benefit(ego, b.survival, weights);
  b.cost = b.risk - b.benefit;
  return b;
}

}  // namespace ropt
