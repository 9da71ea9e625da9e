#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ropt/sim.hpp"

namespace ropt {

namespace detail {

using nlohmann::json;

inline json points_to_json(const std::vector<Vec2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back(json::array({p.x, p.y}));
  return arr;
}

inline std::vector<Vec2> points_from_json(const json& arr) {
  std::vector<Vec2> pts;
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2)
      throw std::invalid_argument("scenario: path points must be [x, y] pairs");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

template <typename T>
inline void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

/// Serializes every model parameter and the raw path waypoints. The output
/// is canonical: loading and saving again reproduces the bytes.
inline nlohmann::json scenario_to_json(const Scenario& sc) {
  using nlohmann::json;
  json j;
  j["paths"]["ego"] = detail::points_to_json(sc.ego_waypoints);
  j["paths"]["main"] = detail::points_to_json(sc.main_waypoints);
  j["stop_line_arclength"] = sc.stop_line_arclength;

  json& c = j["scenario"];
  c["traffic_velocity"] = sc.config.traffic_velocity;
  c["mean_headway"] = sc.config.mean_headway;
  c["headway_noise"] = sc.config.headway_noise;
  c["min_headway"] = sc.config.min_headway;
  c["backfill_duration"] = sc.config.backfill_duration;
  c["sim_dt"] = sc.config.sim_dt;
  c["timeout"] = sc.config.timeout;
  c["ego_start_velocity"] = sc.config.ego_start_velocity;
  c["crash_distance"] = sc.config.crash_distance;
  c["despawn_past_conflict"] = sc.config.despawn_past_conflict;
  c["merge_speed_tolerance"] = sc.config.merge_speed_tolerance;
  c["merge_stable_duration"] = sc.config.merge_stable_duration;
  c["abort_margin"] = sc.config.abort_margin;
  c["distance_capture_margin"] = sc.config.distance_capture_margin;

  json& r = j["risk"];
  r["base_event_rate"] = sc.risk.base_event_rate;
  r["event_dt"] = sc.risk.event_dt;
  r["curve"]["lateral_accel_max"] = sc.risk.curve.lateral_accel_max;
  r["curve"]["sigma1"] = sc.risk.curve.sigma1;
  r["curve"]["literal_lateral_accel"] = sc.risk.curve.literal_lateral_accel;
  r["collision_damage"]["max_cost"] = sc.risk.collision_damage.max_cost;
  r["collision_damage"]["steepness"] = sc.risk.collision_damage.steepness;
  r["collision_damage"]["midpoint"] = sc.risk.collision_damage.midpoint;
  r["collision_damage"]["literal_decreasing"] = sc.risk.collision_damage.literal_decreasing;
  r["curve_damage"]["max_cost"] = sc.risk.curve_damage.max_cost;
  r["curve_damage"]["steepness"] = sc.risk.curve_damage.steepness;
  r["curve_damage"]["midpoint"] = sc.risk.curve_damage.midpoint;
  r["curve_damage"]["literal_decreasing"] = sc.risk.curve_damage.literal_decreasing;

  json& b = j["benefit"];
  b["distance_eur_per_km"] = sc.benefit.distance * 1000.0;
  b["comfort_accel"] = sc.benefit.comfort_accel;
  b["comfort_jerk"] = sc.benefit.comfort_jerk;

  json& i = j["idm"];
  i["max_accel"] = sc.idm.max_accel;
  i["comfort_decel"] = sc.idm.comfort_decel;
  i["exponent"] = sc.idm.exponent;
  i["cruise_velocity"] = sc.idm.cruise_velocity;
  i["min_gap"] = sc.idm.min_gap;
  i["time_headway"] = sc.idm.time_headway;
  i["lateral_accel"] = sc.idm.lateral_accel;
  i["curvature_threshold"] = sc.idm.curvature_threshold;

  json& m = j["iidm"];
  m["accel_gain_threshold"] = sc.iidm.accel_gain_threshold;
  m["safe_decel"] = sc.iidm.safe_decel;
  m["politeness"] = sc.iidm.politeness;
  m["projection_window"] = sc.iidm.projection_window;

  json& o = j["optimizer"];
  o["multi_starts"] = sc.optimizer.multi_starts;
  o["v_seed_min"] = sc.optimizer.v_seed_min;
  o["v_max"] = sc.optimizer.v_max;
  o["ramp_duration"] = sc.optimizer.ramp_duration;
  o["accel_min"] = sc.optimizer.accel_min;
  o["accel_max"] = sc.optimizer.accel_max;
  o["penalty_weight"] = sc.optimizer.penalty_weight;
  o["comfort_decel"] = sc.optimizer.comfort_decel;
  o["comfort_accel"] = sc.optimizer.comfort_accel;
  o["replan_period"] = sc.optimizer.replan_period;
  o["search"]["max_iterations"] = sc.optimizer.search.max_iterations;
  o["search"]["tolerance"] = sc.optimizer.search.tolerance;
  o["search"]["initial_step"] = sc.optimizer.search.initial_step;

  json& ro = j["rollout"];
  ro["horizon"] = sc.rollout.horizon;
  ro["dt"] = sc.rollout.dt;
  ro["sigma0_lon"] = sc.rollout.sigma0_lon;
  ro["sigma0_lat"] = sc.rollout.sigma0_lat;
  ro["growth"] = sc.rollout.growth;
  return j;
}

/// Builds a scenario from JSON. Missing fields keep the defaults of
/// make_default_scenario(); paths are rebuilt and the crossing is
/// recomputed, so the file only carries raw waypoints.
inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario sc = make_default_scenario();
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    if (p.contains("ego")) {
      sc.ego_waypoints = detail::points_from_json(p.at("ego"));
      sc.ego_path = build_path(sc.ego_waypoints);
    }
    if (p.contains("main")) {
      sc.main_waypoints = detail::points_from_json(p.at("main"));
      sc.main_path = build_path(sc.main_waypoints);
    }
  }
  detail::read_field(j, "stop_line_arclength", sc.stop_line_arclength);

  if (j.contains("scenario")) {
    const auto& c = j.at("scenario");
    detail::read_field(c, "traffic_velocity", sc.config.traffic_velocity);
    detail::read_field(c, "mean_headway", sc.config.mean_headway);
    detail::read_field(c, "headway_noise", sc.config.headway_noise);
    detail::read_field(c, "min_headway", sc.config.min_headway);
    detail::read_field(c, "backfill_duration", sc.config.backfill_duration);
    detail::read_field(c, "sim_dt", sc.config.sim_dt);
    detail::read_field(c, "timeout", sc.config.timeout);
    detail::read_field(c, "ego_start_velocity", sc.config.ego_start_velocity);
    detail::read_field(c, "crash_distance", sc.config.crash_distance);
    detail::read_field(c, "despawn_past_conflict", sc.config.despawn_past_conflict);
    detail::read_field(c, "merge_speed_tolerance", sc.config.merge_speed_tolerance);
    detail::read_field(c, "merge_stable_duration", sc.config.merge_stable_duration);
    detail::read_field(c, "abort_margin", sc.config.abort_margin);
    detail::read_field(c, "distance_capture_margin", sc.config.distance_capture_margin);
  }
  if (j.contains("risk")) {
    const auto& r = j.at("risk");
    detail::read_field(r, "base_event_rate", sc.risk.base_event_rate);
    detail::read_field(r, "event_dt", sc.risk.event_dt);
    if (r.contains("curve")) {
      const auto& cu = r.at("curve");
      detail::read_field(cu, "lateral_accel_max", sc.risk.curve.lateral_accel_max);
      detail::read_field(cu, "sigma1", sc.risk.curve.sigma1);
      detail::read_field(cu, "literal_lateral_accel", sc.risk.curve.literal_lateral_accel);
    }
    const auto read_damage = [](const nlohmann::json& src, DamageParams& dst) {
      detail::read_field(src, "max_cost", dst.max_cost);
      detail::read_field(src, "steepness", dst.steepness);
      detail::read_field(src, "midpoint", dst.midpoint);
      detail::read_field(src, "literal_decreasing", dst.literal_decreasing);
    };
    if (r.contains("collision_damage")) read_damage(r.at("collision_damage"), sc.risk.collision_damage);
    if (r.contains("curve_damage")) read_damage(r.at("curve_damage"), sc.risk.curve_damage);
  }
  if (j.contains("benefit")) {
    const auto& b = j.at("benefit");
    double per_km = sc.benefit.distance * 1000.0;
    detail::read_field(b, "distance_eur_per_km", per_km);
    sc.benefit.distance = per_km / 1000.0;
    detail::read_field(b, "comfort_accel", sc.benefit.comfort_accel);
    detail::read_field(b, "comfort_jerk", sc.benefit.comfort_jerk);
  }
  if (j.contains("idm")) {
    const auto& i = j.at("idm");
    detail::read_field(i, "max_accel", sc.idm.max_accel);
    detail::read_field(i, "comfort_decel", sc.idm.comfort_decel);
    detail::read_field(i, "exponent", sc.idm.exponent);
    detail::read_field(i, "cruise_velocity", sc.idm.cruise_velocity);
    detail::read_field(i, "min_gap", sc.idm.min_gap);
    detail::read_field(i, "time_headway", sc.idm.time_headway);
    detail::read_field(i, "lateral_accel", sc.idm.lateral_accel);
    detail::read_field(i, "curvature_threshold", sc.idm.curvature_threshold);
  }
  if (j.contains("iidm")) {
    const auto& m = j.at("iidm");
    detail::read_field(m, "accel_gain_threshold", sc.iidm.accel_gain_threshold);
    detail::read_field(m, "safe_decel", sc.iidm.safe_decel);
    detail::read_field(m, "politeness", sc.iidm.politeness);
    detail::read_field(m, "projection_window", sc.iidm.projection_window);
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    detail::read_field(o, "multi_starts", sc.optimizer.multi_starts);
    detail::read_field(o, "v_seed_min", sc.optimizer.v_seed_min);
    detail::read_field(o, "v_max", sc.optimizer.v_max);
    detail::read_field(o, "ramp_duration", sc.optimizer.ramp_duration);
    detail::read_field(o, "accel_min", sc.optimizer.accel_min);
    detail::read_field(o, "accel_max", sc.optimizer.accel_max);
    detail::read_field(o, "penalty_weight", sc.optimizer.penalty_weight);
    detail::read_field(o, "comfort_decel", sc.optimizer.comfort_decel);
    detail::read_field(o, "comfort_accel", sc.optimizer.comfort_accel);
    detail::read_field(o, "replan_period", sc.optimizer.replan_period);
    if (o.contains("search")) {
      const auto& s = o.at("search");
      detail::read_field(s, "max_iterations", sc.optimizer.search.max_iterations);
      detail::read_field(s, "tolerance", sc.optimizer.search.tolerance);
      detail::read_field(s, "initial_step", sc.optimizer.search.initial_step);
    }
  }
  if (j.contains("rollout")) {
    const auto& ro = j.at("rollout");
    detail::read_field(ro, "horizon", sc.rollout.horizon);
    detail::read_field(ro, "dt", sc.rollout.dt);
    detail::read_field(ro, "sigma0_lon", sc.rollout.sigma0_lon);
    detail::read_field(ro, "sigma0_lat", sc.rollout.sigma0_lat);
    detail::read_field(ro, "growth", sc.rollout.growth);
  }
  sc.risk.event_dt = sc.rollout.dt;  // the hazard conversion interval tracks the rollout step
  refresh_conflict(sc);
  return sc;
}

inline std::string scenario_to_string(const Scenario& sc) {
  return scenario_to_json(sc).dump(2) + "\n";
}

inline Scenario load_scenario(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_scenario: cannot open " + file);
  nlohmann::json j;
  in >> j;
  return scenario_from_json(j);
}

inline void save_scenario(const Scenario& sc, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("save_scenario: cannot open " + file);
  out << scenario_to_string(sc);
}

}  // namespace ropt
