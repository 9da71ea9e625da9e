#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ropt/planner.hpp"

using namespace ropt;
using Catch::Approx;

TEST_CASE("seed velocities span the search range evenly") {
  OptimizerConfig opt;
  const auto seeds = seed_velocities(opt);
  REQUIRE(seeds == std::vector<double>{2.0, 4.5, 7.0, 9.5, 12.0});

  opt.multi_starts = 1;
  REQUIRE(seed_velocities(opt) == std::vector<double>{7.0});

  opt.multi_starts = 0;
  REQUIRE_THROWS_AS(seed_velocities(opt), std::invalid_argument);
}

TEST_CASE("constraint penalty integrates bound violations") {
  RolloutParams rp;  // 10 s at 0.25 s
  OptimizerConfig opt;

  SECTION("a feasible profile pays nothing") {
    REQUIRE(constraint_penalty(make_constant_profile(5.0), rp, opt) == 0.0);
    const VelocityProfile ramp = make_ramp_profile(5.0, {{0.0, 10.0, 2.5}});
    REQUIRE(constraint_penalty(ramp, rp, opt) == 0.0);
  }
  SECTION("raw negative velocity accrues even though the wheels stop") {
    const VelocityProfile sinker = make_ramp_profile(1.0, {{0.0, -0.5, 3.0}});
    // v(t) = 1 - t/2 crosses zero at t = 2 and rests at -1/2 from t = 3 on
    const double in_ramp = (0.125 + 0.25 + 0.375) * 0.25;
    const double after = 0.5 * 28 * 0.25;
    REQUIRE(constraint_penalty(sinker, rp, opt) == Approx(in_ramp + after));
  }
  SECTION("overspeed accrues per second above the cap") {
    REQUIRE(constraint_penalty(make_constant_profile(15.0), rp, opt) ==
            Approx(3.0 * rp.horizon));
  }
  SECTION("too steep a ramp violates the acceleration band") {
    const VelocityProfile steep = make_ramp_profile(0.0, {{0.0, 12.0, 2.5}});
    // finite-difference slope 4.8 for the ten steps inside the ramp
    REQUIRE(constraint_penalty(steep, rp, opt) == Approx((4.8 - 3.0) * 2.5));
  }
}

TEST_CASE("advancing the active maneuver shifts time without changing it") {
  PlannerState state;
  state.active_profile = make_ramp_profile(5.0, {{0.0, 8.0, 2.5}, {2.5, 3.0, 2.5}});
  state.active_candidate = 0;
  const RampProfile before = *state.active_profile;

  detail::advance_active_profile(state, 0.5, 2.5);
  REQUIRE(state.offset == Approx(0.5));
  REQUIRE(state.active_profile->ramps.size() == 2);
  for (const double t : {0.0, 0.7, 2.0, 4.0, 9.0})
    REQUIRE(velocity_at_raw(*state.active_profile, t) ==
            Approx(velocity_at_raw(before, t + 0.5)));

  SECTION("crossing a full ramp duration appends a held ramp") {
    for (int i = 0; i < 4; ++i) detail::advance_active_profile(state, 0.5, 2.5);
    REQUIRE(state.offset == Approx(2.5));
    REQUIRE(state.active_profile->ramps.size() == 3);
    const Ramp& added = state.active_profile->ramps.back();
    REQUIRE(added.end_velocity == Approx(3.0));
    for (const double t : {0.0, 1.3, 2.6, 5.0, 11.0})
      REQUIRE(velocity_at_raw(*state.active_profile, t) ==
              Approx(velocity_at_raw(before, t + 2.5)));
  }
}

TEST_CASE("a ramp crossing far in the future re-parametrizes the hold before it") {
  PlannerState state;
  state.active_profile = make_ramp_profile(5.0, {{0.0, 8.0, 2.5}, {6.0, 3.0, 2.5}});
  state.active_candidate = 0;
  const RampProfile before = *state.active_profile;

  detail::advance_active_profile(state, 2.5, 2.5);
  REQUIRE(state.active_profile->ramps.size() == 3);
  // the inserted ramp holds the velocity that was already held there
  const Ramp& held = state.active_profile->ramps[1];
  REQUIRE(held.end_velocity == Approx(8.0));
  for (const double t : {0.0, 0.9, 2.0, 3.2, 4.5, 8.0})
    REQUIRE(velocity_at_raw(*state.active_profile, t) ==
            Approx(velocity_at_raw(before, t + 2.5)));
}

TEST_CASE("advance is a no-op without an active maneuver or elapsed time") {
  PlannerState empty;
  detail::advance_active_profile(empty, 1.0, 2.5);
  REQUIRE(empty.offset == 0.0);

  PlannerState state;
  state.active_profile = make_ramp_profile(5.0, {{0.0, 8.0, 2.5}, {2.5, 3.0, 2.5}});
  detail::advance_active_profile(state, 0.0, 2.5);
  REQUIRE(state.offset == 0.0);
  REQUIRE(state.active_profile->ramps[0].start == 0.0);
}

namespace {

struct PlanningFixture {
  Path ego_path = build_path({{0, 0}, {75, 0}, {150, 0}});
  Path cross_path = build_path({{40, -60}, {40, 0}, {40, 80}});
  RiskParams risk;
  BenefitWeights weights;
  OptimizerConfig opt;
  RolloutParams rp;

  PlanningFixture() { risk.event_dt = rp.dt; }
};

}  // namespace

TEST_CASE("plan_step reports every candidate and picks the best objective") {
  PlanningFixture f;
  const PlanResult r =
      plan_step(f.ego_path, 0.0, 5.0, {}, f.risk, f.weights, f.opt, f.rp, {}, 0.0);

  REQUIRE(r.candidates.size() == 8);
  REQUIRE(r.candidates[5].label == "constant");
  REQUIRE(r.candidates[6].label == "stop");
  REQUIRE(r.candidates[7].label == "accelerate");
  const int best = r.state.active_candidate;
  for (const auto& c : r.candidates) {
    REQUIRE(c.objective >= r.candidates[best].objective);
    REQUIRE(c.objective == Approx(c.cost + f.opt.penalty_weight * c.penalty));
  }
  // the winning maneuver respects the physical bounds
  REQUIRE(r.candidates[best].penalty < 1e-6);
  for (const auto& s : r.trajectory.states) {
    REQUIRE(s.velocity >= 0.0);
    REQUIRE(s.velocity <= f.opt.v_max + 1e-6);
  }
  // the published trajectory is the winning profile rolled out
  REQUIRE(r.trajectory.states[4].velocity == Approx(velocity_at(r.profile, 1.0)));
}

TEST_CASE("an empty road rewards driving fast") {
  PlanningFixture f;
  f.weights.distance = 0.01;  // ten EUR per kilometer makes distance dominant
  const PlanResult r =
      plan_step(f.ego_path, 0.0, 8.0, {}, f.risk, f.weights, f.opt, f.rp, {}, 0.0);
  REQUIRE(r.trajectory.states.back().velocity > 10.0);
  REQUIRE(r.breakdown.benefit > 0.0);
}

TEST_CASE("a crossing car makes constant speed a bad idea") {
  PlanningFixture f;
  // both vehicles reach the crossing at t = 5 if nothing changes
  const OtherAgent crosser{&f.cross_path, 20.0, 8.0};
  const PlanResult r =
      plan_step(f.ego_path, 0.0, 8.0, {crosser}, f.risk, f.weights, f.opt, f.rp, {}, 0.0);
  const int best = r.state.active_candidate;
  REQUIRE(r.candidates[best].objective < r.candidates[5].objective);
  REQUIRE(r.candidates[best].penalty < 1e-6);
}

TEST_CASE("replanning is deterministic") {
  PlanningFixture f;
  const OtherAgent crosser{&f.cross_path, 20.0, 8.0};
  const PlanResult a =
      plan_step(f.ego_path, 0.0, 8.0, {crosser}, f.risk, f.weights, f.opt, f.rp, {}, 0.0);
  const PlanResult b =
      plan_step(f.ego_path, 0.0, 8.0, {crosser}, f.risk, f.weights, f.opt, f.rp, {}, 0.0);
  REQUIRE(a.state.active_candidate == b.state.active_candidate);
  REQUIRE(a.candidates[a.state.active_candidate].objective ==
          b.candidates[b.state.active_candidate].objective);
  for (std::size_t k = 0; k < a.trajectory.states.size(); ++k)
    REQUIRE(a.trajectory.states[k].velocity == b.trajectory.states[k].velocity);
}

TEST_CASE("the selected maneuver carries over consistently between replans") {
  PlanningFixture f;
  const double dt = 0.25;
  PlannerState state;
  double ego_l = 0.0;
  double ego_v = 5.0;
  double elapsed = 0.0;
  for (int step = 0; step < 8; ++step) {
    const PlanResult r =
        plan_step(f.ego_path, ego_l, ego_v, {}, f.risk, f.weights, f.opt, f.rp, state, elapsed);
    // the plan must take over seamlessly from the velocity we are already at
    REQUIRE(velocity_at(r.profile, 0.0) == Approx(ego_v).margin(0.3));
    const double v_next = velocity_at(r.profile, dt);
    ego_l += 0.5 * (velocity_at(r.profile, 0.0) + v_next) * dt;
    ego_v = v_next;
    state = r.state;
    elapsed = dt;
  }
  REQUIRE(ego_v > 5.0);  // free road: the maneuver should not dither downward
}
