#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <stdexcept>

#include "ropt/profiles.hpp"

using namespace ropt;
using Catch::Approx;

TEST_CASE("ramp profile interpolates and holds between ramps") {
  const RampProfile p = make_ramp_profile(
      5.0, {{1.0, 2.0, 2.0}, {5.0, 6.0, 1.0}});

  SECTION("before the first ramp the initial velocity holds") {
    REQUIRE(velocity_at_raw(p, -2.0) == 5.0);
    REQUIRE(velocity_at_raw(p, 0.0) == 5.0);
    REQUIRE(velocity_at_raw(p, 1.0) == 5.0);
  }
  SECTION("inside a ramp the velocity is linear") {
    REQUIRE(velocity_at_raw(p, 2.0) == Approx(3.5));
    REQUIRE(velocity_at_raw(p, 3.0) == Approx(2.0));
    REQUIRE(velocity_at_raw(p, 5.5) == Approx(4.0));
  }
  SECTION("between and after ramps the last target holds") {
    REQUIRE(velocity_at_raw(p, 4.0) == Approx(2.0));
    REQUIRE(velocity_at_raw(p, 6.0) == Approx(6.0));
    REQUIRE(velocity_at_raw(p, 50.0) == Approx(6.0));
  }
}

TEST_CASE("make_ramp_profile sorts ramps and removes overlap") {
  // given out of order and overlapping: second ramp must start where the
  // first one ends
  const RampProfile p = make_ramp_profile(
      0.0, {{2.0, 1.0, 1.0}, {0.0, 8.0, 3.0}});
  REQUIRE(p.ramps[0].start == 0.0);
  REQUIRE(p.ramps[1].start == Approx(3.0));
  REQUIRE(velocity_at_raw(p, 3.0) == Approx(8.0));
  REQUIRE(velocity_at_raw(p, 3.5) == Approx(4.5));
  REQUIRE(velocity_at_raw(p, 4.0) == Approx(1.0));

  REQUIRE_THROWS_AS(make_ramp_profile(0.0, {{0.0, 1.0, -0.1}}),
                    std::invalid_argument);
}

TEST_CASE("zero duration ramps act as velocity steps") {
  const RampProfile p = make_ramp_profile(2.0, {{1.0, 7.0, 0.0}});
  REQUIRE(velocity_at_raw(p, 1.0) == 2.0);
  REQUIRE(velocity_at_raw(p, 1.0 + 1e-9) == 7.0);
}

TEST_CASE("raw evaluation exposes negative velocities, clamped does not") {
  const VelocityProfile p = make_ramp_profile(1.0, {{0.0, -0.5, 3.0}});
  REQUIRE(velocity_at_raw(p, 2.0) == Approx(0.0).margin(1e-12));
  REQUIRE(velocity_at_raw(p, 3.0) == Approx(-0.5));
  REQUIRE(velocity_at(p, 3.0) == 0.0);
  REQUIRE(velocity_at(p, 10.0) == 0.0);
}

TEST_CASE("profile offset is bookkeeping only") {
  const RampProfile a = make_ramp_profile(3.0, {{0.5, 1.0, 1.0}}, 0.0);
  const RampProfile b = make_ramp_profile(3.0, {{0.5, 1.0, 1.0}}, 4.25);
  REQUIRE(b.offset == 4.25);
  for (const double t : {0.0, 0.75, 1.5, 9.0})
    REQUIRE(velocity_at_raw(a, t) == velocity_at_raw(b, t));
}

TEST_CASE("fixed fallback profiles anchor their target velocity") {
  SECTION("constant holds forever") {
    const FixedProfile c = make_constant_profile(7.0);
    REQUIRE(velocity_at_raw(c, 0.0) == 7.0);
    REQUIRE(velocity_at_raw(c, 123.0) == 7.0);
  }
  SECTION("stop reaches zero at v0 over decel") {
    const FixedProfile s = make_stop_profile(5.0, 2.0);
    REQUIRE(s.anchor_time == Approx(2.5));
    REQUIRE(velocity_at_raw(s, 1.25) == Approx(2.5));
    REQUIRE(velocity_at_raw(s, 2.5) == 0.0);
    REQUIRE(velocity_at_raw(s, 60.0) == 0.0);
    REQUIRE_THROWS_AS(make_stop_profile(5.0, 0.0), std::invalid_argument);
  }
  SECTION("stop from standstill is already anchored") {
    const FixedProfile s = make_stop_profile(0.0);
    REQUIRE(s.anchor_time == 0.0);
    REQUIRE(velocity_at_raw(s, 1.0) == 0.0);
  }
  SECTION("accelerate ramps up to the target") {
    const FixedProfile a = make_accelerate_profile(5.0, 11.0, 2.0);
    REQUIRE(a.anchor_time == Approx(3.0));
    REQUIRE(velocity_at_raw(a, 1.5) == Approx(8.0));
    REQUIRE(velocity_at_raw(a, 3.0) == Approx(11.0));
    REQUIRE(velocity_at_raw(a, 30.0) == Approx(11.0));
    REQUIRE_THROWS_AS(make_accelerate_profile(0.0, 5.0, -1.0),
                      std::invalid_argument);
  }
}

TEST_CASE("rollout integrates distance to the analytic value") {
  const Path path = build_path({{0, 0}, {100, 0}, {200, 0}});
  RolloutParams rp;
  rp.horizon = 10.0;
  rp.dt = 0.01;  // fine step so Euler error stays below the margin
  const VelocityProfile p = make_ramp_profile(0.0, {{0.0, 5.0, 2.5}});
  const Trajectory traj = rollout(p, path, 0.0, rp);

  REQUIRE(traj.states.size() == 1001);
  REQUIRE(traj.states.front().longitudinal == 0.0);
  REQUIRE(traj.states.front().velocity == 0.0);
  // ramp sweeps 6.25 m, then 7.5 s of cruise at 5 m/s
  REQUIRE(traj.states.back().longitudinal == Approx(43.75).margin(0.05));
  REQUIRE(traj.states.back().velocity == Approx(5.0));
  for (std::size_t k = 0; k < traj.states.size(); ++k)
    REQUIRE(traj.states[k].time == Approx(k * rp.dt));
}

TEST_CASE("rollout position spread grows with distance traveled") {
  const Path path = build_path({{0, 0}, {100, 0}, {200, 0}});
  RolloutParams rp;
  const VelocityProfile p = make_ramp_profile(4.0, {{1.0, 9.0, 2.0}});
  const Trajectory traj = rollout(p, path, 10.0, rp);

  const auto& first = traj.states.front();
  const auto& last = traj.states.back();
  REQUIRE(first.sigma_lon == rp.sigma0_lon);
  // the spread increment shares the velocity sum with the position update
  REQUIRE(last.sigma_lon - first.sigma_lon ==
          Approx(rp.growth * (last.longitudinal - first.longitudinal)));
  for (const auto& s : traj.states) REQUIRE(s.sigma_lat == rp.sigma0_lat);
}

TEST_CASE("rollout derivatives recover ramp slopes") {
  const Path path = build_path({{0, 0}, {100, 0}, {200, 0}});
  RolloutParams rp;  // dt 0.25
  const VelocityProfile p = make_ramp_profile(2.0, {{2.0, 6.0, 2.0}});
  const Trajectory traj = rollout(p, path, 0.0, rp);

  const auto at = [&](double t) {
    return traj.states[static_cast<std::size_t>(std::llround(t / rp.dt))];
  };
  REQUIRE(at(1.0).acceleration == Approx(0.0).margin(1e-12));
  REQUIRE(at(3.0).acceleration == Approx(2.0));  // (6-2)/2 inside the ramp
  REQUIRE(at(6.0).acceleration == Approx(0.0).margin(1e-12));
  // last two states share the repeated forward difference
  const auto& st = traj.states;
  REQUIRE(st[st.size() - 1].acceleration == st[st.size() - 2].acceleration);
  REQUIRE(st[st.size() - 1].jerk == st[st.size() - 2].jerk);
  // jerk concentrates at the ramp corners
  REQUIRE(at(1.75).jerk == Approx((2.0 - 0.0) / rp.dt));
  REQUIRE(at(3.0).jerk == Approx(0.0).margin(1e-12));
}

TEST_CASE("rollout validates its inputs") {
  const Path path = build_path({{0, 0}, {10, 0}, {20, 0}});
  const VelocityProfile p = make_constant_profile(3.0);
  RolloutParams rp;
  REQUIRE_THROWS_AS(rollout(p, path, -0.5, rp), std::domain_error);
  REQUIRE_THROWS_AS(rollout(p, path, 20.5, rp), std::domain_error);
  RolloutParams bad = rp;
  bad.dt = 0.0;
  REQUIRE_THROWS_AS(rollout(p, path, 0.0, bad), std::invalid_argument);
  bad = rp;
  bad.horizon = -1.0;
  REQUIRE_THROWS_AS(rollout(p, path, 0.0, bad), std::invalid_argument);
}

TEST_CASE("rollout continues straight past the end of the path") {
  const Path path = build_path({{0, 0}, {5, 0}, {10, 0}});
  RolloutParams rp;
  const Trajectory traj = extrapolate_constant(path, 8.0, 5.0, rp);
  // 8 + 50 m of travel, far beyond the 10 m path
  REQUIRE(traj.states.back().longitudinal == Approx(8.0 + 5.0 * rp.horizon));
  for (const auto& s : traj.states) {
    REQUIRE(s.velocity == 5.0);
    REQUIRE(s.pose.world_position.x == Approx(s.longitudinal));
    REQUIRE(s.pose.world_position.y == Approx(0.0).margin(1e-9));
    REQUIRE(s.pose.local_curvature == Approx(0.0).margin(1e-9));
  }
}
