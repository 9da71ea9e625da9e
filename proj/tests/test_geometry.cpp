#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ropt/geometry.hpp"

using namespace ropt;
using Catch::Approx;

namespace {

std::vector<Vec2> circle_arc(Vec2 center, double radius, double a0, double a1, int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * i / n;
    pts.push_back(center + Vec2{radius * std::cos(a), radius * std::sin(a)});
  }
  return pts;
}

// appends, dropping points that coincide with the current tail
void extend(std::vector<Vec2>& pts, const std::vector<Vec2>& more) {
  for (const auto& p : more)
    if (pts.empty() || distance(pts.back(), p) > 1e-9) pts.push_back(p);
}

}  // namespace

TEST_CASE("build_path validates its input") {
  REQUIRE_THROWS_AS(build_path({{0, 0}, {1, 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_path({{0, 0}, {0, 0}, {1, 0}}), std::invalid_argument);
  // a path shorter than two resample steps cannot carry curvature estimates
  REQUIRE_THROWS_AS(build_path({{0, 0}, {0.1, 0}, {0.3, 0}}), std::invalid_argument);
}

TEST_CASE("straight path has zero curvature and exact arclength") {
  const Path p = build_path({{0, 0}, {5, 0}, {10, 0}});
  REQUIRE(p.length() == Approx(10.0).margin(1e-12));
  for (std::size_t i = 1; i < p.size(); ++i)
    REQUIRE(p.cumulative_arclength[i] > p.cumulative_arclength[i - 1]);
  for (const double k : p.curvature) REQUIRE(std::abs(k) < 1e-12);
  for (const double h : p.heading) REQUIRE(h == Approx(0.0).margin(1e-12));
}

TEST_CASE("circle curvature estimate converges with input sampling density") {
  const double radius = 10.0;
  double prev_err = 1e9;
  for (const int n : {30, 90, 270}) {
    const Path p = build_path(circle_arc({0, 0}, radius, 0.0, M_PI, n));
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < p.size(); ++i)
      worst = std::max(worst, std::abs(std::abs(p.curvature[i]) - 1.0 / radius));
    REQUIRE(worst < prev_err);
    prev_err = worst;
  }
  REQUIRE(prev_err < 1e-4);
}

TEST_CASE("counterclockwise arcs have positive signed curvature") {
  const Path ccw = build_path(circle_arc({0, 0}, 10.0, 0.0, M_PI / 2, 60));
  const Path cw = build_path(circle_arc({0, 0}, 10.0, M_PI / 2, 0.0, 60));
  REQUIRE(ccw.curvature[ccw.size() / 2] > 0.0);
  REQUIRE(cw.curvature[cw.size() / 2] < 0.0);
}

TEST_CASE("pose interpolation walks the path") {
  const Path p = build_path({{0, 0}, {10, 0}, {20, 0}});
  const PathPose mid = pose_at(p, 7.25);
  REQUIRE(mid.world_position.x == Approx(7.25).margin(1e-9));
  REQUIRE(mid.world_position.y == Approx(0.0).margin(1e-12));
  REQUIRE(mid.longitudinal == Approx(7.25));
  REQUIRE_THROWS_AS(pose_at(p, -0.1), std::domain_error);
  REQUIRE_THROWS_AS(pose_at(p, 20.1), std::domain_error);

  SECTION("circular path pose stays on the circle") {
    // linear interpolation between 0.5 m nodes sags up to c^2/8r ~ 3.1 mm
    const Path arc = build_path(circle_arc({0, 0}, 10.0, 0.0, M_PI, 300));
    for (const double l : {1.0, 7.7, 14.1, 25.0}) {
      const PathPose q = pose_at(arc, l);
      REQUIRE(norm(q.world_position) == Approx(10.0).margin(5e-3));
      REQUIRE(q.local_curvature == Approx(0.1).margin(1e-4));
    }
  }
}

TEST_CASE("extended poses continue straight past the ends") {
  const Path p = build_path({{0, 0}, {10, 0}, {20, 0}});
  const PathPose before = pose_at_extended(p, -5.0);
  REQUIRE(before.world_position.x == Approx(-5.0));
  REQUIRE(before.local_curvature == 0.0);
  const PathPose after = pose_at_extended(p, 27.5);
  REQUIRE(after.world_position.x == Approx(27.5));
  REQUIRE(pose_at_extended(p, 12.0).world_position.x == Approx(12.0));
}

TEST_CASE("find_intersection locates a perpendicular crossing") {
  const Path a = build_path({{0, -10}, {0, 0}, {0, 10}});
  const Path b = build_path({{-10, 3}, {0, 3}, {10, 3}});
  const auto hit = find_intersection(a, b);
  REQUIRE(hit.has_value());
  REQUIRE(hit->arclength_a == Approx(13.0).margin(1e-9));
  REQUIRE(hit->arclength_b == Approx(10.0).margin(1e-9));
  REQUIRE(hit->world_position.x == Approx(0.0).margin(1e-9));
  REQUIRE(hit->world_position.y == Approx(3.0).margin(1e-9));
}

TEST_CASE("find_intersection reports the first crossing along path a") {
  const Path a = build_path({{0, -5}, {0, 5}, {5, 5}, {5, -5}});
  const Path b = build_path({{-10, 0}, {0, 0}, {10, 0}});
  const auto hit = find_intersection(a, b);
  REQUIRE(hit.has_value());
  REQUIRE(hit->arclength_a == Approx(5.0).margin(1e-9));
}

TEST_CASE("parallel non-touching paths do not intersect") {
  const Path a = build_path({{0, 0}, {10, 0}, {20, 0}});
  const Path b = build_path({{0, 2}, {10, 2}, {20, 2}});
  REQUIRE_FALSE(find_intersection(a, b).has_value());
}

TEST_CASE("a tangential merge counts as a crossing") {
  // quarter turn ending exactly on the other path, then running along it
  std::vector<Vec2> pts{{0, -30}, {0, -10}};
  extend(pts, circle_arc({10, -10}, 10.0, M_PI, M_PI / 2, 45));
  pts.push_back({60, 0});
  const Path turn = build_path(pts);
  const Path main_road = build_path({{-50, 0}, {0, 0}, {80, 0}});
  const auto hit = find_intersection(turn, main_road);
  REQUIRE(hit.has_value());
  const double curve_end = 20.0 + 10.0 * M_PI / 2.0;
  REQUIRE(hit->arclength_a == Approx(curve_end).margin(0.6));
  REQUIRE(hit->arclength_b == Approx(60.0).margin(0.6));
  REQUIRE(hit->world_position.y == Approx(0.0).margin(1e-6));
}

TEST_CASE("max_curvature_ahead finds the next bounded curve") {
  // straight, arc of kappa 0.08, straight tail: the arc begins and ends
  const double r1 = 12.5;
  std::vector<Vec2> pts{{-20, r1}, {0, r1}};
  extend(pts, circle_arc({0, 0}, r1, M_PI / 2, M_PI / 4, 40));
  const Vec2 dir{std::cos(-M_PI / 4), std::sin(-M_PI / 4)};  // clockwise tangent at 45 deg
  pts.push_back(pts.back() + 20.0 * dir);
  const Path p = build_path(pts);

  const auto first = max_curvature_ahead(p, 0.0, 0.05);
  REQUIRE(first.found);
  REQUIRE(first.kappa_max == Approx(1.0 / r1).margin(5e-3));

  SECTION("querying from past the arc finds nothing") {
    REQUIRE_FALSE(max_curvature_ahead(p, p.length() - 10.0, 0.05).found);
  }
  SECTION("threshold above the arc finds nothing") {
    REQUIRE_FALSE(max_curvature_ahead(p, 0.0, 0.2).found);
  }
}

TEST_CASE("with two arcs ahead only the first one is reported") {
  // 90 degree turn of radius 12.5, straight gap, 90 degree turn of radius 8
  std::vector<Vec2> pts{{-20, 12.5}, {0, 12.5}};
  extend(pts, circle_arc({0, 0}, 12.5, M_PI / 2, 0.0, 45));
  pts.push_back({12.5, -20});  // tangent continuation, heading straight down
  extend(pts, circle_arc({12.5 - 8.0, -20.0}, 8.0, 0.0, -M_PI / 2, 30));
  pts.push_back({12.5 - 8.0 - 15.0, -28.0});
  const Path p = build_path(pts);

  const auto from_start = max_curvature_ahead(p, 0.0, 0.05);
  REQUIRE(from_start.found);
  REQUIRE(from_start.kappa_max == Approx(1.0 / 12.5).margin(5e-3));

  const auto past_first = max_curvature_ahead(p, 45.0, 0.05);
  REQUIRE(past_first.found);
  REQUIRE(past_first.kappa_max == Approx(1.0 / 8.0).margin(8e-3));
}

TEST_CASE("max_curvature_ahead needs the curve to end before the path does") {
  std::vector<Vec2> pts{{-10, 10}, {0, 10}};
  extend(pts, circle_arc({0, 0}, 10.0, M_PI / 2, 0.0, 45));
  const Path ends_in_curve = build_path(pts);
  REQUIRE_FALSE(max_curvature_ahead(ends_in_curve, 0.0, 0.05).found);

  std::vector<Vec2> pts2 = pts;
  pts2.push_back({10, -15});  // tangent tail closes the curve segment
  const Path exits_curve = build_path(pts2);
  const auto found = max_curvature_ahead(exits_curve, 0.0, 0.05);
  REQUIRE(found.found);
  REQUIRE(found.kappa_max == Approx(0.1).margin(5e-3));
}
