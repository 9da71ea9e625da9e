#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace ropt {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
  const double two_pi = 2.0 * M_PI;
  a = std::fmod(a + M_PI, two_pi);
  if (a < 0.0) a += two_pi;
  return a - M_PI;
}

/// Arc-length parametrized planar polyline with per-point curvature and
/// heading. Immutable after construction; shared concurrent reads are safe.
struct Path {
  std::vector<Vec2> points;
  std::vector<double> cumulative_arclength;  // strictly increasing, starts at 0
  std::vector<double> curvature;             // signed, 1/m, + for left turns
  std::vector<double> heading;               // tangent angle, rad

  double length() const { return cumulative_arclength.back(); }
  std::size_t size() const { return points.size(); }
};

struct PathPose {
  double longitudinal = 0.0;  // arc-length position, m
  Vec2 world_position;
  double heading = 0.0;         // rad
  double local_curvature = 0.0; // 1/m
};

struct IntersectionPoint {
  double arclength_a = 0.0;
  double arclength_b = 0.0;
  Vec2 world_position;
};

namespace detail {

inline std::vector<Vec2> resample_polyline(const std::vector<Vec2>& pts, double step) {
  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
  const double total = cum.back();

  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(total / step) + 2);
  std::size_t seg = 0;
  for (double s = 0.0; s < total; s += step) {
    while (seg + 2 < pts.size() && cum[seg + 1] <= s) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = (s - cum[seg]) / seg_len;
    out.push_back(pts[seg] + t * (pts[seg + 1] - pts[seg]));
  }
  // keep the exact endpoint; drop a grid point that landed on top of it
  if (!out.empty() && distance(out.back(), pts.back()) < 1e-9) out.pop_back();
  out.push_back(pts.back());
  return out;
}

/// Signed curvature of the circle through three consecutive points
/// (Menger curvature). Exact when the points lie on a circle.
inline double menger_curvature(Vec2 a, Vec2 b, Vec2 c) {
  const double area2 = cross(b - a, c - b);
  const double d1 = distance(a, b);
  const double d2 = distance(b, c);
  const double d3 = distance(a, c);
  const double denom = d1 * d2 * d3;
  if (denom < 1e-12) return 0.0;
  return 2.0 * area2 / denom;
}

}  // namespace detail

/// Builds a path from waypoint positions: resamples at a fixed 0.5 m step,
/// then fills arc-length, heading (central differences) and curvature
/// (circumscribed circle through consecutive resampled triplets).
inline Path build_path(const std::vector<Vec2>& input_points, double resample_step = 0.5) {
  if (input_points.size() < 3)
    throw std::invalid_argument("build_path: need at least 3 points");
  for (std::size_t i = 1; i < input_points.size(); ++i)
    if (distance(input_points[i - 1], input_points[i]) < 1e-9)
      throw std::invalid_argument("build_path: duplicate consecutive points");

  Path path;
  path.points = detail::resample_polyline(input_points, resample_step);
  const std::size_t n = path.points.size();
  if (n < 3) throw std::invalid_argument("build_path: path shorter than two resample steps");

  path.cumulative_arclength.resize(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    path.cumulative_arclength[i] =
        path.cumulative_arclength[i - 1] + distance(path.points[i - 1], path.points[i]);

  path.heading.resize(n);
  path.heading[0] = std::atan2(path.points[1].y - path.points[0].y,
                               path.points[1].x - path.points[0].x);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const Vec2 d = path.points[i + 1] - path.points[i - 1];
    path.heading[i] = std::atan2(d.y, d.x);
  }
  path.heading[n - 1] = std::atan2(path.points[n - 1].y - path.points[n - 2].y,
                                   path.points[n - 1].x - path.points[n - 2].x);

  // Curvature stencil spans ~2 m per side: adjacent resampled points sit on
  // interpolation chords of the input polyline, and a short span amplifies
  // their sub-millimeter radial scatter by 8 / span^2. End nodes copy the
  // nearest full-stencil value so a path that stops mid-curve keeps its
  // curvature up to the final node.
  path.curvature.resize(n, 0.0);
  const auto k = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(2.0 / resample_step)));
  if (n > 2 * k) {
    for (std::size_t i = k; i + k < n; ++i)
      path.curvature[i] =
          detail::menger_curvature(path.points[i - k], path.points[i], path.points[i + k]);
    for (std::size_t i = 0; i < k; ++i) path.curvature[i] = path.curvature[k];
    for (std::size_t i = n - k; i < n; ++i) path.curvature[i] = path.curvature[n - 1 - k];
  } else {
    for (std::size_t i = 1; i + 1 < n; ++i)
      path.curvature[i] =
          detail::menger_curvature(path.points[i - 1], path.points[i], path.points[i + 1]);
    path.curvature[0] = path.curvature[1];
    path.curvature[n - 1] = path.curvature[n - 2];
  }
  return path;
}

/// Interpolated pose at arc-length l in [0, length]. Throws on out-of-range;
/// use pose_at_extended when extrapolation past the ends is intended.
inline PathPose pose_at(const Path& path, double l) {
  if (l < 0.0 || l > path.length() + 1e-9)
    throw std::domain_error("pose_at: arclength outside path");
  l = std::min(l, path.length());
  const auto& cum = path.cumulative_arclength;
  const auto it = std::upper_bound(cum.begin(), cum.end(), l);
  std::size_t hi = std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
  if (hi == 0) hi = 1;
  const std::size_t lo = hi - 1;
  const double t = (l - cum[lo]) / (cum[hi] - cum[lo]);

  PathPose pose;
  pose.longitudinal = l;
  pose.world_position = path.points[lo] + t * (path.points[hi] - path.points[lo]);
  pose.heading = wrap_angle(path.heading[lo] + t * wrap_angle(path.heading[hi] - path.heading[lo]));
  pose.local_curvature = path.curvature[lo] + t * (path.curvature[hi] - path.curvature[lo]);
  return pose;
}

/// Straight-line extension of pose_at: before the start / past the end the
/// pose continues at the boundary heading with zero curvature, so agents can
/// leave the scene.
inline PathPose pose_at_extended(const Path& path, double l) {
  if (l >= 0.0 && l <= path.length()) return pose_at(path, l);
  PathPose pose;
  pose.longitudinal = l;
  pose.local_curvature = 0.0;
  if (l < 0.0) {
    pose.heading = path.heading.front();
    pose.world_position =
        path.points.front() + l * Vec2{std::cos(pose.heading), std::sin(pose.heading)};
  } else {
    const double over = l - path.length();
    pose.heading = path.heading.back();
    pose.world_position =
        path.points.back() + over * Vec2{std::cos(pose.heading), std::sin(pose.heading)};
  }
  return pose;
}

namespace detail {

struct SegmentHit {
  double t_a = 0.0;  // param on segment a in [0,1]
  double t_b = 0.0;
  Vec2 point;
};

inline std::optional<SegmentHit> segment_intersection(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1,
                                                      double touch_tol = 1e-6) {
  const Vec2 r = p1 - p0;
  const Vec2 s = q1 - q0;
  const double denom = cross(r, s);
  const Vec2 qp = q0 - p0;
  const double param_tol = 1e-9;
  if (std::abs(denom) > 1e-12) {
    const double t = cross(qp, s) / denom;
    const double u = cross(qp, r) / denom;
    if (t >= -param_tol && t <= 1.0 + param_tol && u >= -param_tol && u <= 1.0 + param_tol) {
      SegmentHit hit;
      hit.t_a = std::clamp(t, 0.0, 1.0);
      hit.t_b = std::clamp(u, 0.0, 1.0);
      hit.point = p0 + hit.t_a * r;
      return hit;
    }
    return std::nullopt;
  }
  // parallel: report collinear touching overlap at its earliest point on a
  const double rlen = norm(r);
  if (rlen < 1e-12) return std::nullopt;
  if (std::abs(cross(qp, r)) / rlen > touch_tol) return std::nullopt;
  const double rr = dot(r, r);
  double t0 = dot(qp, r) / rr;
  double t1 = dot(q1 - p0, r) / rr;
  const bool forward = t0 <= t1;
  if (!forward) std::swap(t0, t1);
  const double lo = std::max(0.0, t0);
  const double hi = std::min(1.0, t1);
  if (lo > hi + param_tol) return std::nullopt;
  SegmentHit hit;
  hit.t_a = std::clamp(lo, 0.0, 1.0);
  hit.point = p0 + hit.t_a * r;
  const double slen2 = dot(s, s);
  double u = slen2 > 1e-12 ? dot(hit.point - q0, s) / slen2 : 0.0;
  hit.t_b = std::clamp(u, 0.0, 1.0);
  return hit;
}

}  // namespace detail

/// First geometric crossing of the two polylines, scanning by ascending
/// arclength on path a. Touching contacts (shared endpoint, collinear
/// overlap) count as crossings. Absence of a crossing is a valid result.
inline std::optional<IntersectionPoint> find_intersection(const Path& a, const Path& b) {
  for (std::size_t i = 0; i + 1 < a.points.size(); ++i) {
    for (std::size_t j = 0; j + 1 < b.points.size(); ++j) {
      const auto hit = detail::segment_intersection(a.points[i], a.points[i + 1],
                                                    b.points[j], b.points[j + 1]);
      if (!hit) continue;
      IntersectionPoint ip;
      const double seg_a = a.cumulative_arclength[i + 1] - a.cumulative_arclength[i];
      const double seg_b = b.cumulative_arclength[j + 1] - b.cumulative_arclength[j];
      ip.arclength_a = a.cumulative_arclength[i] + hit->t_a * seg_a;
      ip.arclength_b = b.cumulative_arclength[j] + hit->t_b * seg_b;
      ip.world_position = hit->point;
      return ip;
    }
  }
  return std::nullopt;
}

struct CurvatureAhead {
  double kappa_max = 0.0;
  bool found = false;
};

/// Scans forward from arclength l for the next contiguous segment whose
/// |curvature| first exceeds kappa_th and later drops below it again, and
/// returns the maximum |curvature| inside that segment. A curve segment that
/// never ends before the path does is not reported.
inline CurvatureAhead max_curvature_ahead(const Path& path, double l, double kappa_th) {
  const auto& cum = path.cumulative_arclength;
  std::size_t i = std::lower_bound(cum.begin(), cum.end(), l) - cum.begin();
  const std::size_t n = path.size();
  while (i < n && std::abs(path.curvature[i]) <= kappa_th) ++i;
  if (i >= n) return {};
  double kappa_max = 0.0;
  std::size_t j = i;
  while (j < n && std::abs(path.curvature[j]) > kappa_th) {
    kappa_max = std::max(kappa_max, std::abs(path.curvature[j]));
    ++j;
  }
  if (j >= n) return {};  // curve runs off the end of the path
  return {kappa_max, true};
}

}  // namespace ropt
