#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ropt {

struct NelderMeadConfig {
  int max_iterations = 100;
  double tolerance = 1e-3;    // simplex diameter (inf-norm) stopping threshold
  double initial_step = 0.25; // per-coordinate offset spanning the start simplex
};

struct NelderMeadResult {
  std::vector<double> x;
  double fx = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Derivative-free downhill simplex minimization with standard reflection,
/// expansion, contraction and shrink coefficients (1, 2, 0.5, 0.5).
/// Deterministic: ties sort by insertion order, no randomness. Non-finite
/// objective values are treated as +infinity; the start point must be finite.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, const NelderMeadConfig& cfg) {
  if (x0.empty()) throw std::invalid_argument("nelder_mead: empty start point");
  const std::size_t dim = x0.size();

  auto safe_f = [&f](const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };
  if (!std::isfinite(f(x0)))
    throw std::invalid_argument("nelder_mead: objective not finite at start point");

  std::vector<std::vector<double>> simplex(dim + 1, x0);
  std::vector<double> value(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += cfg.initial_step;
  for (std::size_t i = 0; i <= dim; ++i) value[i] = safe_f(simplex[i]);

  std::vector<std::size_t> order(dim + 1);
  std::iota(order.begin(), order.end(), 0);
  auto sort_order = [&] {
    std::stable_sort(order.begin(), order.end(),
                     [&value](std::size_t a, std::size_t b) { return value[a] < value[b]; });
  };

  int iter = 0;
  for (; iter < cfg.max_iterations; ++iter) {
    sort_order();
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim ? dim - 1 : 0];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i)
      for (std::size_t d = 0; d < dim; ++d)
        diameter = std::max(diameter, std::abs(simplex[i][d] - simplex[best][d]));
    if (diameter < cfg.tolerance) break;

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == worst) continue;
      for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i][d];
    }
    for (auto& c : centroid) c /= static_cast<double>(dim);

    auto blend = [&](double coeff) {
      std::vector<double> x(dim);
      for (std::size_t d = 0; d < dim; ++d)
        x[d] = centroid[d] + coeff * (centroid[d] - simplex[worst][d]);
      return x;
    };

    const auto reflected = blend(1.0);
    const double fr = safe_f(reflected);
    if (fr < value[best]) {
      const auto expanded = blend(2.0);
      const double fe = safe_f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        value[worst] = fe;
      } else {
        simplex[worst] = reflected;
        value[worst] = fr;
      }
      continue;
    }
    if (fr < value[second_worst]) {
      simplex[worst] = reflected;
      value[worst] = fr;
      continue;
    }
    const bool outside = fr < value[worst];
    const auto contracted = blend(outside ? 0.5 : -0.5);
    const double fc = safe_f(contracted);
    if ((outside && fc <= fr) || (!outside && fc < value[worst])) {
      simplex[worst] = contracted;
      value[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {  // shrink toward the best vertex
      if (i == best) continue;
      for (std::size_t d = 0; d < dim; ++d)
        simplex[i][d] = simplex[best][d] + 0.5 * (simplex[i][d] - simplex[best][d]);
      value[i] = safe_f(simplex[i]);
    }
  }

  sort_order();
  NelderMeadResult result;
  result.x = simplex[order.front()];
  result.fx = value[order.front()];
  result.iterations = iter;
  return result;
}

}  // namespace ropt
