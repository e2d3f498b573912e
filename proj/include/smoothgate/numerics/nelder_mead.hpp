#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace smoothgate::numerics {

struct NelderMeadOptions {
  double initial_step = 0.25;
  double x_tol = 1e-12;
  double f_tol = 1e-30;
  std::size_t max_evaluations = 4000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
};

/// Downhill simplex minimisation with the standard reflection/expansion/
/// contraction/shrink coefficients (1, 2, 1/2, 1/2).
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> start, const NelderMeadOptions& opt = {}) {
  const std::size_t n = start.size();
  NelderMeadResult res;
  std::vector<std::vector<double>> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opt.initial_step;
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);
  res.evaluations = n + 1;

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](std::vector<double>& out, double t, std::size_t worst) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (simplex[worst][j] - centroid[j]);
  };

  while (res.evaluations < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

    double size = 0.0;
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        size = std::max(size, std::abs(simplex[i][j] - simplex[best][j]));
    if (values[best] <= opt.f_tol || size <= opt.x_tol) break;
    ++res.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / static_cast<double>(n);
    }

    along(trial, -1.0, worst);
    const double fr = f(trial);
    ++res.evaluations;
    if (fr < values[best]) {
      along(trial2, -2.0, worst);
      const double fe = f(trial2);
      ++res.evaluations;
      if (fe < fr) {
        simplex[worst] = trial2;
        values[worst] = fe;
      } else {
        simplex[worst] = trial;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = trial;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    along(trial2, outside ? -0.5 : 0.5, worst);
    const double fc = f(trial2);
    ++res.evaluations;
    if (fc < std::min(fr, values[worst])) {
      simplex[worst] = trial2;
      values[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == best) continue;
      for (std::size_t j = 0; j < n; ++j)
        simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
      values[i] = f(simplex[i]);
      ++res.evaluations;
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  res.x = simplex[static_cast<std::size_t>(it - values.begin())];
  res.value = *it;
  return res;
}

}  // namespace smoothgate::numerics
