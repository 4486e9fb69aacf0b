#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace regimecast::optimize {

struct NelderMeadOptions {
  int max_evaluations = 500;
  double initial_step = 0.1;
  double f_tolerance = 1e-10;  // relative spread of simplex values
  double x_tolerance = 1e-7;   // max coordinate distance from the best vertex
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

/// Minimise f from x0 with the standard reflection/expansion/contraction/shrink moves.
/// f may return +inf to reject a point.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t dim = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    return f(x);
  };
  if (dim == 0) {
    res.x = x0;
    res.value = eval(x0);
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> simplex(dim + 1, x0);
  std::vector<double> values(dim + 1);
  values[0] = eval(x0);
  for (std::size_t i = 0; i < dim; ++i) {
    simplex[i + 1][i] += opt.initial_step;
    values[i + 1] = eval(simplex[i + 1]);
  }

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  auto combine = [&](double a, const std::vector<double>& p, double b, const std::vector<double>& q,
                     std::vector<double>& out) {
    for (std::size_t k = 0; k < dim; ++k) out[k] = a * p[k] + b * q[k];
  };

  while (true) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[dim - 1];

    const double fb = values[best];
    const double fw = values[worst];
    double spread_x = 0.0;
    for (std::size_t v = 0; v <= dim; ++v) {
      for (std::size_t k = 0; k < dim; ++k) {
        spread_x = std::max(spread_x, std::fabs(simplex[v][k] - simplex[best][k]));
      }
    }
    if (std::isfinite(fw) &&
        std::fabs(fw - fb) <= opt.f_tolerance * (std::fabs(fb) + std::fabs(fw)) + 1e-300 &&
        spread_x <= opt.x_tolerance) {
      res.converged = true;
    }
    if (res.converged || res.evaluations >= opt.max_evaluations) {
      res.x = simplex[best];
      res.value = fb;
      return res;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t v = 0; v <= dim; ++v) {
      if (v == worst) continue;
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += simplex[v][k] / static_cast<double>(dim);
    }

    combine(2.0, centroid, -1.0, simplex[worst], trial);  // reflect
    const double fr = eval(trial);
    if (fr < fb) {
      combine(3.0, centroid, -2.0, simplex[worst], trial2);  // expand
      const double fe = eval(trial2);
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
    if (fr < fw) {
      combine(1.5, centroid, -0.5, simplex[worst], trial2);  // outside contraction
      const double fc = eval(trial2);
      if (fc <= fr) {
        simplex[worst] = trial2;
        values[worst] = fc;
        continue;
      }
    } else {
      combine(0.5, centroid, 0.5, simplex[worst], trial2);  // inside contraction
      const double fc = eval(trial2);
      if (fc < fw) {
        simplex[worst] = trial2;
        values[worst] = fc;
        continue;
      }
    }
    for (std::size_t v = 0; v <= dim; ++v) {  // shrink toward best
      if (v == best) continue;
      combine(0.5, simplex[best], 0.5, simplex[v], simplex[v]);
      values[v] = eval(simplex[v]);
    }
  }
}

}  // namespace regimecast::optimize
