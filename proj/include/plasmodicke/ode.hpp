#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "plasmodicke/errors.hpp"

namespace plasmodicke {

struct OdeOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_max = 1e300;
  std::size_t max_steps = 50'000'000;
};

namespace detail {

template <class Vec>
double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double ratio = std::abs(err(i)) / scale;
    sum += ratio * ratio;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

}  // namespace detail

// Adaptive Dormand-Prince 5(4) integration, sampled exactly at the grid
// points. deriv(t, y) must return the same vector type as y0 (real or
// complex Eigen column vector).
template <class Vec, class Deriv>
std::vector<Vec> integrate_on_grid(Deriv&& deriv, const Vec& y0,
                                   const std::vector<double>& t_grid, const OdeOptions& opt) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

  if (t_grid.empty()) return {};
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (t_grid[i] <= t_grid[i - 1]) {
      throw std::invalid_argument("time grid must be strictly increasing");
    }
  }

  std::vector<Vec> snapshots;
  snapshots.reserve(t_grid.size());

  double t = t_grid.front();
  Vec y = y0;
  snapshots.push_back(y);
  if (t_grid.size() == 1) return snapshots;

  const double span = t_grid.back() - t;
  Vec k1 = deriv(t, y);
  double h = std::min(opt.h_max, span / 100.0);
  std::size_t steps = 0;

  for (std::size_t target = 1; target < t_grid.size(); ++target) {
    const double t_target = t_grid[target];
    while (t < t_target) {
      if (++steps > opt.max_steps) {
        throw convergence_error("time integration exceeded the step budget");
      }
      const double h_nominal = std::min(h, opt.h_max);
      const bool clipped = t_target - t < h_nominal;
      const double h_step = clipped ? t_target - t : h_nominal;

      const Vec k2 = deriv(t + c2 * h_step, (y + h_step * (a21 * k1)).eval());
      const Vec k3 = deriv(t + c3 * h_step, (y + h_step * (a31 * k1 + a32 * k2)).eval());
      const Vec k4 = deriv(t + c4 * h_step, (y + h_step * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
      const Vec k5 = deriv(t + c5 * h_step,
                           (y + h_step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
      const Vec k6 = deriv(
          t + h_step, (y + h_step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
      const Vec y_new =
          y + h_step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vec k7 = deriv(t + h_step, y_new);
      const Vec err_vec =
          h_step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double err = detail::error_norm(err_vec, y, y_new, opt.rtol, opt.atol);
      if (err <= 1.0) {
        t = clipped ? t_target : t + h_step;
        y = y_new;
        k1 = k7;  // first-same-as-last
        if (!clipped) {
          // A step clipped to land on a grid point says nothing about accuracy,
          // so it must not shrink the working step size.
          const double factor = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
          h = std::min(h_step * std::clamp(factor, 0.2, 5.0), opt.h_max);
        }
      } else {
        h = h_step * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (h < 1e-14 * span) {
          throw convergence_error("time integration step size underflow");
        }
      }
    }
    snapshots.push_back(y);
  }
  return snapshots;
}

}  // namespace plasmodicke
