#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "behfilt/error.hpp"

namespace behfilt::filters {

/// Exact minimizer of 0.5 * sum (y_i - x_i)^2 + lambda * sum |y_{i+1} - y_i|.
///
/// Direct (non-iterative) 1-D algorithm of Condat: a single forward sweep
/// that maintains the lower/upper bounds of the current constant segment
/// and back-fills whenever the taut string must bend. Worst case O(n^2),
/// linear in practice.
inline std::vector<double> tv_denoise(std::span<const double> input, double lambda) {
  require(lambda >= 0.0 && std::isfinite(lambda), ErrorCode::InvalidParameter, "TV lambda must be >= 0");
  for (double v : input) require(std::isfinite(v), ErrorCode::InvalidParameter, "TV input must be finite");
  const std::size_t width = input.size();
  std::vector<double> output(input.begin(), input.end());
  if (width < 2 || lambda == 0.0) return output;

  std::size_t k = 0;
  std::size_t k0 = 0;
  std::size_t kplus = 0;
  std::size_t kminus = 0;
  double umin = lambda;
  double umax = -lambda;
  double vmin = input[0] - lambda;
  double vmax = input[0] + lambda;
  const double twolambda = 2.0 * lambda;
  const double minlambda = -lambda;

  for (;;) {
    while (k == width - 1) {
      if (umin < 0.0) {
        do output[k0++] = vmin; while (k0 <= kminus);
        k = kminus = k0;
        vmin = input[k];
        umin = lambda;
        umax = vmin + umin - vmax;
      } else if (umax > 0.0) {
        do output[k0++] = vmax; while (k0 <= kplus);
        k = kplus = k0;
        vmax = input[k];
        umax = minlambda;
        umin = vmax + umax - vmin;
      } else {
        vmin += umin / static_cast<double>(k - k0 + 1);
        do output[k0++] = vmin; while (k0 <= k);
        return output;
      }
    }
    umin += input[k + 1] - vmin;
    if (umin < minlambda) {
      do output[k0++] = vmin; while (k0 <= kminus);
      k = kplus = kminus = k0;
      vmin = input[k];
      vmax = vmin + twolambda;
      umin = lambda;
      umax = minlambda;
      continue;
    }
    umax += input[k + 1] - vmax;
    if (umax > lambda) {
      do output[k0++] = vmax; while (k0 <= kplus);
      k = kplus = kminus = k0;
      vmax = input[k];
      vmin = vmax - twolambda;
      umin = lambda;
      umax = minlambda;
      continue;
    }
    ++k;
    if (umin >= lambda) {
      kminus = k;
      vmin += (umin - lambda) / static_cast<double>(kminus - k0 + 1);
      umin = lambda;
    }
    if (umax <= minlambda) {
      kplus = k;
      vmax += (umax + lambda) / static_cast<double>(kplus - k0 + 1);
      umax = minlambda;
    }
  }
}

/// Objective value minimized by tv_denoise().
inline double tv_objective(std::span<const double> y, std::span<const double> x, double lambda) {
  double fit = 0.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    fit += (y[i] - x[i]) * (y[i] - x[i]);
    if (i + 1 < x.size()) tv += std::abs(x[i + 1] - x[i]);
  }
  return 0.5 * fit + lambda * tv;
}

struct TvdParams {
  std::optional<double> lambda;  // nullopt: 0.5 * wavelet MAD noise estimate of the segment

  friend bool operator==(const TvdParams&, const TvdParams&) = default;
};

}  // namespace behfilt::filters
