#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "behfilt/error.hpp"
#include "behfilt/stats.hpp"

namespace behfilt::filters {

struct MedianParams {
  int window = 5;

  friend bool operator==(const MedianParams&, const MedianParams&) = default;
};

/// Centered running median with replicate padding at the edges.
inline std::vector<double> median_filter(std::span<const double> x, int window) {
  require(window % 2 == 1, ErrorCode::EvenWindow, "median window must be odd, got " + std::to_string(window));
  require(window >= 3, ErrorCode::InvalidParameter, "median window must be >= 3");
  const long n = static_cast<long>(x.size());
  const long half = window / 2;
  std::vector<double> out(x.size());
  std::vector<double> buf(static_cast<std::size_t>(window));
  for (long i = 0; i < n; ++i) {
    for (long j = -half; j <= half; ++j) {
      const long idx = std::clamp(i + j, 0L, n - 1);
      buf[static_cast<std::size_t>(j + half)] = x[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(i)] = stats::median_inplace(buf);
  }
  return out;
}

}  // namespace behfilt::filters
