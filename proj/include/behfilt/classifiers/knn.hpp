#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "behfilt/classifiers/matrix.hpp"

namespace behfilt::ml {

struct KnnParams {
  int k = 5;

  friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

struct KnnModel {
  Matrix x;
  std::vector<int> y;
  std::size_t n_classes = 0;
  int k = 5;
};

/// Brute-force Euclidean neighbors. Distance ties go to the lower training
/// index, vote ties to the lower class index.
inline int knn_predict(const KnnModel& m, std::span<const double> row) {
  std::vector<std::pair<double, std::size_t>> dist(m.x.rows());
  for (std::size_t i = 0; i < m.x.rows(); ++i) {
    const auto t = m.x.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < t.size(); ++j) d += (t[j] - row[j]) * (t[j] - row[j]);
    dist[i] = {d, i};
  }
  const std::size_t k = std::min(static_cast<std::size_t>(m.k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<double> votes(m.n_classes, 0.0);
  for (std::size_t i = 0; i < k; ++i) votes[static_cast<std::size_t>(m.y[dist[i].second])] += 1.0;
  return static_cast<int>(argmax(votes));
}

}  // namespace behfilt::ml
