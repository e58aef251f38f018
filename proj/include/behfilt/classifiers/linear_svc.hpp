#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "behfilt/classifiers/matrix.hpp"
#include "behfilt/rng.hpp"

namespace behfilt::ml {

struct LinearSvcParams {
  double lambda = 1e-4;
  int epochs = 200;

  friend bool operator==(const LinearSvcParams&, const LinearSvcParams&) = default;
};

/// One-vs-rest linear hinge-loss classifier. weights(c, d) is the bias
/// (an implicit constant feature, regularized with the rest).
struct LinearSvcModel {
  Matrix weights;  // class x (features + 1)
};

/// Pegasos subgradient descent with step 1/(lambda t) and a fixed epoch
/// budget; each epoch visits the rows in a fresh seeded permutation.
inline LinearSvcModel fit_linear_svc(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                     const LinearSvcParams& p, std::uint64_t seed) {
  require(p.lambda > 0.0 && p.epochs >= 1, ErrorCode::InvalidParameter, "LinearSVC needs lambda > 0 and epochs >= 1");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  LinearSvcModel m;
  m.weights = Matrix(n_classes, d + 1);
  Rng rng(seed);
  for (std::size_t c = 0; c < n_classes; ++c) {
    Rng class_rng = rng.fork();
    std::vector<double> w(d + 1, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double t = 0.0;
    for (int epoch = 0; epoch < p.epochs; ++epoch) {
      class_rng.shuffle(order);
      for (std::size_t i : order) {
        t += 1.0;
        const double eta = 1.0 / (p.lambda * t);
        const double target = static_cast<std::size_t>(y[i]) == c ? 1.0 : -1.0;
        const auto row = x.row(i);
        double margin = w[d];
        for (std::size_t j = 0; j < d; ++j) margin += w[j] * row[j];
        const double shrink = 1.0 - eta * p.lambda;
        for (double& v : w) v *= shrink;
        if (target * margin < 1.0) {
          for (std::size_t j = 0; j < d; ++j) w[j] += eta * target * row[j];
          w[d] += eta * target;
        }
      }
    }
    std::copy(w.begin(), w.end(), m.weights.row(c).begin());
  }
  return m;
}

inline std::vector<double> linear_svc_scores(const LinearSvcModel& m, std::span<const double> row) {
  const std::size_t d = row.size();
  std::vector<double> s(m.weights.rows());
  for (std::size_t c = 0; c < s.size(); ++c) {
    const auto w = m.weights.row(c);
    double acc = w[d];
    for (std::size_t j = 0; j < d; ++j) acc += w[j] * row[j];
    s[c] = acc;
  }
  return s;
}

}  // namespace behfilt::ml
