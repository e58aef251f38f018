#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "behfilt/classifiers/matrix.hpp"

namespace behfilt::ml {

struct NaiveBayesParams {
  double var_smoothing = 1e-9;  // times the largest feature variance

  friend bool operator==(const NaiveBayesParams&, const NaiveBayesParams&) = default;
};

struct NaiveBayesModel {
  std::vector<double> log_prior;
  Matrix means;      // class x feature
  Matrix variances;  // class x feature, smoothed
};

inline NaiveBayesModel fit_naive_bayes(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                       const NaiveBayesParams& p) {
  const std::size_t d = x.cols();
  NaiveBayesModel m;
  m.means = Matrix(n_classes, d);
  m.variances = Matrix(n_classes, d);
  std::vector<double> counts(n_classes, 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    counts[c] += 1.0;
    for (std::size_t j = 0; j < d; ++j) m.means(c, j) += x(i, j);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t j = 0; j < d; ++j) m.means(c, j) /= std::max(counts[c], 1.0);
  }
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<std::size_t>(y[i]);
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = x(i, j) - m.means(c, j);
      m.variances(c, j) += dv * dv;
    }
  }
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) mean += x(i, j);
    mean /= static_cast<double>(x.rows());
    double var = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    max_var = std::max(max_var, var / static_cast<double>(x.rows()));
  }
  double epsilon = p.var_smoothing * max_var;
  if (epsilon <= 0.0) epsilon = p.var_smoothing;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t j = 0; j < d; ++j) {
      m.variances(c, j) = m.variances(c, j) / std::max(counts[c], 1.0) + epsilon;
    }
  }
  m.log_prior.resize(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    m.log_prior[c] = std::log(counts[c] / static_cast<double>(x.rows()));
  }
  return m;
}

/// Joint log-likelihood log P(c) + sum_j log N(x_j | mu_cj, var_cj).
inline std::vector<double> naive_bayes_jll(const NaiveBayesModel& m, std::span<const double> row) {
  std::vector<double> jll(m.log_prior.size());
  for (std::size_t c = 0; c < jll.size(); ++c) {
    double acc = m.log_prior[c];
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double var = m.variances(c, j);
      const double dv = row[j] - m.means(c, j);
      acc -= 0.5 * std::log(2.0 * std::numbers::pi * var) + dv * dv / (2.0 * var);
    }
    jll[c] = acc;
  }
  return jll;
}

}  // namespace behfilt::ml
