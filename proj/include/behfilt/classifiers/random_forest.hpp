#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "behfilt/classifiers/cart.hpp"
#include "behfilt/rng.hpp"

namespace behfilt::ml {

struct RandomForestParams {
  int n_trees = 100;
  std::size_t max_features = 0;  // 0: ceil(sqrt(d))
  bool bootstrap = true;
  int max_depth = 0;
  int min_samples_split = 2;

  friend bool operator==(const RandomForestParams&, const RandomForestParams&) = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_classes = 0;
};

inline std::size_t resolved_max_features(const RandomForestParams& p, std::size_t d) {
  if (p.max_features == 0) return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  return std::min(p.max_features, d);
}

/// Bagged Gini trees; every tree draws its bootstrap sample and feature
/// subsets from its own child stream of `seed`.
inline ForestModel fit_forest(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                              const RandomForestParams& p, std::uint64_t seed) {
  require(p.n_trees >= 1, ErrorCode::InvalidParameter, "random forest needs at least one tree");
  Rng rng(seed);
  const TreeParams tp{p.max_depth, p.min_samples_split, resolved_max_features(p, x.cols())};
  ForestModel model;
  model.n_classes = n_classes;
  model.trees.reserve(static_cast<std::size_t>(p.n_trees));
  for (int t = 0; t < p.n_trees; ++t) {
    Rng tree_rng = rng.fork();
    std::vector<std::size_t> samples;
    if (p.bootstrap) {
      samples.resize(x.rows());
      for (auto& s : samples) s = tree_rng.index(x.rows());
    } else {
      samples = all_rows(x.rows());
    }
    model.trees.push_back(DecisionTree::fit_classifier(x, y, n_classes, std::move(samples), tp, tree_rng));
  }
  return model;
}

/// Fraction of trees voting for each class.
inline std::vector<double> forest_votes(const ForestModel& m, std::span<const double> row) {
  std::vector<double> votes(m.n_classes, 0.0);
  for (const DecisionTree& t : m.trees) votes[argmax(t.leaf(row).value)] += 1.0;
  for (double& v : votes) v /= static_cast<double>(m.trees.size());
  return votes;
}

/// Mean of the per-tree normalized impurity importances.
inline std::vector<double> forest_importances(const ForestModel& m, std::size_t n_features) {
  std::vector<double> imp(n_features, 0.0);
  for (const DecisionTree& t : m.trees) {
    const auto& ti = t.importances();
    for (std::size_t f = 0; f < n_features && f < ti.size(); ++f) imp[f] += ti[f];
  }
  for (double& v : imp) v /= static_cast<double>(m.trees.size());
  return imp;
}

}  // namespace behfilt::ml
