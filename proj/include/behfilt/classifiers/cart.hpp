#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "behfilt/classifiers/matrix.hpp"
#include "behfilt/error.hpp"
#include "behfilt/rng.hpp"

namespace behfilt::ml {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t samples = 0;
  /// Class fractions for classification trees, a single value for regression.
  std::vector<double> value;

  bool is_leaf() const { return feature < 0; }
};

struct TreeParams {
  int max_depth = 0;  // 0: unlimited
  int min_samples_split = 2;
  std::size_t max_features = 0;  // 0: all features
};

/// CART tree. Samples go left when x[feature] <= threshold. Thresholds are
/// midpoints between consecutive distinct values; among equally good
/// splits the lowest feature index, then the lowest threshold, wins.
class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  /// Gini classification tree. `samples` may repeat rows (bootstrap).
  static DecisionTree fit_classifier(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                     std::vector<std::size_t> samples, const TreeParams& params, Rng& rng);

  /// Squared-error regression tree.
  static DecisionTree fit_regressor(const Matrix& x, std::span<const double> target, std::vector<std::size_t> samples,
                                    const TreeParams& params, Rng& rng);

  std::size_t leaf_index(std::span<const double> row) const {
    std::size_t node = 0;
    while (!nodes_[node].is_leaf()) {
      const TreeNode& n = nodes_[node];
      node = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return node;
  }

  const TreeNode& leaf(std::span<const double> row) const { return nodes_[leaf_index(row)]; }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& nodes() { return nodes_; }

  /// Impurity decrease per feature, normalized to sum to 1 (all zero for a
  /// single-leaf tree).
  const std::vector<double>& importances() const { return importances_; }
  void set_importances(std::vector<double> imp) { importances_ = std::move(imp); }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [node, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes_[node].is_leaf()) {
        stack.push_back({static_cast<std::size_t>(nodes_[node].left), d + 1});
        stack.push_back({static_cast<std::size_t>(nodes_[node].right), d + 1});
      }
    }
    return best;
  }

 private:
  std::vector<TreeNode> nodes_;
  std::vector<double> importances_;
};

namespace detail {

class CartBuilder {
 public:
  CartBuilder(const Matrix& x, std::span<const int> labels, std::size_t n_classes, std::span<const double> target,
              const TreeParams& params, Rng& rng)
      : x_(x), labels_(labels), n_classes_(n_classes), target_(target), params_(params), rng_(rng),
        importances_(x.cols(), 0.0) {}

  DecisionTree run(std::vector<std::size_t> samples) {
    require(!samples.empty(), ErrorCode::EmptyMatrix, "cannot fit a tree on zero samples");
    samples_ = std::move(samples);
    build(0, samples_.size(), 0);
    const double total = std::accumulate(importances_.begin(), importances_.end(), 0.0);
    if (total > 0.0) {
      for (double& v : importances_) v /= total;
    }
    DecisionTree tree(std::move(nodes_));
    tree.set_importances(std::move(importances_));
    return tree;
  }

 private:
  bool classification() const { return n_classes_ > 0; }

  struct Split {
    bool valid = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = 0.0;  // child impurity, n-weighted; lower is better
  };

  /// n-weighted impurity of the node: n * gini, or the sum of squared errors.
  double node_impurity(std::size_t begin, std::size_t end) const {
    const double n = static_cast<double>(end - begin);
    if (classification()) {
      std::vector<double> counts(n_classes_, 0.0);
      for (std::size_t i = begin; i < end; ++i) counts[static_cast<std::size_t>(labels_[samples_[i]])] += 1.0;
      double sq = 0.0;
      for (double c : counts) sq += c * c;
      return n - sq / n;
    }
    double mean = 0.0;
    for (std::size_t i = begin; i < end; ++i) mean += target_[samples_[i]];
    mean /= n;
    double sse = 0.0;
    for (std::size_t i = begin; i < end; ++i) sse += (target_[samples_[i]] - mean) * (target_[samples_[i]] - mean);
    return sse;
  }

  std::vector<double> leaf_value(std::size_t begin, std::size_t end) const {
    const double n = static_cast<double>(end - begin);
    if (classification()) {
      std::vector<double> frac(n_classes_, 0.0);
      for (std::size_t i = begin; i < end; ++i) frac[static_cast<std::size_t>(labels_[samples_[i]])] += 1.0;
      for (double& f : frac) f /= n;
      return frac;
    }
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += target_[samples_[i]];
    return {sum / n};
  }

  bool is_pure(std::size_t begin, std::size_t end) const {
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (classification() ? labels_[samples_[i]] != labels_[samples_[begin]]
                           : target_[samples_[i]] != target_[samples_[begin]]) {
        return false;
      }
    }
    return true;
  }

  bool feature_constant(std::size_t f, std::size_t begin, std::size_t end) const {
    const double first = x_(samples_[begin], f);
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (x_(samples_[i], f) != first) return false;
    }
    return true;
  }

  std::vector<std::size_t> candidate_features(std::size_t begin, std::size_t end) {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> chosen;
    if (params_.max_features == 0 || params_.max_features >= d) {
      for (std::size_t f = 0; f < d; ++f) {
        if (!feature_constant(f, begin, end)) chosen.push_back(f);
      }
      return chosen;
    }
    // Draw features in random order until max_features non-constant ones
    // are found; evaluate them in ascending index order.
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng_.shuffle(order);
    for (std::size_t f : order) {
      if (chosen.size() == params_.max_features) break;
      if (!feature_constant(f, begin, end)) chosen.push_back(f);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  static bool better(double score, double best) { return score < best - 1e-12 * std::max(1.0, std::abs(best)); }

  void scan_feature(std::size_t f, std::size_t begin, std::size_t end, Split& best) {
    const std::size_t n = end - begin;
    sorted_.resize(n);
    for (std::size_t i = 0; i < n; ++i) sorted_[i] = {x_(samples_[begin + i], f), samples_[begin + i]};
    std::sort(sorted_.begin(), sorted_.end());

    const auto consider = [&](std::size_t i, double score) {
      if (sorted_[i].first == sorted_[i + 1].first) return;
      if (!best.valid || better(score, best.score)) {
        double mid = 0.5 * (sorted_[i].first + sorted_[i + 1].first);
        if (!(mid < sorted_[i + 1].first)) mid = sorted_[i].first;
        best = {true, f, mid, score};
      }
    };

    if (classification()) {
      std::vector<double> left(n_classes_, 0.0);
      std::vector<double> right(n_classes_, 0.0);
      for (const auto& [v, s] : sorted_) right[static_cast<std::size_t>(labels_[s])] += 1.0;
      double sq_left = 0.0;
      double sq_right = 0.0;
      for (double c : right) sq_right += c * c;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(labels_[sorted_[i].second]);
        sq_left += 2.0 * left[c] + 1.0;
        left[c] += 1.0;
        sq_right -= 2.0 * right[c] - 1.0;
        right[c] -= 1.0;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        consider(i, (nl - sq_left / nl) + (nr - sq_right / nr));
      }
    } else {
      double total = 0.0;
      double total_sq = 0.0;
      for (const auto& [v, s] : sorted_) {
        total += target_[s];
        total_sq += target_[s] * target_[s];
      }
      double sum_left = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        sum_left += target_[sorted_[i].second];
        const double sum_right = total - sum_left;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        consider(i, total_sq - sum_left * sum_left / nl - sum_right * sum_right / nr);
      }
    }
  }

  int build(std::size_t begin, std::size_t end, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(id)].samples = end - begin;

    const std::size_t n = end - begin;
    const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
    Split best;
    if (depth_ok && n >= static_cast<std::size_t>(std::max(2, params_.min_samples_split)) && !is_pure(begin, end)) {
      for (std::size_t f : candidate_features(begin, end)) scan_feature(f, begin, end, best);
    }
    if (!best.valid) {
      nodes_[static_cast<std::size_t>(id)].value = leaf_value(begin, end);
      return id;
    }

    const double parent = node_impurity(begin, end);
    const auto mid_it = std::stable_partition(
        samples_.begin() + static_cast<std::ptrdiff_t>(begin), samples_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t s) { return x_(s, best.feature) <= best.threshold; });
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
    const double children = node_impurity(begin, mid) + node_impurity(mid, end);
    importances_[best.feature] += std::max(0.0, parent - children);

    nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(best.feature);
    nodes_[static_cast<std::size_t>(id)].threshold = best.threshold;
    nodes_[static_cast<std::size_t>(id)].value = leaf_value(begin, end);
    const int left = build(begin, mid, depth + 1);
    const int right = build(mid, end, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  const Matrix& x_;
  std::span<const int> labels_;
  std::size_t n_classes_;
  std::span<const double> target_;
  TreeParams params_;
  Rng& rng_;
  std::vector<std::size_t> samples_;
  std::vector<TreeNode> nodes_;
  std::vector<double> importances_;
  std::vector<std::pair<double, std::size_t>> sorted_;
};

}  // namespace detail

inline DecisionTree DecisionTree::fit_classifier(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                                 std::vector<std::size_t> samples, const TreeParams& params,
                                                 Rng& rng) {
  require(n_classes > 0, ErrorCode::InvalidParameter, "classification tree needs at least one class");
  return detail::CartBuilder(x, y, n_classes, {}, params, rng).run(std::move(samples));
}

inline DecisionTree DecisionTree::fit_regressor(const Matrix& x, std::span<const double> target,
                                                std::vector<std::size_t> samples, const TreeParams& params, Rng& rng) {
  return detail::CartBuilder(x, {}, 0, target, params, rng).run(std::move(samples));
}

inline std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace behfilt::ml
