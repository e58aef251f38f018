#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "behfilt/classifiers/cart.hpp"
#include "behfilt/rng.hpp"

namespace behfilt::ml {

struct GbtParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;

  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

/// Multiclass gradient boosting on the softmax log-loss: each round fits
/// one squared-error tree per class to the negative gradient y_k - p_k and
/// replaces its leaf values with a one-step Newton estimate.
struct GbtModel {
  std::vector<double> initial_scores;               // log class priors
  std::vector<std::vector<DecisionTree>> rounds;    // rounds[m][k]
  double learning_rate = 0.1;
  std::vector<double> training_loss;                // mean log-loss after init and after each round
};

inline void softmax_inplace(std::span<double> scores) {
  const double mx = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double& s : scores) {
    s = std::exp(s - mx);
    sum += s;
  }
  for (double& s : scores) s /= sum;
}

inline double mean_log_loss(const Matrix& scores, std::span<const int> y) {
  double loss = 0.0;
  std::vector<double> p(scores.cols());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    std::copy(scores.row(i).begin(), scores.row(i).end(), p.begin());
    softmax_inplace(p);
    loss -= std::log(std::max(p[static_cast<std::size_t>(y[i])], 1e-300));
  }
  return loss / static_cast<double>(scores.rows());
}

inline GbtModel fit_gbt(const Matrix& x, std::span<const int> y, std::size_t n_classes, const GbtParams& p,
                        std::uint64_t seed) {
  require(p.rounds >= 1 && p.max_depth >= 1 && p.learning_rate > 0.0, ErrorCode::InvalidParameter,
          "GBT needs rounds >= 1, depth >= 1 and a positive learning rate");
  const std::size_t n = x.rows();
  const std::size_t k_count = n_classes;
  Rng rng(seed);
  GbtModel model;
  model.learning_rate = p.learning_rate;

  std::vector<double> prior(k_count, 0.0);
  for (int label : y) prior[static_cast<std::size_t>(label)] += 1.0;
  model.initial_scores.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    model.initial_scores[k] = std::log(std::max(prior[k], 1e-12) / static_cast<double>(n));
  }

  Matrix scores(n, k_count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < k_count; ++k) scores(i, k) = model.initial_scores[k];
  }
  model.training_loss.push_back(mean_log_loss(scores, y));

  const TreeParams tp{p.max_depth, 2, 0};
  const double newton_scale = static_cast<double>(k_count - 1) / static_cast<double>(k_count);
  Matrix prob(n, k_count);
  std::vector<double> residual(n);
  for (int m = 0; m < p.rounds; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(scores.row(i).begin(), scores.row(i).end(), prob.row(i).begin());
      softmax_inplace(prob.row(i));
    }
    std::vector<DecisionTree> round_trees;
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        residual[i] = (static_cast<std::size_t>(y[i]) == k ? 1.0 : 0.0) - prob(i, k);
      }
      DecisionTree tree = DecisionTree::fit_regressor(x, residual, all_rows(n), tp, rng);
      auto& nodes = tree.nodes();
      std::vector<double> num(nodes.size(), 0.0);
      std::vector<double> den(nodes.size(), 0.0);
      std::vector<std::size_t> leaf_of(n);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_of[i] = tree.leaf_index(x.row(i));
        const double r = residual[i];
        num[leaf_of[i]] += r;
        den[leaf_of[i]] += std::abs(r) * (1.0 - std::abs(r));
      }
      for (std::size_t node = 0; node < nodes.size(); ++node) {
        if (!nodes[node].is_leaf()) continue;
        nodes[node].value = {den[node] < 1e-150 ? 0.0 : newton_scale * num[node] / den[node]};
      }
      for (std::size_t i = 0; i < n; ++i) scores(i, k) += p.learning_rate * nodes[leaf_of[i]].value[0];
      round_trees.push_back(std::move(tree));
    }
    model.rounds.push_back(std::move(round_trees));
    model.training_loss.push_back(mean_log_loss(scores, y));
  }
  return model;
}

inline std::vector<double> gbt_scores(const GbtModel& m, std::span<const double> row) {
  std::vector<double> s = m.initial_scores;
  for (const auto& round : m.rounds) {
    for (std::size_t k = 0; k < round.size(); ++k) s[k] += m.learning_rate * round[k].leaf(row).value[0];
  }
  return s;
}

}  // namespace behfilt::ml
