#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "behfilt/classifiers/cart.hpp"
#include "behfilt/classifiers/gradient_boosting.hpp"
#include "behfilt/classifiers/knn.hpp"
#include "behfilt/classifiers/linear_svc.hpp"
#include "behfilt/classifiers/matrix.hpp"
#include "behfilt/classifiers/naive_bayes.hpp"
#include "behfilt/classifiers/random_forest.hpp"
#include "behfilt/csv.hpp"
#include "behfilt/error.hpp"

namespace behfilt::ml {

struct DecisionTreeParams {
  int max_depth = 0;  // 0: unlimited
  int min_samples_split = 2;

  friend bool operator==(const DecisionTreeParams&, const DecisionTreeParams&) = default;
};

using ModelKind =
    std::variant<DecisionTreeParams, RandomForestParams, GbtParams, KnnParams, NaiveBayesParams, LinearSvcParams>;

inline std::string_view model_name(const ModelKind& kind) {
  constexpr std::string_view names[] = {"dt", "rf", "gbt", "knn", "nb", "svc"};
  return names[kind.index()];
}

/// Column header used in comparison grids.
inline std::string_view model_label(const ModelKind& kind) {
  constexpr std::string_view labels[] = {"DT", "RF", "GBT (XGB slot)", "KNN", "NB", "Linear SVC"};
  return labels[kind.index()];
}

inline std::vector<ModelKind> all_model_kinds() {
  return {RandomForestParams{}, GbtParams{}, KnnParams{}, DecisionTreeParams{}, LinearSvcParams{}, NaiveBayesParams{}};
}

inline std::string to_spec(const ModelKind& kind) {
  using csv::format_double;
  struct Visitor {
    std::string operator()(const DecisionTreeParams& p) const {
      return "dt:max_depth=" + std::to_string(p.max_depth) + ",min_samples_split=" + std::to_string(p.min_samples_split);
    }
    std::string operator()(const RandomForestParams& p) const {
      return "rf:n_trees=" + std::to_string(p.n_trees) + ",max_features=" + std::to_string(p.max_features) +
             ",bootstrap=" + (p.bootstrap ? "1" : "0") + ",max_depth=" + std::to_string(p.max_depth) +
             ",min_samples_split=" + std::to_string(p.min_samples_split);
    }
    std::string operator()(const GbtParams& p) const {
      return "gbt:rounds=" + std::to_string(p.rounds) + ",depth=" + std::to_string(p.max_depth) +
             ",learning_rate=" + format_double(p.learning_rate);
    }
    std::string operator()(const KnnParams& p) const { return "knn:k=" + std::to_string(p.k); }
    std::string operator()(const NaiveBayesParams& p) const {
      return "nb:var_smoothing=" + format_double(p.var_smoothing);
    }
    std::string operator()(const LinearSvcParams& p) const {
      return "svc:lambda=" + format_double(p.lambda) + ",epochs=" + std::to_string(p.epochs);
    }
  };
  return std::visit(Visitor{}, kind);
}

inline void validate(const ModelKind& kind) {
  struct Visitor {
    void operator()(const DecisionTreeParams& p) const {
      require(p.max_depth >= 0 && p.min_samples_split >= 2, ErrorCode::InvalidParameter,
              "dt needs max_depth >= 0 (0 = unlimited) and min_samples_split >= 2");
    }
    void operator()(const RandomForestParams& p) const {
      require(p.n_trees >= 1 && p.max_depth >= 0 && p.min_samples_split >= 2, ErrorCode::InvalidParameter,
              "rf needs n_trees >= 1, max_depth >= 0 and min_samples_split >= 2");
    }
    void operator()(const GbtParams& p) const {
      require(p.rounds >= 1 && p.max_depth >= 1 && p.learning_rate > 0.0, ErrorCode::InvalidParameter,
              "gbt needs rounds >= 1, depth >= 1 and learning_rate > 0");
    }
    void operator()(const KnnParams& p) const {
      require(p.k >= 1, ErrorCode::InvalidParameter, "knn needs k >= 1");
    }
    void operator()(const NaiveBayesParams& p) const {
      require(p.var_smoothing > 0.0, ErrorCode::InvalidParameter, "nb needs var_smoothing > 0");
    }
    void operator()(const LinearSvcParams& p) const {
      require(p.lambda > 0.0 && p.epochs >= 1, ErrorCode::InvalidParameter, "svc needs lambda > 0 and epochs >= 1");
    }
  };
  std::visit(Visitor{}, kind);
}

/// `name` or `name:key=value,...`; names dt, rf, gbt (aliases xgb, gbm),
/// knn, nb, svc.
inline ModelKind parse_model_kind(std::string_view spec) {
  spec = csv::trim(spec);
  const std::size_t colon = spec.find(':');
  const std::string_view name = csv::trim(spec.substr(0, colon));
  std::vector<std::pair<std::string_view, std::string_view>> params;
  if (colon != std::string_view::npos) {
    for (std::string_view token : csv::split(spec.substr(colon + 1), ',')) {
      const std::size_t eq = token.find('=');
      require(eq != std::string_view::npos, ErrorCode::UnknownModel, "expected key=value, got '" + std::string(token) + "'");
      params.emplace_back(csv::trim(token.substr(0, eq)), csv::trim(token.substr(eq + 1)));
    }
  }
  const auto as_int = [](std::string_view key, std::string_view v) {
    const auto r = csv::parse_int(v);
    require(r.has_value(), ErrorCode::UnknownModel, "bad integer for '" + std::string(key) + "'");
    return *r;
  };
  const auto as_double = [](std::string_view key, std::string_view v) {
    const auto r = csv::parse_double(v);
    require(r.has_value(), ErrorCode::UnknownModel, "bad number for '" + std::string(key) + "'");
    return *r;
  };
  const auto unknown = [&](std::string_view key) {
    fail(ErrorCode::UnknownModel, "unknown parameter '" + std::string(key) + "' for model '" + std::string(name) + "'");
  };

  ModelKind kind;
  if (name == "dt") {
    DecisionTreeParams p;
    for (auto [k, v] : params) {
      if (k == "max_depth") p.max_depth = static_cast<int>(as_int(k, v));
      else if (k == "min_samples_split") p.min_samples_split = static_cast<int>(as_int(k, v));
      else unknown(k);
    }
    kind = p;
  } else if (name == "rf") {
    RandomForestParams p;
    for (auto [k, v] : params) {
      if (k == "n_trees") p.n_trees = static_cast<int>(as_int(k, v));
      else if (k == "max_features") p.max_features = static_cast<std::size_t>(as_int(k, v));
      else if (k == "bootstrap") p.bootstrap = v == "1" || v == "true";
      else if (k == "max_depth") p.max_depth = static_cast<int>(as_int(k, v));
      else if (k == "min_samples_split") p.min_samples_split = static_cast<int>(as_int(k, v));
      else unknown(k);
    }
    kind = p;
  } else if (name == "gbt" || name == "xgb" || name == "gbm") {
    GbtParams p;
    for (auto [k, v] : params) {
      if (k == "rounds") p.rounds = static_cast<int>(as_int(k, v));
      else if (k == "depth") p.max_depth = static_cast<int>(as_int(k, v));
      else if (k == "learning_rate") p.learning_rate = as_double(k, v);
      else unknown(k);
    }
    kind = p;
  } else if (name == "knn") {
    KnnParams p;
    for (auto [k, v] : params) {
      if (k == "k") p.k = static_cast<int>(as_int(k, v));
      else unknown(k);
    }
    kind = p;
  } else if (name == "nb") {
    NaiveBayesParams p;
    for (auto [k, v] : params) {
      if (k == "var_smoothing") p.var_smoothing = as_double(k, v);
      else unknown(k);
    }
    kind = p;
  } else if (name == "svc" || name == "linear_svc") {
    LinearSvcParams p;
    for (auto [k, v] : params) {
      if (k == "lambda") p.lambda = as_double(k, v);
      else if (k == "epochs") p.epochs = static_cast<int>(as_int(k, v));
      else unknown(k);
    }
    kind = p;
  } else {
    fail(ErrorCode::UnknownModel, "unknown model '" + std::string(name) + "'");
  }
  validate(kind);
  return kind;
}

using ModelState = std::variant<DecisionTree, ForestModel, GbtModel, KnnModel, NaiveBayesModel, LinearSvcModel>;

/// A fitted classifier. Internally classes are indices into `classes`
/// (sorted ascending), so "lowest class index" means the smallest label.
struct TrainedModel {
  ModelKind kind;
  std::vector<int> classes;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
  ModelState state;
};

namespace detail {

inline void check_features(const Matrix& x) {
  require(x.all_finite(), ErrorCode::NonFiniteFeature, "feature matrix contains non-finite values");
}

}  // namespace detail

inline TrainedModel train(const ModelKind& kind, const Matrix& x, std::span<const int> y, std::uint64_t seed) {
  validate(kind);
  require(x.rows() == y.size(), ErrorCode::ShapeMismatch,
          "feature rows (" + std::to_string(x.rows()) + ") and labels (" + std::to_string(y.size()) + ") differ");
  require(x.rows() >= 2, ErrorCode::ShapeMismatch, "training needs at least two rows");
  detail::check_features(x);

  TrainedModel model;
  model.kind = kind;
  model.n_features = x.cols();
  model.seed = seed;
  model.classes.assign(y.begin(), y.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()), model.classes.end());
  require(model.classes.size() >= 2, ErrorCode::SingleClass, "training labels contain a single class");

  std::vector<int> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    idx[i] = static_cast<int>(std::lower_bound(model.classes.begin(), model.classes.end(), y[i]) - model.classes.begin());
  }
  const std::size_t k = model.classes.size();

  struct Visitor {
    const Matrix& x;
    const std::vector<int>& y;
    std::size_t k;
    std::uint64_t seed;
    ModelState operator()(const DecisionTreeParams& p) const {
      Rng rng(seed);
      return DecisionTree::fit_classifier(x, y, k, all_rows(x.rows()), TreeParams{p.max_depth, p.min_samples_split, 0},
                                          rng);
    }
    ModelState operator()(const RandomForestParams& p) const { return fit_forest(x, y, k, p, seed); }
    ModelState operator()(const GbtParams& p) const { return fit_gbt(x, y, k, p, seed); }
    ModelState operator()(const KnnParams& p) const { return KnnModel{x, y, k, p.k}; }
    ModelState operator()(const NaiveBayesParams& p) const { return fit_naive_bayes(x, y, k, p); }
    ModelState operator()(const LinearSvcParams& p) const { return fit_linear_svc(x, y, k, p, seed); }
  };
  model.state = std::visit(Visitor{x, idx, k, seed}, kind);
  return model;
}

inline bool supports_proba(const TrainedModel& m) {
  return std::holds_alternative<ForestModel>(m.state) || std::holds_alternative<GbtModel>(m.state) ||
         std::holds_alternative<NaiveBayesModel>(m.state);
}

namespace detail {

inline void check_shape(const TrainedModel& m, const Matrix& x) {
  require(x.cols() == m.n_features, ErrorCode::ShapeMismatch,
          "model expects " + std::to_string(m.n_features) + " features, got " + std::to_string(x.cols()));
  check_features(x);
}

/// Class-index decision for one row.
inline std::size_t decide(const TrainedModel& m, std::span<const double> row) {
  struct Visitor {
    std::span<const double> row;
    std::size_t operator()(const DecisionTree& t) const { return argmax(t.leaf(row).value); }
    std::size_t operator()(const ForestModel& f) const { return argmax(forest_votes(f, row)); }
    std::size_t operator()(const GbtModel& g) const { return argmax(gbt_scores(g, row)); }
    std::size_t operator()(const KnnModel& k) const { return static_cast<std::size_t>(knn_predict(k, row)); }
    std::size_t operator()(const NaiveBayesModel& nb) const { return argmax(naive_bayes_jll(nb, row)); }
    std::size_t operator()(const LinearSvcModel& s) const { return argmax(linear_svc_scores(s, row)); }
  };
  return std::visit(Visitor{row}, m.state);
}

}  // namespace detail

inline std::vector<int> predict(const TrainedModel& m, const Matrix& x) {
  detail::check_shape(m, x);
  std::vector<int> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = m.classes[detail::decide(m, x.row(i))];
  return out;
}

/// Per-class scores in `classes` order: RF vote fractions, GBT softmax,
/// NB posteriors. Other kinds throw Unsupported.
inline Matrix predict_proba(const TrainedModel& m, const Matrix& x) {
  require(supports_proba(m), ErrorCode::Unsupported,
          "model '" + std::string(model_name(m.kind)) + "' does not produce probabilities");
  detail::check_shape(m, x);
  Matrix out(x.rows(), m.classes.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    std::vector<double> p;
    if (const auto* f = std::get_if<ForestModel>(&m.state)) {
      p = forest_votes(*f, x.row(i));
    } else if (const auto* g = std::get_if<GbtModel>(&m.state)) {
      p = gbt_scores(*g, x.row(i));
      softmax_inplace(p);
    } else {
      p = naive_bayes_jll(std::get<NaiveBayesModel>(m.state), x.row(i));
      softmax_inplace(p);
    }
    std::copy(p.begin(), p.end(), out.row(i).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: versioned JSON document.

inline constexpr std::string_view kModelFormat = "behfilt-model";
inline constexpr int kModelVersion = 1;

namespace detail {

using nlohmann::json;

inline json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

inline json tree_to_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const TreeNode& n : t.nodes()) {
    json jn{{"f", n.feature}, {"n", n.samples}};
    if (n.is_leaf()) {
      jn["v"] = n.value;
    } else {
      jn["t"] = n.threshold;
      jn["l"] = n.left;
      jn["r"] = n.right;
    }
    nodes.push_back(std::move(jn));
  }
  return json{{"nodes", std::move(nodes)}, {"importances", t.importances()}};
}

inline DecisionTree tree_from_json(const json& j) {
  std::vector<TreeNode> nodes;
  for (const json& jn : j.at("nodes")) {
    TreeNode n;
    n.feature = jn.at("f").get<int>();
    n.samples = jn.at("n").get<std::size_t>();
    if (n.is_leaf()) {
      n.value = jn.at("v").get<std::vector<double>>();
    } else {
      n.threshold = jn.at("t").get<double>();
      n.left = jn.at("l").get<int>();
      n.right = jn.at("r").get<int>();
    }
    nodes.push_back(std::move(n));
  }
  const auto check_node = [&](int child) {
    require(child > 0 && static_cast<std::size_t>(child) < nodes.size(), ErrorCode::BadModelFile,
            "tree node references a missing child");
  };
  for (const TreeNode& n : nodes) {
    if (!n.is_leaf()) {
      check_node(n.left);
      check_node(n.right);
    }
  }
  require(!nodes.empty(), ErrorCode::BadModelFile, "empty tree");
  DecisionTree t(std::move(nodes));
  t.set_importances(j.at("importances").get<std::vector<double>>());
  return t;
}

inline json state_to_json(const ModelState& state) {
  struct Visitor {
    json operator()(const DecisionTree& t) const { return tree_to_json(t); }
    json operator()(const ForestModel& f) const {
      json trees = json::array();
      for (const auto& t : f.trees) trees.push_back(tree_to_json(t));
      return json{{"n_classes", f.n_classes}, {"trees", std::move(trees)}};
    }
    json operator()(const GbtModel& g) const {
      json rounds = json::array();
      for (const auto& r : g.rounds) {
        json per_class = json::array();
        for (const auto& t : r) per_class.push_back(tree_to_json(t));
        rounds.push_back(std::move(per_class));
      }
      return json{{"initial_scores", g.initial_scores},
                  {"learning_rate", g.learning_rate},
                  {"training_loss", g.training_loss},
                  {"rounds", std::move(rounds)}};
    }
    json operator()(const KnnModel& k) const {
      return json{{"k", k.k}, {"n_classes", k.n_classes}, {"x", matrix_to_json(k.x)}, {"y", k.y}};
    }
    json operator()(const NaiveBayesModel& nb) const {
      return json{{"log_prior", nb.log_prior},
                  {"means", matrix_to_json(nb.means)},
                  {"variances", matrix_to_json(nb.variances)}};
    }
    json operator()(const LinearSvcModel& s) const { return json{{"weights", matrix_to_json(s.weights)}}; }
  };
  return std::visit(Visitor{}, state);
}

inline ModelState state_from_json(const ModelKind& kind, const json& j) {
  switch (kind.index()) {
    case 0: return tree_from_json(j);
    case 1: {
      ForestModel f;
      f.n_classes = j.at("n_classes").get<std::size_t>();
      for (const json& t : j.at("trees")) f.trees.push_back(tree_from_json(t));
      return f;
    }
    case 2: {
      GbtModel g;
      g.initial_scores = j.at("initial_scores").get<std::vector<double>>();
      g.learning_rate = j.at("learning_rate").get<double>();
      g.training_loss = j.at("training_loss").get<std::vector<double>>();
      for (const json& r : j.at("rounds")) {
        std::vector<DecisionTree> per_class;
        for (const json& t : r) per_class.push_back(tree_from_json(t));
        g.rounds.push_back(std::move(per_class));
      }
      return g;
    }
    case 3: {
      KnnModel k;
      k.k = j.at("k").get<int>();
      k.n_classes = j.at("n_classes").get<std::size_t>();
      k.x = matrix_from_json(j.at("x"));
      k.y = j.at("y").get<std::vector<int>>();
      return k;
    }
    case 4: {
      NaiveBayesModel nb;
      nb.log_prior = j.at("log_prior").get<std::vector<double>>();
      nb.means = matrix_from_json(j.at("means"));
      nb.variances = matrix_from_json(j.at("variances"));
      return nb;
    }
    default: return LinearSvcModel{matrix_from_json(j.at("weights"))};
  }
}

}  // namespace detail

inline nlohmann::json model_to_json(const TrainedModel& m) {
  return nlohmann::json{{"format", kModelFormat},
                        {"version", kModelVersion},
                        {"kind", to_spec(m.kind)},
                        {"classes", m.classes},
                        {"n_features", m.n_features},
                        {"seed", m.seed},
                        {"state", detail::state_to_json(m.state)}};
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format").get<std::string>() == kModelFormat, ErrorCode::BadModelFile, "not a behfilt model file");
    require(j.at("version").get<int>() == kModelVersion, ErrorCode::BadModelFile,
            "unsupported model version " + std::to_string(j.at("version").get<int>()));
    TrainedModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.classes = j.at("classes").get<std::vector<int>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.state = detail::state_from_json(m.kind, j.at("state"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BadModelFile, e.what());
  }
}

}  // namespace behfilt::ml
