#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace behfilt;
using namespace behfilt::ml;
using namespace behfilt::testing;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

/// Class centres one axis apart, scaled so every pair is 6 sigma apart.
Blobs six_sigma_blobs(std::uint64_t seed) { return gaussian_blobs(5, 200, 5, 6.0 / std::sqrt(2.0), seed); }

struct HoldoutData {
  Matrix train_x, test_x;
  std::vector<int> train_y, test_y;
};

HoldoutData holdout(const Blobs& b, std::uint64_t seed) {
  const Split s = split_holdout(b.y, 0.7, true, seed);
  HoldoutData d{b.x.select_rows(s.train), b.x.select_rows(s.test), {}, {}};
  for (auto i : s.train) d.train_y.push_back(b.y[i]);
  for (auto i : s.test) d.test_y.push_back(b.y[i]);
  return d;
}

}  // namespace

TEST_CASE("every model separates 6-sigma blobs", "[classifiers]") {
  const HoldoutData d = holdout(six_sigma_blobs(3), 4);
  for (const ModelKind& kind : all_model_kinds()) {
    const TrainedModel m = train(kind, d.train_x, d.train_y, 11);
    CAPTURE(model_name(kind));
    CHECK(accuracy(d.test_y, predict(m, d.test_x)) >= 0.95);
  }
}

TEST_CASE("decision tree solves XOR, a linear model cannot", "[classifiers]") {
  const Blobs train_set = xor_data(400, 1);
  const Blobs test_set = xor_data(400, 2);
  const TrainedModel dt = train(DecisionTreeParams{}, train_set.x, train_set.y, 1);
  CHECK(accuracy(test_set.y, predict(dt, test_set.x)) == 1.0);
  const TrainedModel svc = train(LinearSvcParams{}, train_set.x, train_set.y, 1);
  CHECK(accuracy(test_set.y, predict(svc, test_set.x)) <= 0.75);
}

TEST_CASE("gradient boosting training loss never increases", "[classifiers][gbt][property]") {
  const Blobs b = gaussian_blobs(4, 60, 3, 1.5, 5);
  for (double lr : {0.05, 0.1, 0.3}) {
    const TrainedModel m = train(GbtParams{60, 3, lr}, b.x, b.y, 2);
    const auto& loss = std::get<GbtModel>(m.state).training_loss;
    REQUIRE(loss.size() == 61);
    for (std::size_t i = 1; i < loss.size(); ++i) {
      CAPTURE(lr, i);
      CHECK(loss[i] <= loss[i - 1] + 1e-12);
    }
    CHECK(loss.back() < 0.5 * loss.front());
  }
}

TEST_CASE("labels need not be contiguous", "[classifiers]") {
  Blobs b = gaussian_blobs(3, 40, 3, 6.0, 8);
  for (int& y : b.y) y = y * 7 + 2;
  for (const ModelKind& kind : all_model_kinds()) {
    const TrainedModel m = train(kind, b.x, b.y, 1);
    CHECK(m.classes == std::vector<int>{2, 9, 16});
    CHECK(accuracy(b.y, predict(m, b.x)) > 0.9);
  }
}

TEST_CASE("training and prediction are deterministic per seed", "[classifiers][property]") {
  const Blobs b = gaussian_blobs(3, 50, 4, 1.0, 9);
  for (const ModelKind& kind : all_model_kinds()) {
    const auto a = predict(train(kind, b.x, b.y, 77), b.x);
    const auto c = predict(train(kind, b.x, b.y, 77), b.x);
    CAPTURE(model_name(kind));
    CHECK(a == c);
  }
}

TEST_CASE("probabilities are distributions", "[classifiers]") {
  const Blobs b = gaussian_blobs(3, 50, 4, 1.0, 10);
  for (const ModelKind& kind : {ModelKind{RandomForestParams{}}, ModelKind{GbtParams{}}, ModelKind{NaiveBayesParams{}}}) {
    const TrainedModel m = train(kind, b.x, b.y, 5);
    const Matrix p = predict_proba(m, b.x);
    const auto labels = predict(m, b.x);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0.0;
      for (double v : p.row(i)) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK_THAT(s, WithinAbs(1.0, 1e-12));
      CHECK(m.classes[argmax(p.row(i))] == labels[i]);
    }
  }
  const TrainedModel knn = train(KnnParams{}, b.x, b.y, 5);
  CHECK_THROWS_WITH(predict_proba(knn, b.x), ContainsSubstring("Unsupported"));
}

TEST_CASE("k-NN with k=1 memorizes distinct training rows", "[classifiers][knn]") {
  const Blobs b = gaussian_blobs(4, 30, 3, 0.5, 12);
  const TrainedModel m = train(KnnParams{1}, b.x, b.y, 0);
  CHECK(predict(m, b.x) == b.y);
}

TEST_CASE("unlimited tree fits distinct training rows exactly", "[classifiers][cart]") {
  const Blobs b = gaussian_blobs(4, 30, 3, 0.5, 13);
  const TrainedModel m = train(DecisionTreeParams{}, b.x, b.y, 0);
  CHECK(predict(m, b.x) == b.y);
  const TrainedModel stump = train(DecisionTreeParams{1, 2}, b.x, b.y, 0);
  CHECK(std::get<DecisionTree>(stump.state).nodes().size() == 3);
}

TEST_CASE("model JSON round-trip preserves predictions", "[classifiers][io]") {
  const Blobs b = gaussian_blobs(3, 40, 4, 1.0, 14);
  for (const ModelKind& kind : all_model_kinds()) {
    const TrainedModel m = train(kind, b.x, b.y, 3);
    const std::string text = model_to_json(m).dump();
    const TrainedModel back = model_from_json(nlohmann::json::parse(text));
    CAPTURE(model_name(kind));
    CHECK(to_spec(back.kind) == to_spec(m.kind));
    CHECK(predict(back, b.x) == predict(m, b.x));
    CHECK(model_to_json(back).dump() == text);
  }
  CHECK_THROWS_WITH(model_from_json(nlohmann::json::parse(R"({"format":"other"})")), ContainsSubstring("BadModelFile"));
}

TEST_CASE("model specs parse, round-trip and reject unknown names", "[classifiers][spec]") {
  for (const ModelKind& kind : all_model_kinds()) CHECK(to_spec(parse_model_kind(to_spec(kind))) == to_spec(kind));
  CHECK(std::holds_alternative<GbtParams>(parse_model_kind("xgb")));
  CHECK(std::get<GbtParams>(parse_model_kind("gbt:rounds=7,depth=2,learning_rate=0.5")).rounds == 7);
  CHECK(std::get<KnnParams>(parse_model_kind("knn:k=3")).k == 3);
  CHECK_THROWS_WITH(parse_model_kind("lstm"), ContainsSubstring("UnknownModel"));
  CHECK_THROWS_WITH(parse_model_kind("rf:trees=5"), ContainsSubstring("trees"));
  CHECK_THROWS_AS(parse_model_kind("knn:k=0"), Error);
}

TEST_CASE("training and prediction errors", "[classifiers][errors]") {
  const Blobs b = gaussian_blobs(2, 10, 3, 3.0, 15);
  const std::vector<int> short_labels(5, 0);
  CHECK_THROWS_WITH(train(RandomForestParams{}, b.x, short_labels, 0), ContainsSubstring("ShapeMismatch"));
  const std::vector<int> one_class(b.y.size(), 4);
  CHECK_THROWS_WITH(train(DecisionTreeParams{}, b.x, one_class, 0), ContainsSubstring("SingleClass"));
  Matrix bad = b.x;
  bad(3, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH(train(NaiveBayesParams{}, bad, b.y, 0), ContainsSubstring("NonFiniteFeature"));
  const TrainedModel m = train(NaiveBayesParams{}, b.x, b.y, 0);
  CHECK_THROWS_WITH(predict(m, Matrix(2, 4)), ContainsSubstring("ShapeMismatch"));
}

TEST_CASE("forest feature importances favour the informative column", "[classifiers][rf]") {
  Rng rng(4);
  Matrix x(300, 4);
  std::vector<int> y;
  for (std::size_t i = 0; i < 300; ++i) {
    const int label = static_cast<int>(i % 2);
    y.push_back(label);
    for (std::size_t j = 0; j < 4; ++j) x(i, j) = rng.normal() + (j == 2 ? 3.0 * label : 0.0);
  }
  const ForestModel f = fit_forest(x, y, 2, RandomForestParams{}, 1);
  const auto imp = forest_importances(f, 4);
  double sum = 0.0;
  for (double v : imp) sum += v;
  CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
  CHECK(argmax(imp) == 2);
}
