#include <catch_amalgamated.hpp>

#include <functional>
#include <set>

#include "support.hpp"

using namespace behfilt;
using namespace behfilt::testing;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kFs = 50.0;

ChannelSeries load_window(const std::string& name) {
  auto cols = read_columns("window_" + name + ".csv");
  ChannelSeries w;
  for (std::size_t c = 0; c < kChannelCount; ++c) w[c] = cols.at(std::string(kChannelNames[c]));
  return w;
}

std::vector<std::pair<std::string, double>> load_golden(const std::string& name) {
  const auto lines = csv::lines_of(csv::read_file(data_path("golden_" + name + ".csv")));
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = csv::split(lines[i]);
    out.emplace_back(std::string(cells[0]), csv::parse_double(cells[1]).value());
  }
  return out;
}

ImuRecording recording_of(const ChannelSeries& ch) {
  std::vector<ImuSample> samples(ch[0].size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].t_ms = 20.0 * static_cast<double>(i);
    for (std::size_t c = 0; c < kChannelCount; ++c) samples[i].values[c] = ch[c][i];
  }
  return ImuRecording(std::move(samples), kFs);
}

ChannelSeries channels_with(std::size_t n, const std::function<double(std::size_t, std::size_t)>& f) {
  ChannelSeries w;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    w[c].resize(n);
    for (std::size_t i = 0; i < n; ++i) w[c][i] = f(c, i);
  }
  return w;
}

std::size_t index_of(const std::string& name) {
  const auto names = feature_names();
  return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

}  // namespace

TEST_CASE("feature names: 104 unique, grouped by kind", "[features]") {
  const auto names = feature_names();
  REQUIRE(names.size() == 104);
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 104);
  CHECK(names[0] == "ax_min");
  CHECK(names[59] == "gz_kurt");
  CHECK(names[60] == "ax_spec_entropy");
  CHECK(names[89] == "gz_spec_spread");
  CHECK(names[90] == "sma_acc");
  CHECK(names[103] == "mag_mean_all");
}

TEST_CASE("features match the numpy golden files", "[features][golden]") {
  for (const std::string name : {"zeros", "constant", "noisy_sine"}) {
    const auto got = extract_features(load_window(name), kFs);
    const auto golden = load_golden(name);
    const auto names = feature_names();
    REQUIRE(got.size() == 104);
    REQUIRE(golden.size() == 104);
    for (std::size_t j = 0; j < 104; ++j) {
      CAPTURE(name, golden[j].first);
      REQUIRE(golden[j].first == names[j]);
      CHECK_THAT(got[j], WithinAbs(golden[j].second, 1e-9));
    }
  }
}

TEST_CASE("every valid window yields 104 finite values", "[features][property]") {
  for (std::size_t n : {8, 9, 50, 75, 150}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(seed);
      const double scale = std::pow(10.0, rng.uniform(-3.0, 3.0));
      const auto w = channels_with(n, [&](std::size_t, std::size_t) { return scale * rng.normal(); });
      const auto f = extract_features(w, kFs);
      CAPTURE(n, seed);
      REQUIRE(f.size() == 104);
      for (double v : f) CHECK(std::isfinite(v));
    }
  }
}

TEST_CASE("spectral energy obeys Parseval and the dominant bin is the tone", "[features][oracle]") {
  const std::size_t n = 75;
  for (std::size_t k : {1, 5, 12, 30, 37}) {
    const double f = static_cast<double>(k) * kFs / static_cast<double>(n);
    const auto w = channels_with(n, [&](std::size_t c, std::size_t i) {
      return (c + 1) * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / kFs + 0.3);
    });
    const auto feats = extract_features(w, kFs);
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const std::string ch(kChannelNames[c]);
      // Direct sum over the windowed, mean-removed series: for odd N the
      // one-sided bins hold half of the non-DC energy.
      const double mean = stats::mean(w[c]);
      double s = 0.0;
      double s2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double h = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
        const double v = (w[c][i] - mean) * h;
        s += v;
        s2 += v * v;
      }
      CAPTURE(k, ch);
      CHECK_THAT(feats[index_of(ch + "_spec_energy")], WithinAbs(0.5 * (s2 - s * s / static_cast<double>(n)), 1e-9));
      CHECK_THAT(feats[index_of(ch + "_dom_freq")], WithinAbs(f, 1e-12));
    }
  }
}

TEST_CASE("time-domain features of a known ramp", "[features]") {
  const auto w = channels_with(11, [](std::size_t, std::size_t i) { return static_cast<double>(i); });
  const auto f = extract_features(w, kFs);
  CHECK(f[index_of("ax_min")] == 0.0);
  CHECK(f[index_of("ax_max")] == 10.0);
  CHECK(f[index_of("ax_mean")] == 5.0);
  CHECK(f[index_of("ax_median")] == 5.0);
  CHECK_THAT(f[index_of("ax_var")], WithinAbs(10.0, 1e-12));
  CHECK_THAT(f[index_of("ax_p25")], WithinAbs(2.5, 1e-12));
  CHECK_THAT(f[index_of("ax_p75")], WithinAbs(7.5, 1e-12));
  CHECK_THAT(f[index_of("ax_skew")], WithinAbs(0.0, 1e-12));
  CHECK_THAT(f[index_of("ax_kurt")], WithinAbs(-1.22, 1e-12));
  CHECK_THAT(f[index_of("ax_sum_abs")], WithinAbs(55.0, 1e-12));
  CHECK_THAT(f[index_of("sma_all")], WithinAbs(30.0, 1e-12));
  CHECK_THAT(f[index_of("mag_mean_acc")], WithinAbs(5.0 * std::sqrt(3.0), 1e-12));
}

TEST_CASE("feature extraction errors", "[features][errors]") {
  const auto small = channels_with(7, [](std::size_t, std::size_t i) { return static_cast<double>(i); });
  CHECK_THROWS_WITH(extract_features(small, kFs), ContainsSubstring("WindowTooShort"));
  auto bad = channels_with(20, [](std::size_t, std::size_t) { return 1.0; });
  bad[2][4] = kMissing;
  CHECK_THROWS_WITH(extract_features(bad, kFs), ContainsSubstring("MissingValues"));
}

TEST_CASE("windows take the majority label and respect purity", "[features][windows]") {
  const auto ch = channels_with(300, [](std::size_t, std::size_t i) { return std::sin(0.3 * static_cast<double>(i)); });
  const ImuRecording rec = recording_of(ch);
  // 75-sample windows start at 0, 1500, 3000, 4500 ms.
  const LabelTrack track({{0, 1500, Behavior::Lying},
                          {1500, 2700, Behavior::Eating},   // 60 of 75 samples: purity 0.8
                          {2700, 3000, Behavior::Walking},
                          {3000, 3700, Behavior::Standing},  // 35 of 75: impure
                          {3700, 4500, Behavior::Walking},
                          {4500, 6000, Behavior::Drinking}});
  const auto windows = make_windows(rec, track, WindowSpec{});
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].label == Behavior::Lying);
  CHECK(windows[0].purity == 1.0);
  CHECK(windows[1].label == Behavior::Eating);
  CHECK_THAT(windows[1].purity, WithinAbs(0.8, 1e-12));
  CHECK(windows[1].start_ms == 1500.0);

  WindowSpec half;
  half.overlap_fraction = 0.5;
  half.length_s = 1.0;
  CHECK(make_windows(rec, LabelTrack({{0, 6000, Behavior::Lying}}), half).size() == (300 - 50) / 25 + 1);
  CHECK_THROWS_WITH(make_windows(recording_of(channels_with(40, [](auto, auto) { return 0.0; })), track, WindowSpec{}),
                    ContainsSubstring("RecordingShorterThanWindow"));
}

TEST_CASE("featurize and the feature CSV round-trip", "[features][io]") {
  const SynthTruth t = synth_dataset(60.0, 8);
  const FeatureMatrix fm = featurize(t.noisy, t.labels, WindowSpec{});
  REQUIRE(fm.rows() > 10);
  CHECK(fm.x.cols() == 104);
  const FeatureMatrix back = parse_features(format_features(fm));
  CHECK(back.names == fm.names);
  CHECK(back.labels == fm.labels);
  CHECK(back.window_start_ms == fm.window_start_ms);
  CHECK(back.x.data() == fm.x.data());
  CHECK(format_features(back) == format_features(fm));
}

TEST_CASE("two-window recording gives a 2 x 104 matrix", "[features]") {
  const auto ch = channels_with(150, [](std::size_t c, std::size_t i) { return std::cos(0.2 * i + c); });
  const FeatureMatrix fm =
      featurize(recording_of(ch), LabelTrack({{0, 1500, Behavior::Walking}, {1500, 3000, Behavior::Lying}}), WindowSpec{});
  CHECK(fm.rows() == 2);
  CHECK(fm.x.cols() == 104);
  CHECK(fm.labels == std::vector<int>{static_cast<int>(Behavior::Walking), static_cast<int>(Behavior::Lying)});
}

TEST_CASE("RFE keeps the target count and the planted features", "[features][rfe]") {
  const FeatureMatrix fm = planted_features(400, 104, 50, 5, 21);
  const auto sel = rfe_select(fm.x, fm.labels, RfeParams{}, 99);
  REQUIRE(sel.size() == 50);
  CHECK(std::is_sorted(sel.begin(), sel.end()));
  CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == 50);
  const auto recovered = std::count_if(sel.begin(), sel.end(), [](std::size_t j) { return j < 50; });
  CHECK(recovered >= 45);
  CHECK(rfe_select(fm.x, fm.labels, RfeParams{}, 99) == sel);
}

TEST_CASE("RFE edge cases", "[features][rfe]") {
  const FeatureMatrix fm = planted_features(60, 10, 3, 3, 2);
  RfeParams p;
  p.target_count = 10;
  p.n_trees = 10;
  CHECK(rfe_select(fm.x, fm.labels, p, 1) == ml::all_rows(10));
  p.target_count = 11;
  CHECK_THROWS_WITH(rfe_select(fm.x, fm.labels, p, 1), ContainsSubstring("TooFewFeatures"));
  p.target_count = 9;
  CHECK(rfe_select(fm.x, fm.labels, p, 1).size() == 9);
}

TEST_CASE("selection CSV round-trip", "[features][io]") {
  const std::vector<std::size_t> sel{0, 3, 7};
  const std::string text = format_selection(sel, feature_names());
  CHECK(text == "index,name\n0,ax_min\n3,ax_median\n7,ax_rms\n");
  CHECK(parse_selection(text) == sel);
}

TEST_CASE("min-max scaling", "[features][scaler]") {
  const ml::Matrix train = ml::Matrix::from_rows({{1, 5, 2}, {3, 5, 4}, {2, 5, 0}});
  const ScalerParams p = fit_minmax(train);
  const ml::Matrix s = apply_minmax(train, p);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(s(r, j) >= 0.0);
      CHECK(s(r, j) <= 1.0);
    }
    CHECK(s(r, 1) == 0.0);
  }
  CHECK(s(0, 0) == 0.0);
  CHECK(s(1, 0) == 1.0);
  const ml::Matrix outside = apply_minmax(ml::Matrix::from_rows({{5, 9, -2}}), p);
  CHECK(outside(0, 0) == 2.0);
  CHECK(outside(0, 2) == -0.5);
  const ScalerParams back = parse_scaler(format_scaler(p));
  CHECK(back.min == p.min);
  CHECK(back.max == p.max);
  CHECK_THROWS_WITH(apply_minmax(ml::Matrix(2, 4), p), ContainsSubstring("ShapeMismatch"));
  CHECK_THROWS_WITH(fit_minmax(ml::Matrix(0, 3)), ContainsSubstring("EmptyMatrix"));
}
