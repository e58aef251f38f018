#include <catch_amalgamated.hpp>

#include <complex>
#include <set>

#include "support.hpp"

using namespace behfilt;
using namespace behfilt::testing;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

SynthConfig quiet_config(std::vector<std::pair<Behavior, double>> schedule) {
  SynthConfig cfg;
  cfg.seed = 12;
  cfg.schedule = std::move(schedule);
  cfg.noise_sigma_active = 0.0;
  cfg.noise_sigma_inactive = 0.0;
  cfg.tremor_amplitude = 0.0;
  return cfg;
}

/// One-sided power by direct DFT of the mean-removed series, bins 1..n/2.
std::vector<double> dft_power(std::span<const double> x) {
  const std::size_t n = x.size();
  const double mean = stats::mean(x);
  std::vector<double> p(n / 2 + 1, 0.0);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> s{};
    for (std::size_t i = 0; i < n; ++i) {
      s += (x[i] - mean) * std::polar(1.0, -2.0 * std::numbers::pi * double(k * i % n) / double(n));
    }
    p[k] = std::norm(s);
  }
  return p;
}

std::vector<double> slice(const std::vector<double>& v, std::size_t b, std::size_t e) {
  return {v.begin() + static_cast<std::ptrdiff_t>(b), v.begin() + static_cast<std::ptrdiff_t>(e)};
}

}  // namespace

TEST_CASE("generation is deterministic per seed", "[synth][property]") {
  const SynthTruth a = synth_dataset(120, 3, 0.02);
  const SynthTruth b = synth_dataset(120, 3, 0.02);
  CHECK(a.noisy == b.noisy);
  CHECK(a.clean == b.clean);
  CHECK(a.spikes == b.spikes);
  CHECK(std::ranges::equal(a.labels.intervals(), b.labels.intervals()));
  CHECK_FALSE(synth_dataset(120, 4, 0.02).noisy == a.noisy);
}

TEST_CASE("without noise, tremor or spikes the noisy signal is the clean one", "[synth]") {
  const SynthConfig cfg = quiet_config(random_schedule(90, 1));
  const SynthTruth t = generate(cfg);
  CHECK(t.noisy == t.clean);
  CHECK(t.spikes.empty());
}

TEST_CASE("label track follows the schedule on the sample grid", "[synth]") {
  SynthConfig cfg;
  cfg.schedule = {{Behavior::Lying, 10.0}, {Behavior::Unknown, 4.0}, {Behavior::Walking, 7.3}, {Behavior::Eating, 5.0}};
  const SynthTruth t = generate(cfg);
  CHECK(t.noisy.size() == static_cast<std::size_t>(std::llround(26.3 * 50.0)));
  const auto iv = t.labels.intervals();
  REQUIRE(iv.size() == 3);
  CHECK(iv[0] == LabelInterval{0.0, 10000.0, Behavior::Lying});
  CHECK(iv[1] == LabelInterval{14000.0, 21300.0, Behavior::Walking});
  CHECK(iv[2] == LabelInterval{21300.0, 26300.0, Behavior::Eating});
  CHECK(t.labels.behavior_at(12000.0) == Behavior::Unknown);
  for (std::size_t i = 0; i < t.noisy.size(); ++i) CHECK_THAT(t.noisy[i].t_ms, WithinAbs(20.0 * double(i), 1e-9));
}

TEST_CASE("inactive segments are constant in the clean signal", "[synth][property]") {
  const SynthTruth t = synth_dataset(600, 8);
  const ChannelSeries ch = t.clean.channels();
  std::size_t checked = 0;
  for (const LabelInterval& iv : t.labels.intervals()) {
    if (group_of(iv.behavior) != ActivityGroup::Inactive) continue;
    const auto b = static_cast<std::size_t>(std::llround(iv.start_ms / 20.0));
    const auto e = static_cast<std::size_t>(std::llround(iv.end_ms / 20.0));
    for (const auto& c : ch) CHECK(stats::variance(slice(c, b, e)) < 1e-6);
    ++checked;
  }
  CHECK(checked > 5);
}

TEST_CASE("active behaviors carry their oscillations below 10 Hz", "[synth][property]") {
  const SynthConfig cfg = quiet_config({{Behavior::Walking, 20.0}, {Behavior::Eating, 20.0}, {Behavior::Interacting, 20.0}});
  const SynthTruth t = generate(cfg);
  const ChannelSeries ch = t.clean.channels();
  const double df = 50.0 / 1000.0;
  const auto dominant_hz = [&](std::size_t c, std::size_t seg) {
    const auto p = dft_power(slice(ch[c], seg * 1000, seg * 1000 + 1000));
    return double(ml::argmax(p)) * df;
  };
  const auto low_fraction = [&](std::size_t c, std::size_t seg) {
    const auto p = dft_power(slice(ch[c], seg * 1000, seg * 1000 + 1000));
    double low = 0.0, total = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
      total += p[k];
      if (double(k) * df < 10.0) low += p[k];
    }
    return low / total;
  };
  // Frequencies carry up to 3% jitter plus half a bin.
  CHECK_THAT(dominant_hz(2, 0), WithinAbs(2.0, 0.09));
  CHECK_THAT(dominant_hz(0, 1), WithinAbs(8.0, 0.27));
  CHECK_THAT(dominant_hz(3, 1), WithinAbs(1.0, 0.06));
  CHECK_THAT(dominant_hz(3, 2), WithinAbs(8.0, 0.27));
  CHECK_THAT(dominant_hz(0, 2), WithinAbs(1.0, 0.06));
  for (std::size_t seg = 0; seg < 3; ++seg) {
    for (std::size_t c = 0; c < kChannelCount; ++c) CHECK(low_fraction(c, seg) > 0.99);
  }
}

TEST_CASE("spikes add exactly the configured multiple of the channel spread", "[synth][spikes]") {
  SynthConfig cfg;
  cfg.seed = 21;
  cfg.schedule = random_schedule(300, 22);
  const SynthTruth plain = generate(cfg);
  cfg.spike_rate = 0.05;
  const SynthTruth spiked = generate(cfg);
  const std::size_t n = plain.noisy.size();
  const double expected = 0.05 * double(n);
  CHECK(std::abs(double(spiked.spikes.size()) - expected) < 4.0 * std::sqrt(expected * 0.95));
  std::vector<double> sd(kChannelCount);
  for (std::size_t c = 0; c < kChannelCount; ++c) sd[c] = stats::stddev(plain.noisy.channel(c));
  std::set<std::pair<std::size_t, std::size_t>> hit;
  for (std::size_t k = 0; k < spiked.spikes.size(); ++k) {
    const Spike& s = spiked.spikes[k];
    REQUIRE(s.index < n);
    REQUIRE(s.channel < kChannelCount);
    if (k > 0) CHECK(s.index > spiked.spikes[k - 1].index);
    hit.insert({s.index, s.channel});
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const double d = spiked.noisy[i].values[c] - plain.noisy[i].values[c];
      if (hit.contains({i, c})) {
        REQUIRE_THAT(std::abs(d), WithinAbs(20.0 * sd[c], 1e-9));
      } else {
        REQUIRE(d == 0.0);
      }
    }
  }
  CHECK(format_spikes({{3, 4}}) == "index,channel\n3,gy\n");
}

TEST_CASE("synthetic configuration validation", "[synth][errors]") {
  SynthConfig cfg;
  cfg.schedule = {{Behavior::Standing, 5.0}};
  cfg.tremor_band_hz = {7.0, 25.0};
  CHECK_THROWS_WITH(generate(cfg), ContainsSubstring("InvalidConfig"));
  cfg.tremor_band_hz = {9.0, 7.0};
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg.tremor_band_hz = {7.0, 9.0};
  cfg.tremor_amplitude = -1.0;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg.tremor_amplitude = 0.4;
  cfg.spike_rate = 1.5;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg.spike_rate = 0.0;
  cfg.schedule.clear();
  CHECK_THROWS_AS(generate(cfg), Error);
  CHECK_THROWS_AS(random_schedule(10, 1, 5.0, 2.0), Error);
}

TEST_CASE("run configuration text round-trips", "[config]") {
  RunConfig c;
  c.seed = 99;
  c.filter_mode = "wavelet+lpf";
  c.filters = {"uniform:raw", "behavior:wavelet:lpf:cutoff=3"};
  c.models = {"rf", "knn:k=3"};
  c.rfe_per_fold = true;
  c.synth_tremor = 0.25;
  const std::string text = to_text(c);
  const RunConfig back = parse_run_config(text);
  CHECK(to_text(back) == text);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(config_hash(c).size() == 16);
  c.seed = 100;
  CHECK(config_hash(c) != config_hash(back));
  CHECK_THROWS_WITH(parse_run_config("colour = blue\n"), ContainsSubstring("colour"));
  CHECK_THROWS_WITH(parse_run_config("seed = many\n"), ContainsSubstring("InvalidConfig"));
  CHECK(parse_run_config("# comment\n\nseed = 5\n").seed == 5);
}

TEST_CASE("FNV-1a matches published test vectors", "[config][oracle]") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("holdout preparation fits selection and scaling on training rows", "[pipeline]") {
  const FeatureMatrix fm = planted_features(200, 30, 6, 4, 2);
  HoldoutOptions opt;
  opt.rfe = RfeParams{10, 30, 0.2};
  const PreparedSplit p = prepare_holdout(fm, opt, 17);
  CHECK(p.selected.size() == 10);
  CHECK(std::ranges::is_sorted(p.selected));
  CHECK(std::ranges::adjacent_find(p.selected) == p.selected.end());
  CHECK(p.train.x.cols() == 10);
  CHECK(p.train.x.rows() + p.test.x.rows() == 200);
  for (std::size_t r = 0; r < p.train.x.rows(); ++r) {
    for (double v : p.train.x.row(r)) CHECK((v >= 0.0 && v <= 1.0));
  }
  const PreparedSplit q = prepare_holdout(fm, opt, 17);
  CHECK(q.selected == p.selected);
  CHECK(q.rows.test == p.rows.test);
}

TEST_CASE("filter comparison yields one row per combination in order", "[pipeline][compare]") {
  const SynthTruth t = synth_dataset(300, 31);
  const std::vector<Dataset> data{{t.noisy, t.labels}};
  const std::vector<FilterCombination> combos{parse_combination("uniform:raw"), parse_combination("wavelet+lpf")};
  const std::vector<ml::ModelKind> kinds{ml::DecisionTreeParams{}, ml::NaiveBayesParams{}};
  HoldoutOptions opt;
  opt.rfe.n_trees = 20;
  const CompareResult r = run_compare(data, combos, kinds, OutlierConfig{}, WindowSpec{}, opt, 5);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.model_labels == std::vector<std::string>{"DT", "NB"});
  CHECK(r.rows[0].spec == combos[0].to_spec());
  CHECK(r.rows[1].spec == combos[1].to_spec());
  for (const CompareRow& row : r.rows) {
    REQUIRE(row.per_model.size() == 2);
    CHECK((row.drop_rate_pct >= 0.0 && row.drop_rate_pct <= 100.0));
    for (const EvalReport& e : row.per_model) {
      CHECK((e.accuracy >= 0.0 && e.accuracy <= 1.0));
      CHECK((e.f1 >= 0.0 && e.f1 <= 1.0));
      CHECK(e.accuracy > 0.5);
    }
  }
  const std::string grid = format_compare_grid(r, "h");
  CHECK(grid.rfind("filter,DT,NB,Average\n", 0) == 0);
  CHECK(std::ranges::count(grid, '\n') == 4);
  CHECK(format_compare_metrics(r, "h").rfind("filter,precision,recall,f1,drop_rate_pct\n", 0) == 0);
  CHECK_THROWS_AS(run_compare({}, combos, kinds, OutlierConfig{}, WindowSpec{}, opt, 5), Error);
}
