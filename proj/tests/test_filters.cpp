#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace behfilt;
using namespace behfilt::filters;
using namespace behfilt::testing;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kFs = 50.0;

/// Projected gradient on the dual of min 0.5|y-x|^2 + lambda*TV(x):
/// x = y - D^T z with |z_i| <= lambda.
std::vector<double> tv_dual_oracle(std::span<const double> y, double lambda, int iterations) {
  const std::size_t n = y.size();
  std::vector<double> z(n - 1, 0.0);
  std::vector<double> x(y.begin(), y.end());
  for (int it = 0; it < iterations; ++it) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      z[i] = std::clamp(z[i] + 0.25 * (x[i + 1] - x[i]), -lambda, lambda);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? z[i - 1] : 0.0;
      const double right = i + 1 < n ? z[i] : 0.0;
      x[i] = y[i] + right - left;
    }
  }
  return x;
}

/// Amplitude of the `freq` component over the central part of `x`, by
/// projection onto sin and cos over whole cycles.
double tone_amplitude(std::span<const double> x, double freq, double fs, std::size_t skip) {
  const std::size_t period = static_cast<std::size_t>(std::llround(fs / freq));
  const std::size_t usable = (x.size() - 2 * skip) / period * period;
  double s = 0.0;
  double c = 0.0;
  for (std::size_t i = skip; i < skip + usable; ++i) {
    const double ph = 2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs;
    s += x[i] * std::sin(ph);
    c += x[i] * std::cos(ph);
  }
  return 2.0 * std::hypot(s, c) / static_cast<double>(usable);
}

std::vector<FilterKind> every_filter() {
  return {RawParams{},       WaveletParams{},     TvdParams{},    MedianParams{},
          LowPassParams{},   HighPassParams{},    SavGolParams{}, WaveletParams{"haar", 3, {}},
          TvdParams{0.3},    MedianParams{7},     SavGolParams{7, 2}};
}

}  // namespace

TEST_CASE("every filter preserves length", "[filters][property]") {
  for (std::size_t n : {16, 17, 50, 75, 301}) {
    const auto x = noise(n, n);
    for (const auto& kind : every_filter()) {
      CAPTURE(to_spec(kind), n);
      CHECK(apply_filter(x, kind, kFs).size() == n);
    }
  }
}

TEST_CASE("constants are fixpoints and the high-pass maps them to zero", "[filters][property]") {
  const std::vector<double> c(120, 0.73);
  for (const auto& kind : every_filter()) {
    CAPTURE(to_spec(kind));
    const auto y = apply_filter(c, kind, kFs);
    const double expected = std::holds_alternative<HighPassParams>(kind) ? 0.0 : 0.73;
    for (double v : y) REQUIRE_THAT(v, WithinAbs(expected, 1e-9));
  }
}

TEST_CASE("filters match scipy and PyWavelets reference outputs", "[filters][oracle]") {
  for (const std::string file : {"filters_n200.csv", "filters_n77.csv"}) {
    CAPTURE(file);
    auto cols = read_columns(file);
    const auto& x = cols.at("x");
    const auto check = [&](const std::string& col, const std::vector<double>& got) {
      INFO(col);
      REQUIRE(got.size() == x.size());
      CHECK(max_abs_diff(got, cols.at(col)) < 1e-9);
    };
    check("wavelet_db4", wavelet_denoise(x, WaveletParams{}));
    check("wavelet_haar", wavelet_denoise(x, WaveletParams{"haar", 3, {}}));
    check("lpf", butterworth_zero_phase(x, 5.0, kFs, 4, PassBand::Low));
    check("hpf", butterworth_zero_phase(x, 0.5, kFs, 4, PassBand::High));
    check("savgol", savitzky_golay(x, 11, 3));
    check("median", median_filter(x, 5));
  }
}

TEST_CASE("wavelet round trip with zero threshold", "[filters][wavelet]") {
  for (const char* family : {"haar", "db2", "db4"}) {
    for (std::size_t n : {8, 33, 100, 257}) {
      const auto x = noise(n, 100 + n);
      const auto y = wavelet_denoise(x, WaveletParams{family, 5, 0.0});
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        num += (x[i] - y[i]) * (x[i] - y[i]);
        den += x[i] * x[i];
      }
      CAPTURE(family, n);
      CHECK(std::sqrt(num / den) < 1e-9);
    }
  }
}

TEST_CASE("wavelet denoising reduces white noise on a slow tone", "[filters][wavelet]") {
  const auto clean = sine(512, 1.0, kFs);
  auto x = clean;
  const auto e = noise(512, 5, 0.3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += e[i];
  const auto y = wavelet_denoise(x, WaveletParams{});
  double before = 0.0;
  double after = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    before += (x[i] - clean[i]) * (x[i] - clean[i]);
    after += (y[i] - clean[i]) * (y[i] - clean[i]);
  }
  CHECK(after < 0.5 * before);
}

TEST_CASE("soft threshold", "[filters][wavelet]") {
  CHECK(soft_threshold(3.0, 1.0) == 2.0);
  CHECK(soft_threshold(-3.0, 1.0) == -2.0);
  CHECK(soft_threshold(0.5, 1.0) == 0.0);
}

TEST_CASE("TV denoising: identity at lambda 0 and the mean for large lambda", "[filters][tvd]") {
  const auto x = noise(64, 9);
  CHECK(max_abs_diff(tv_denoise(x, 0.0), x) == 0.0);
  const double mean = stats::mean(x);
  for (double v : tv_denoise(x, 1e6)) CHECK_THAT(v, WithinAbs(mean, 1e-9));
}

TEST_CASE("TV denoising agrees with a dual projected-gradient solver", "[filters][tvd][oracle]") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto y = noise(40, seed, 0.5);
    for (std::size_t i = 20; i < 40; ++i) y[i] += 2.0;
    for (double lambda : {0.05, 0.4, 2.0}) {
      CAPTURE(seed, lambda);
      const auto fast = tv_denoise(y, lambda);
      const auto slow = tv_dual_oracle(y, lambda, 200000);
      CHECK(max_abs_diff(fast, slow) < 1e-6);
    }
  }
}

TEST_CASE("TV denoising is locally optimal under perturbation", "[filters][tvd][property]") {
  const auto y = noise(50, 77);
  const double lambda = 0.3;
  const auto x = tv_denoise(y, lambda);
  const double base = tv_objective(y, x, lambda);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double eps : {1e-4, -1e-4}) {
      auto p = x;
      p[i] += eps;
      CHECK(tv_objective(y, p, lambda) >= base - 1e-12);
    }
  }
}

TEST_CASE("Butterworth low-pass: 20 Hz stopband and 1 Hz passband at 50 Hz", "[filters][butterworth]") {
  const std::size_t n = 1000;
  const auto hi = butterworth_zero_phase(sine(n, 20.0, kFs), 5.0, kFs, 4, PassBand::Low);
  const auto lo = butterworth_zero_phase(sine(n, 1.0, kFs), 5.0, kFs, 4, PassBand::Low);
  const double hi_db = 20.0 * std::log10(tone_amplitude(hi, 20.0, kFs, 100));
  const double lo_db = 20.0 * std::log10(tone_amplitude(lo, 1.0, kFs, 100));
  CHECK(hi_db < -20.0);
  CHECK(std::abs(lo_db) < 1.0);
}

TEST_CASE("Butterworth single-pass response at cutoff is -3 dB", "[filters][butterworth]") {
  for (int order : {2, 4, 6, 8}) {
    const auto low = design_butterworth(order, 5.0, kFs, PassBand::Low);
    const auto high = design_butterworth(order, 5.0, kFs, PassBand::High);
    CAPTURE(order);
    CHECK_THAT(magnitude_response(low, 5.0, kFs), WithinAbs(1.0 / std::sqrt(2.0), 1e-9));
    CHECK_THAT(magnitude_response(high, 5.0, kFs), WithinAbs(1.0 / std::sqrt(2.0), 1e-9));
    CHECK_THAT(magnitude_response(low, 0.0, kFs), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("Butterworth rejects cutoffs outside (0, fs/2)", "[filters][butterworth][errors]") {
  const auto x = noise(100, 1);
  CHECK_THROWS_AS(apply_filter(x, parse_filter("lpf:cutoff=25"), kFs), Error);
  CHECK_THROWS_AS(apply_filter(x, parse_filter("hpf:cutoff=30"), kFs), Error);
  CHECK_THROWS_AS(parse_filter("lpf:cutoff=0"), Error);
  CHECK_THROWS_AS(parse_filter("lpf:order=3"), Error);
}

TEST_CASE("Savitzky-Golay reproduces low-degree polynomials", "[filters][savgol][property]") {
  for (const auto& [window, order] : std::vector<std::pair<int, int>>{{5, 2}, {7, 3}, {11, 3}, {9, 4}}) {
    for (int degree = 0; degree <= std::min(order, 3); ++degree) {
      std::vector<double> x(60);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = static_cast<double>(i) / 10.0;
        x[i] = 0.5 - 0.3 * t + (degree >= 2 ? 0.07 * t * t : 0.0) + (degree >= 3 ? -0.01 * t * t * t : 0.0);
        if (degree == 0) x[i] = 0.5;
        if (degree == 1) x[i] = 0.5 - 0.3 * t;
      }
      CAPTURE(window, order, degree);
      CHECK(max_abs_diff(savitzky_golay(x, window, order), x) < 1e-9);
    }
  }
}

TEST_CASE("Savitzky-Golay coefficients sum to one", "[filters][savgol]") {
  for (const auto& [window, order] : std::vector<std::pair<int, int>>{{5, 2}, {11, 3}, {21, 4}}) {
    const auto c = savgol_coefficients(window, order);
    REQUIRE(c.size() == static_cast<std::size_t>(window));
    double sum = 0.0;
    for (double v : c) sum += v;
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("median filter removes isolated spikes", "[filters][median]") {
  std::vector<double> x(30, 1.0);
  x[10] = 50.0;
  x[20] = -50.0;
  for (double v : median_filter(x, 5)) CHECK(v == 1.0);
  CHECK_THROWS_AS(median_filter(x, 4), Error);
}

TEST_CASE("filter specs round-trip and reject bad tokens", "[filters][spec]") {
  for (const auto& kind : every_filter()) {
    CAPTURE(to_spec(kind));
    CHECK(parse_filter(to_spec(kind)) == kind);
  }
  CHECK(parse_filter("lpf:cutoff=3,order=2") == FilterKind{LowPassParams{3.0, 2}});
  try {
    parse_filter("wavlet");
    FAIL("expected BadFilterSpec");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadFilterSpec);
    CHECK(std::string(e.what()).find("wavlet") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_filter("median:window=4"), Error);
  CHECK_THROWS_AS(parse_filter("savgol:window=5,polyorder=5"), Error);
  CHECK_THROWS_AS(parse_filter("tvd:bogus=1"), Error);
}

TEST_CASE("TV denoising closed form for two points", "[filters][tvd]") {
  const std::vector<double> y{0.0, 2.0};
  const auto x = tv_denoise(y, 0.5);
  CHECK_THAT(x[0], WithinAbs(0.5, 1e-12));
  CHECK_THAT(x[1], WithinAbs(1.5, 1e-12));
  const auto noisy = noise(80, 4);
  CHECK(tv_objective(noisy, tv_denoise(noisy, 0.4), 0.4) <= tv_objective(noisy, noisy, 0.4));
}

TEST_CASE("median filter hand-evaluated example and monotone input", "[filters][median]") {
  CHECK(apply_filter(std::vector<double>{1, 5, 1, 1, 1}, MedianParams{3}, kFs) == std::vector<double>{1, 1, 1, 1, 1});
  std::vector<double> ramp(40);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.1 * double(i * i);
  CHECK(median_filter(ramp, 7) == ramp);
}

TEST_CASE("zero-phase Butterworth has no lag", "[filters][butterworth][property]") {
  const auto x = butterworth_zero_phase(noise(600, 31), 3.0, kFs, 4, PassBand::Low);
  for (const PassBand band : {PassBand::Low, PassBand::High}) {
    const double cutoff = band == PassBand::Low ? 6.0 : 0.5;
    const auto y = butterworth_zero_phase(x, cutoff, kFs, 4, band);
    int best_lag = 99;
    double best = -1e300;
    for (int lag = -10; lag <= 10; ++lag) {
      double s = 0.0;
      for (int i = 50; i < 550; ++i) s += x[std::size_t(i)] * y[std::size_t(i + lag)];
      if (s > best) {
        best = s;
        best_lag = lag;
      }
    }
    CHECK(best_lag == 0);
  }
}

TEST_CASE("filters are equivariant under offset and positive scaling", "[filters][property]") {
  const auto x = noise(128, 12);
  std::vector<double> shifted = x;
  std::vector<double> scaled = x;
  for (double& v : shifted) v += 3.5;
  for (double& v : scaled) v *= 2.5;
  const std::vector<FilterKind> offset_kinds{WaveletParams{"db4", 4, 0.3}, TvdParams{0.3}, MedianParams{5},
                                             LowPassParams{}, SavGolParams{}, RawParams{}};
  for (const auto& kind : offset_kinds) {
    CAPTURE(to_spec(kind));
    auto base = apply_filter(x, kind, kFs);
    for (double& v : base) v += 3.5;
    CHECK(max_abs_diff(apply_filter(shifted, kind, kFs), base) < 1e-9);
  }
  const auto hp = apply_filter(x, HighPassParams{}, kFs);
  CHECK(max_abs_diff(apply_filter(shifted, HighPassParams{}, kFs), hp) < 1e-9);

  const std::vector<std::pair<FilterKind, FilterKind>> scale_pairs{
      {WaveletParams{"db4", 4, 0.3}, WaveletParams{"db4", 4, 0.75}},
      {TvdParams{0.3}, TvdParams{0.75}},
      {MedianParams{5}, MedianParams{5}},
      {HighPassParams{}, HighPassParams{}},
      {SavGolParams{}, SavGolParams{}},
      {WaveletParams{}, WaveletParams{}},
  };
  for (const auto& [unit, big] : scale_pairs) {
    CAPTURE(to_spec(unit));
    auto base = apply_filter(x, unit, kFs);
    for (double& v : base) v *= 2.5;
    CHECK(max_abs_diff(apply_filter(scaled, big, kFs), base) < 1e-9);
  }
}

TEST_CASE("Savitzky-Golay reduces white noise on a slow tone", "[filters][savgol]") {
  const auto clean = sine(500, 1.0, kFs);
  auto x = clean;
  const auto e = noise(500, 8, 0.3);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += e[i];
  const auto y = savitzky_golay(x, 11, 3);
  std::vector<double> before(x.size()), after(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    before[i] = x[i] - clean[i];
    after[i] = y[i] - clean[i];
  }
  CHECK(stats::variance(after) < stats::variance(before));
}
