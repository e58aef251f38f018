#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "behfilt/classifiers/matrix.hpp"
#include "behfilt/classifiers/random_forest.hpp"
#include "behfilt/csv.hpp"
#include "behfilt/data_model.hpp"
#include "behfilt/error.hpp"
#include "behfilt/stats.hpp"

namespace behfilt {

struct WindowSpec {
  double length_s = 1.5;
  double overlap_fraction = 0.0;
  double purity_threshold = 0.8;

  void validate() const {
    require(length_s > 0.0, ErrorCode::InvalidParameter, "window length must be > 0");
    require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrorCode::InvalidParameter,
            "window overlap must be in [0, 1)");
    require(purity_threshold > 0.0 && purity_threshold <= 1.0, ErrorCode::InvalidParameter,
            "purity threshold must be in (0, 1]");
  }

  /// Samples per window; length_s * fs must be a whole number.
  std::size_t samples(double fs_hz) const {
    validate();
    const double exact = length_s * fs_hz;
    const double rounded = std::round(exact);
    require(rounded >= 1.0 && std::abs(exact - rounded) < 1e-9, ErrorCode::InvalidParameter,
            "window of " + csv::format_double(length_s) + " s is not a whole number of samples at " +
                csv::format_double(fs_hz) + " Hz");
    return static_cast<std::size_t>(rounded);
  }

  std::size_t step(double fs_hz) const {
    const std::size_t len = samples(fs_hz);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::round(static_cast<double>(len) * (1.0 - overlap_fraction))));
  }
};

struct Window {
  std::size_t begin = 0;
  std::size_t length = 0;
  Behavior label = Behavior::Unknown;
  double purity = 0.0;
  double start_ms = 0.0;
};

/// Windows kept for classification: purity at least the threshold and a
/// majority label other than Unknown or Drinking. Majority ties go to the
/// behavior listed first.
inline std::vector<Window> make_windows(const ImuRecording& rec, const LabelTrack& track, const WindowSpec& spec) {
  const std::size_t len = spec.samples(rec.sample_rate_hz());
  const std::size_t step = spec.step(rec.sample_rate_hz());
  require(rec.size() >= len, ErrorCode::RecordingShorterThanWindow,
          "recording has " + std::to_string(rec.size()) + " samples, window needs " + std::to_string(len));
  std::vector<Behavior> labels(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) labels[i] = track.behavior_at(rec[i].t_ms);

  std::vector<Window> out;
  for (std::size_t begin = 0; begin + len <= rec.size(); begin += step) {
    std::array<std::size_t, kAllBehaviors.size()> counts{};
    for (std::size_t i = begin; i < begin + len; ++i) ++counts[static_cast<std::size_t>(labels[i])];
    const auto best = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    const Behavior label = kAllBehaviors[best];
    const double purity = static_cast<double>(counts[best]) / static_cast<double>(len);
    if (purity < spec.purity_threshold || label == Behavior::Unknown || label == Behavior::Drinking) continue;
    out.push_back({begin, len, label, purity, rec[begin].t_ms});
  }
  return out;
}

inline constexpr std::size_t kTimeFeaturesPerChannel = 10;
inline constexpr std::size_t kSpectralFeaturesPerChannel = 5;
inline constexpr std::size_t kAggregateFeatures = 14;
inline constexpr std::size_t kFeatureCount =
    kChannelCount * (kTimeFeaturesPerChannel + kSpectralFeaturesPerChannel) + kAggregateFeatures;
static_assert(kFeatureCount == 104);
inline constexpr std::size_t kMinWindowSamples = 8;
inline constexpr double kZeroVariance = 1e-12;
inline constexpr double kZeroPower = 1e-12;

inline std::vector<std::string> feature_names() {
  static constexpr std::array<std::string_view, kTimeFeaturesPerChannel> time = {
      "min", "max", "mean", "median", "var", "p25", "p75", "rms", "skew", "kurt"};
  static constexpr std::array<std::string_view, kSpectralFeaturesPerChannel> spectral = {
      "spec_entropy", "spec_centroid", "spec_energy", "dom_freq", "spec_spread"};
  std::vector<std::string> names;
  names.reserve(kFeatureCount);
  for (auto ch : kChannelNames) {
    for (auto f : time) names.push_back(std::string(ch) + "_" + std::string(f));
  }
  for (auto ch : kChannelNames) {
    for (auto f : spectral) names.push_back(std::string(ch) + "_" + std::string(f));
  }
  names.insert(names.end(), {"sma_acc", "sma_gyro"});
  for (auto ch : kChannelNames) names.push_back(std::string(ch) + "_sum_abs");
  names.insert(names.end(), {"mag_mean_acc", "mag_mean_gyro", "energy_acc", "energy_gyro", "sma_all", "mag_mean_all"});
  return names;
}

namespace detail {

inline void time_features(std::span<const double> x, std::vector<double>& out) {
  const double n = static_cast<double>(x.size());
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double mean = stats::mean(x);
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  double sq = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
    sq += v * v;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const bool flat = m2 < kZeroVariance;
  out.insert(out.end(), {sorted.front(), sorted.back(), mean, stats::quantile_sorted(sorted, 0.5), m2,
                         stats::quantile_sorted(sorted, 0.25), stats::quantile_sorted(sorted, 0.75), std::sqrt(sq / n),
                         flat ? 0.0 : m3 / std::pow(m2, 1.5), flat ? 0.0 : m4 / (m2 * m2) - 3.0});
}

/// One-sided power spectrum (bins 1..N/2) of the mean-removed,
/// Hann-windowed series, P_k = |X_k|^2 / N.
inline std::vector<double> power_spectrum(std::span<const double> x) {
  const std::size_t n = x.size();
  const double mean = stats::mean(x);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
    w[i] = (x[i] - mean) * hann;
  }
  std::vector<double> power(n / 2);
  for (std::size_t k = 1; k <= n / 2; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((k * i) % n) / static_cast<double>(n);
      re += w[i] * std::cos(phase);
      im -= w[i] * std::sin(phase);
    }
    power[k - 1] = (re * re + im * im) / static_cast<double>(n);
  }
  return power;
}

inline void spectral_features(std::span<const double> x, double fs_hz, std::vector<double>& out) {
  const std::vector<double> power = power_spectrum(x);
  const double df = fs_hz / static_cast<double>(x.size());
  double total = 0.0;
  for (double p : power) total += p;
  if (total < kZeroPower) {
    out.insert(out.end(), {0.0, 0.0, 0.0, 0.0, 0.0});
    return;
  }
  double entropy = 0.0;
  double centroid = 0.0;
  std::size_t dominant = 0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double p = power[k] / total;
    if (p > 0.0) entropy -= p * std::log(p);
    centroid += p * static_cast<double>(k + 1) * df;
    if (power[k] > power[dominant]) dominant = k;
  }
  double spread = 0.0;
  for (std::size_t k = 0; k < power.size(); ++k) {
    const double d = static_cast<double>(k + 1) * df - centroid;
    spread += power[k] / total * d * d;
  }
  const double norm = power.size() > 1 ? std::log(static_cast<double>(power.size())) : 1.0;
  out.insert(out.end(), {power.size() > 1 ? entropy / norm : 0.0, centroid, total,
                         static_cast<double>(dominant + 1) * df, std::sqrt(spread)});
}

}  // namespace detail

/// The 104-value feature vector of one window: 60 time-domain values
/// (10 per channel), 30 spectral values (5 per channel), 14 aggregates.
/// Order matches feature_names().
inline std::vector<double> extract_features(const ChannelSeries& window, double fs_hz) {
  const std::size_t n = window[0].size();
  for (const auto& ch : window) {
    require(ch.size() == n, ErrorCode::LengthMismatch, "window channels differ in length");
    for (double v : ch) require(std::isfinite(v), ErrorCode::MissingValues, "window contains missing values");
  }
  require(n >= kMinWindowSamples, ErrorCode::WindowTooShort,
          "window has " + std::to_string(n) + " samples, features need at least " + std::to_string(kMinWindowSamples));
  require(fs_hz > 0.0, ErrorCode::InvalidParameter, "sample rate must be positive");

  std::vector<double> out;
  out.reserve(kFeatureCount);
  for (const auto& ch : window) detail::time_features(ch, out);
  for (const auto& ch : window) detail::spectral_features(ch, fs_hz, out);

  const double nd = static_cast<double>(n);
  std::array<double, kChannelCount> sum_abs{};
  double mag_acc = 0.0;
  double mag_gyro = 0.0;
  double energy_acc = 0.0;
  double energy_gyro = 0.0;
  double mag_all = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq_acc = 0.0;
    double sq_gyro = 0.0;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const double v = window[c][i];
      sum_abs[c] += std::abs(v);
      (c < 3 ? sq_acc : sq_gyro) += v * v;
    }
    mag_acc += std::sqrt(sq_acc);
    mag_gyro += std::sqrt(sq_gyro);
    energy_acc += sq_acc;
    energy_gyro += sq_gyro;
    mag_all += std::sqrt(sq_acc + sq_gyro);
  }
  const double abs_acc = sum_abs[0] + sum_abs[1] + sum_abs[2];
  const double abs_gyro = sum_abs[3] + sum_abs[4] + sum_abs[5];
  out.push_back(abs_acc / nd);
  out.push_back(abs_gyro / nd);
  out.insert(out.end(), sum_abs.begin(), sum_abs.end());
  out.insert(out.end(), {mag_acc / nd, mag_gyro / nd, energy_acc / nd, energy_gyro / nd, (abs_acc + abs_gyro) / nd,
                         mag_all / nd});
  require(out.size() == kFeatureCount, ErrorCode::InvalidParameter, "feature vector has the wrong length");
  return out;
}

inline ChannelSeries window_channels(const ImuRecording& rec, const Window& w) {
  ChannelSeries out;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    out[c].resize(w.length);
    for (std::size_t i = 0; i < w.length; ++i) out[c][i] = rec[w.begin + i].values[c];
  }
  return out;
}

/// Windowed feature rows with their labels. Labels are stored as the
/// integer value of Behavior.
struct FeatureMatrix {
  std::vector<std::string> names;
  ml::Matrix x;
  std::vector<int> labels;
  std::vector<double> window_start_ms;

  std::size_t rows() const { return x.rows(); }

  FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
    FeatureMatrix out{names, x.select_rows(idx), {}, {}};
    for (std::size_t i : idx) {
      out.labels.push_back(labels[i]);
      out.window_start_ms.push_back(window_start_ms[i]);
    }
    return out;
  }

  FeatureMatrix select_cols(std::span<const std::size_t> idx) const {
    FeatureMatrix out{{}, x.select_cols(idx), labels, window_start_ms};
    for (std::size_t j : idx) {
      require(j < names.size(), ErrorCode::ShapeMismatch, "feature index " + std::to_string(j) + " out of range");
      out.names.push_back(names[j]);
    }
    return out;
  }
};

inline FeatureMatrix featurize(const ImuRecording& rec, const LabelTrack& track, const WindowSpec& spec) {
  require(!rec.has_missing(), ErrorCode::MissingValues, "featurizing requires a recording without missing values");
  const std::vector<Window> windows = make_windows(rec, track, spec);
  FeatureMatrix fm;
  fm.names = feature_names();
  fm.x = ml::Matrix(windows.size(), kFeatureCount);
  for (std::size_t r = 0; r < windows.size(); ++r) {
    const std::vector<double> f = extract_features(window_channels(rec, windows[r]), rec.sample_rate_hz());
    std::copy(f.begin(), f.end(), fm.x.row(r).begin());
    fm.labels.push_back(static_cast<int>(windows[r].label));
    fm.window_start_ms.push_back(windows[r].start_ms);
  }
  return fm;
}

/// Row-wise concatenation; feature names must agree.
inline FeatureMatrix concat(const std::vector<FeatureMatrix>& parts) {
  require(!parts.empty(), ErrorCode::EmptyMatrix, "nothing to concatenate");
  FeatureMatrix out;
  out.names = parts.front().names;
  std::vector<double> data;
  for (const FeatureMatrix& p : parts) {
    require(p.names == out.names, ErrorCode::ShapeMismatch, "feature matrices have different columns");
    data.insert(data.end(), p.x.data().begin(), p.x.data().end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.window_start_ms.insert(out.window_start_ms.end(), p.window_start_ms.begin(), p.window_start_ms.end());
  }
  out.x = ml::Matrix(out.labels.size(), out.names.size(), std::move(data));
  return out;
}

inline std::string format_features(const FeatureMatrix& fm) {
  std::string out;
  for (const std::string& n : fm.names) out += n + ",";
  out += "label,window_start_ms\n";
  for (std::size_t r = 0; r < fm.rows(); ++r) {
    for (double v : fm.x.row(r)) out += csv::format_double(v) + ",";
    out += std::string(to_string(static_cast<Behavior>(fm.labels[r]))) + "," +
           csv::format_double(fm.window_start_ms[r]) + "\n";
  }
  return out;
}

inline FeatureMatrix parse_features(const std::string& text, const std::string& origin = "<memory>") {
  const std::vector<std::string> lines = csv::lines_of(text);
  require(!lines.empty(), ErrorCode::EmptyFile, origin + ": empty feature file");
  const std::vector<std::string_view> header = csv::split(lines[0]);
  require(header.size() >= 3 && header[header.size() - 2] == "label" && header.back() == "window_start_ms",
          ErrorCode::MalformedHeader, origin + ": feature header must end with label,window_start_ms");
  FeatureMatrix fm;
  for (std::size_t j = 0; j + 2 < header.size(); ++j) fm.names.emplace_back(header[j]);
  const std::size_t d = fm.names.size();
  std::vector<double> data;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const std::string where = origin + ":" + std::to_string(li + 1);
    const std::vector<std::string_view> cells = csv::split(lines[li]);
    require(cells.size() == d + 2, ErrorCode::MalformedRow, where + ": expected " + std::to_string(d + 2) + " cells");
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = csv::parse_double(cells[j]);
      require(v.has_value(), ErrorCode::MalformedRow, where + ": bad number in column " + std::to_string(j + 1));
      data.push_back(*v);
    }
    const auto b = parse_behavior(cells[d]);
    require(b.has_value(), ErrorCode::UnknownBehaviorName, where + ": unknown behavior '" + std::string(cells[d]) + "'");
    const auto t = csv::parse_double(cells[d + 1]);
    require(t.has_value(), ErrorCode::MalformedRow, where + ": bad window_start_ms");
    fm.labels.push_back(static_cast<int>(*b));
    fm.window_start_ms.push_back(*t);
  }
  fm.x = ml::Matrix(fm.labels.size(), d, std::move(data));
  return fm;
}

inline FeatureMatrix load_features(const std::string& path) { return parse_features(csv::read_file(path), path); }

// ---------------------------------------------------------------------------
// Recursive feature elimination.

struct RfeParams {
  std::size_t target_count = 50;
  int n_trees = 100;
  double step_fraction = 0.1;
};

/// Repeatedly fits a random forest on the surviving columns and drops the
/// max(1, ceil(step * remaining)) least important ones (never past the
/// target). Importance ties drop the higher column index first. Returns
/// the survivors in ascending order.
inline std::vector<std::size_t> rfe_select(const ml::Matrix& x, std::span<const int> labels, const RfeParams& p,
                                           std::uint64_t seed) {
  require(x.rows() == labels.size(), ErrorCode::ShapeMismatch, "feature rows and labels differ");
  require(p.target_count >= 1 && x.cols() >= p.target_count, ErrorCode::TooFewFeatures,
          "RFE target " + std::to_string(p.target_count) + " exceeds the " + std::to_string(x.cols()) + " features");
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  require(classes.size() >= 2, ErrorCode::SingleClass, "RFE needs at least two classes");
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), labels[i]) - classes.begin());
  }

  std::vector<std::size_t> remaining = ml::all_rows(x.cols());
  Rng rng(seed);
  ml::RandomForestParams rf;
  rf.n_trees = p.n_trees;
  while (remaining.size() > p.target_count) {
    const ml::Matrix sub = x.select_cols(remaining);
    const ml::ForestModel forest = ml::fit_forest(sub, y, classes.size(), rf, rng.next());
    const std::vector<double> imp = ml::forest_importances(forest, remaining.size());
    const std::size_t step = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(p.step_fraction * static_cast<double>(remaining.size()))));
    const std::size_t drop = std::min(step, remaining.size() - p.target_count);
    std::vector<std::size_t> order = ml::all_rows(remaining.size());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (imp[a] != imp[b]) return imp[a] < imp[b];
      return a > b;
    });
    std::vector<bool> dropped(remaining.size(), false);
    for (std::size_t i = 0; i < drop; ++i) dropped[order[i]] = true;
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      if (!dropped[i]) next.push_back(remaining[i]);
    }
    remaining = std::move(next);
  }
  return remaining;
}

inline std::string format_selection(const std::vector<std::size_t>& selected, const std::vector<std::string>& names) {
  std::string out = "index,name\n";
  for (std::size_t j : selected) out += std::to_string(j) + "," + (j < names.size() ? names[j] : std::string()) + "\n";
  return out;
}

inline std::vector<std::size_t> parse_selection(const std::string& text, const std::string& origin = "<memory>") {
  const std::vector<std::string> lines = csv::lines_of(text);
  require(!lines.empty() && csv::trim(lines[0]) == "index,name", ErrorCode::MalformedHeader,
          origin + ": selection header must be index,name");
  std::vector<std::size_t> out;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const auto v = csv::parse_int(csv::split(lines[li])[0]);
    require(v.has_value() && *v >= 0, ErrorCode::MalformedRow, origin + ":" + std::to_string(li + 1) + ": bad index");
    out.push_back(static_cast<std::size_t>(*v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Min-max scaling.

struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;
};

inline ScalerParams fit_minmax(const ml::Matrix& train) {
  require(train.rows() > 0, ErrorCode::EmptyMatrix, "cannot fit a scaler on zero rows");
  ScalerParams p{std::vector<double>(train.row(0).begin(), train.row(0).end()),
                 std::vector<double>(train.row(0).begin(), train.row(0).end())};
  for (std::size_t r = 1; r < train.rows(); ++r) {
    for (std::size_t j = 0; j < train.cols(); ++j) {
      p.min[j] = std::min(p.min[j], train(r, j));
      p.max[j] = std::max(p.max[j], train(r, j));
    }
  }
  return p;
}

/// (x - min) / (max - min), unclipped; constant training columns map to 0.
inline ml::Matrix apply_minmax(const ml::Matrix& x, const ScalerParams& p) {
  require(x.cols() == p.min.size(), ErrorCode::ShapeMismatch,
          "scaler has " + std::to_string(p.min.size()) + " features, matrix has " + std::to_string(x.cols()));
  ml::Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double range = p.max[j] - p.min[j];
      out(r, j) = range > 0.0 ? (x(r, j) - p.min[j]) / range : 0.0;
    }
  }
  return out;
}

inline std::string format_scaler(const ScalerParams& p) {
  std::string out = "feature,min,max\n";
  for (std::size_t j = 0; j < p.min.size(); ++j) {
    out += std::to_string(j) + "," + csv::format_double(p.min[j]) + "," + csv::format_double(p.max[j]) + "\n";
  }
  return out;
}

inline ScalerParams parse_scaler(const std::string& text, const std::string& origin = "<memory>") {
  const std::vector<std::string> lines = csv::lines_of(text);
  require(!lines.empty() && csv::trim(lines[0]) == "feature,min,max", ErrorCode::MalformedHeader,
          origin + ": scaler header must be feature,min,max");
  ScalerParams p;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const std::vector<std::string_view> cells = csv::split(lines[li]);
    const auto lo = cells.size() == 3 ? csv::parse_double(cells[1]) : std::nullopt;
    const auto hi = cells.size() == 3 ? csv::parse_double(cells[2]) : std::nullopt;
    require(lo && hi && *hi >= *lo, ErrorCode::MalformedRow, origin + ":" + std::to_string(li + 1) + ": bad scaler row");
    p.min.push_back(*lo);
    p.max.push_back(*hi);
  }
  return p;
}

}  // namespace behfilt
