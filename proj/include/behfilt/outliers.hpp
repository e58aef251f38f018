#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "behfilt/csv.hpp"
#include "behfilt/data_model.hpp"
#include "behfilt/error.hpp"
#include "behfilt/stats.hpp"

namespace behfilt {

using Mask = std::vector<bool>;

enum class OutlierMethod { None, Iqr, Hampel };

inline std::string_view to_string(OutlierMethod m) {
  switch (m) {
    case OutlierMethod::None: return "none";
    case OutlierMethod::Iqr: return "iqr";
    case OutlierMethod::Hampel: return "hampel";
  }
  return "none";
}

inline OutlierMethod parse_outlier_method(std::string_view name) {
  if (name == "none") return OutlierMethod::None;
  if (name == "iqr") return OutlierMethod::Iqr;
  if (name == "hampel") return OutlierMethod::Hampel;
  fail(ErrorCode::InvalidConfig, "unknown outlier method '" + std::string(name) + "'");
}

struct OutlierConfig {
  OutlierMethod method = OutlierMethod::Hampel;
  double iqr_k = 1.5;
  std::size_t hampel_half_window = 12;  // 25-sample window at 50 Hz
  double hampel_n_sigmas = 3.0;

  void validate() const {
    require(iqr_k > 0.0, ErrorCode::InvalidParameter, "iqr_k must be > 0");
    require(hampel_half_window >= 1, ErrorCode::InvalidParameter, "hampel half window must be >= 1");
    require(hampel_n_sigmas > 0.0, ErrorCode::InvalidParameter, "hampel n_sigmas must be > 0");
  }
};

struct OutlierReport {
  std::array<std::size_t, kChannelCount> flagged_per_channel{};
  std::size_t flagged_samples = 0;
  std::size_t total_samples = 0;
  double drop_rate_pct = 0.0;
};

/// Global Tukey fences: flags x < Q1 - k*IQR or x > Q3 + k*IQR.
inline Mask detect_iqr(std::span<const double> x, double k) {
  require(x.size() >= 4, ErrorCode::SeriesTooShort, "IQR detection needs at least 4 samples");
  require(k > 0.0, ErrorCode::InvalidParameter, "IQR k must be > 0");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = stats::quantile_sorted(sorted, 0.25);
  const double q3 = stats::quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - k * iqr;
  const double hi = q3 + k * iqr;
  Mask mask(x.size(), false);
  for (std::size_t i = 0; i < x.size(); ++i) mask[i] = x[i] < lo || x[i] > hi;
  return mask;
}

inline constexpr double kMadScale = 1.4826;
inline constexpr double kZeroMadTolerance = 1e-9;

/// Rolling-median detector. Windows are truncated at the series edges.
inline Mask detect_hampel(std::span<const double> x, std::size_t half_window, double n_sigmas) {
  require(half_window >= 1, ErrorCode::InvalidParameter, "Hampel half window must be >= 1");
  require(n_sigmas > 0.0, ErrorCode::InvalidParameter, "Hampel n_sigmas must be > 0");
  require(x.size() >= 2 * half_window + 1, ErrorCode::SeriesTooShort,
          "Hampel detection needs at least 2*half_window+1 samples");
  const std::size_t n = x.size();
  Mask mask(n, false);
  std::vector<double> window;
  std::vector<double> deviations;
  window.reserve(2 * half_window + 1);
  deviations.reserve(2 * half_window + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half_window ? i - half_window : 0;
    const std::size_t hi = std::min(n - 1, i + half_window);
    window.assign(x.begin() + static_cast<std::ptrdiff_t>(lo), x.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const double m = stats::median_inplace(window);
    deviations.clear();
    for (std::size_t j = lo; j <= hi; ++j) deviations.push_back(std::abs(x[j] - m));
    const double s = kMadScale * stats::median_inplace(deviations);
    const double dev = std::abs(x[i] - m);
    mask[i] = s > 0.0 ? dev > n_sigmas * s : dev > kZeroMadTolerance;
  }
  return mask;
}

/// Fills NaN gaps: straight lines between known neighbors (index abscissa),
/// nearest known value at the ends.
inline std::vector<double> impute_linear(std::span<const double> x) {
  std::vector<double> out(x.begin(), x.end());
  std::size_t prev = out.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (is_missing(out[i])) continue;
    if (prev == out.size()) {
      for (std::size_t j = 0; j < i; ++j) out[j] = out[i];
    } else if (i > prev + 1) {
      const double span = static_cast<double>(i - prev);
      for (std::size_t j = prev + 1; j < i; ++j) {
        const double t = static_cast<double>(j - prev) / span;
        out[j] = out[prev] + t * (out[i] - out[prev]);
      }
    }
    prev = i;
  }
  require(prev != out.size(), ErrorCode::AllMissing, "cannot impute a series with no known values");
  for (std::size_t j = prev + 1; j < out.size(); ++j) out[j] = out[prev];
  return out;
}

struct CleanResult {
  ImuRecording recording;
  OutlierReport report;
};

/// Per channel: detect, mark missing, impute. Values already missing in the
/// input are imputed but not counted as flagged. Detection runs on a
/// provisionally imputed copy so the detectors always see finite data.
inline CleanResult clean(const ImuRecording& rec, const OutlierConfig& cfg) {
  cfg.validate();
  const std::size_t n = rec.size();
  OutlierReport report;
  report.total_samples = n;
  Mask any_flag(n, false);
  ChannelSeries out;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    std::vector<double> raw = rec.channel(c);
    const std::vector<double> filled = impute_linear(raw);
    Mask mask;
    switch (cfg.method) {
      case OutlierMethod::None: mask.assign(n, false); break;
      case OutlierMethod::Iqr: mask = detect_iqr(filled, cfg.iqr_k); break;
      case OutlierMethod::Hampel: mask = detect_hampel(filled, cfg.hampel_half_window, cfg.hampel_n_sigmas); break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i] || is_missing(raw[i])) continue;
      raw[i] = kMissing;
      ++report.flagged_per_channel[c];
      any_flag[i] = true;
    }
    out[c] = impute_linear(raw);
  }
  for (bool f : any_flag) report.flagged_samples += f ? 1 : 0;
  report.drop_rate_pct = n == 0 ? 0.0 : 100.0 * static_cast<double>(report.flagged_samples) / static_cast<double>(n);
  return {rec.with_channels(out), report};
}

/// `metric,value` CSV.
inline std::string format_outlier_report(const OutlierReport& r, const OutlierConfig& cfg) {
  std::string out = "metric,value\n";
  out += "method," + std::string(to_string(cfg.method)) + "\n";
  out += "total_samples," + std::to_string(r.total_samples) + "\n";
  out += "flagged_samples," + std::to_string(r.flagged_samples) + "\n";
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    out += "flagged_" + std::string(kChannelNames[c]) + "," + std::to_string(r.flagged_per_channel[c]) + "\n";
  }
  out += "drop_rate_pct," + csv::format_double(r.drop_rate_pct) + "\n";
  return out;
}

}  // namespace behfilt
