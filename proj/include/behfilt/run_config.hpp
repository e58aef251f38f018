#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "behfilt/csv.hpp"
#include "behfilt/error.hpp"
#include "behfilt/featurize.hpp"
#include "behfilt/outliers.hpp"

namespace behfilt {

/// Everything that influences a run. Serialized as flat `key = value`
/// lines; `filter` and `model` may repeat.
struct RunConfig {
  std::uint64_t seed = 42;
  double sample_rate_hz = 50.0;
  WindowSpec window;
  OutlierConfig outlier;
  std::string filter_mode = "uniform:raw";
  std::vector<std::string> filters;
  std::vector<std::string> models;
  double train_fraction = 0.7;
  bool stratified = true;
  std::size_t cv_folds = 10;
  std::size_t rfe_target = 50;
  bool rfe_per_fold = false;
  double synth_duration_s = 1200.0;
  double synth_spike_rate = 0.0;
  double synth_noise_active = 0.1;
  double synth_noise_inactive = 0.15;
  double synth_tremor = 0.4;
};

inline std::string to_text(const RunConfig& c) {
  using csv::format_double;
  std::string out;
  const auto kv = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
  kv("seed", std::to_string(c.seed));
  kv("sample_rate_hz", format_double(c.sample_rate_hz));
  kv("window_length_s", format_double(c.window.length_s));
  kv("window_overlap", format_double(c.window.overlap_fraction));
  kv("window_purity", format_double(c.window.purity_threshold));
  kv("outlier", std::string(to_string(c.outlier.method)));
  kv("iqr_k", format_double(c.outlier.iqr_k));
  kv("hampel_half_window", std::to_string(c.outlier.hampel_half_window));
  kv("hampel_nsig", format_double(c.outlier.hampel_n_sigmas));
  kv("filter_mode", c.filter_mode);
  for (const auto& f : c.filters) kv("filter", f);
  for (const auto& m : c.models) kv("model", m);
  kv("train_fraction", format_double(c.train_fraction));
  kv("stratified", c.stratified ? "true" : "false");
  kv("cv_folds", std::to_string(c.cv_folds));
  kv("rfe_target", std::to_string(c.rfe_target));
  kv("rfe_per_fold", c.rfe_per_fold ? "true" : "false");
  kv("synth_duration_s", format_double(c.synth_duration_s));
  kv("synth_spike_rate", format_double(c.synth_spike_rate));
  kv("synth_noise_active", format_double(c.synth_noise_active));
  kv("synth_noise_inactive", format_double(c.synth_noise_inactive));
  kv("synth_tremor", format_double(c.synth_tremor));
  return out;
}

/// Applies `key = value` lines on top of `base`. Blank lines and lines
/// starting with '#' are ignored. A `filter` or `model` key in the text
/// replaces the base list.
inline RunConfig parse_run_config(const std::string& text, RunConfig base = {}, const std::string& origin = "<config>") {
  bool filters_seen = false;
  bool models_seen = false;
  const std::vector<std::string> lines = csv::lines_of(text);
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line = csv::trim(lines[li]);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = origin + ":" + std::to_string(li + 1);
    const std::size_t eq = line.find('=');
    require(eq != std::string_view::npos, ErrorCode::InvalidConfig, where + ": expected key = value");
    const std::string_view key = csv::trim(line.substr(0, eq));
    const std::string value(csv::trim(line.substr(eq + 1)));
    const auto num = [&] {
      const auto v = csv::parse_double(value);
      require(v.has_value(), ErrorCode::InvalidConfig, where + ": '" + std::string(key) + "' needs a number");
      return *v;
    };
    const auto count = [&] {
      const auto v = csv::parse_int(value);
      require(v.has_value() && *v >= 0, ErrorCode::InvalidConfig,
              where + ": '" + std::string(key) + "' needs a non-negative integer");
      return static_cast<std::uint64_t>(*v);
    };
    const auto flag = [&] {
      require(value == "true" || value == "false", ErrorCode::InvalidConfig,
              where + ": '" + std::string(key) + "' needs true or false");
      return value == "true";
    };
    if (key == "seed") base.seed = count();
    else if (key == "sample_rate_hz") base.sample_rate_hz = num();
    else if (key == "window_length_s") base.window.length_s = num();
    else if (key == "window_overlap") base.window.overlap_fraction = num();
    else if (key == "window_purity") base.window.purity_threshold = num();
    else if (key == "outlier") base.outlier.method = parse_outlier_method(value);
    else if (key == "iqr_k") base.outlier.iqr_k = num();
    else if (key == "hampel_half_window") base.outlier.hampel_half_window = count();
    else if (key == "hampel_nsig") base.outlier.hampel_n_sigmas = num();
    else if (key == "filter_mode") base.filter_mode = value;
    else if (key == "filter") {
      if (!filters_seen) base.filters.clear();
      filters_seen = true;
      base.filters.push_back(value);
    } else if (key == "model") {
      if (!models_seen) base.models.clear();
      models_seen = true;
      base.models.push_back(value);
    } else if (key == "train_fraction") base.train_fraction = num();
    else if (key == "stratified") base.stratified = flag();
    else if (key == "cv_folds") base.cv_folds = count();
    else if (key == "rfe_target") base.rfe_target = count();
    else if (key == "rfe_per_fold") base.rfe_per_fold = flag();
    else if (key == "synth_duration_s") base.synth_duration_s = num();
    else if (key == "synth_spike_rate") base.synth_spike_rate = num();
    else if (key == "synth_noise_active") base.synth_noise_active = num();
    else if (key == "synth_noise_inactive") base.synth_noise_inactive = num();
    else if (key == "synth_tremor") base.synth_tremor = num();
    else fail(ErrorCode::InvalidConfig, where + ": unknown key '" + std::string(key) + "'");
  }
  return base;
}

/// 64-bit FNV-1a, as 16 lowercase hex digits.
inline std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const RunConfig& c) { return fnv1a_hex(to_text(c)); }

}  // namespace behfilt
