#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "behfilt/csv.hpp"
#include "behfilt/error.hpp"
#include "behfilt/filters/butterworth.hpp"
#include "behfilt/filters/median.hpp"
#include "behfilt/filters/savitzky_golay.hpp"
#include "behfilt/filters/tv_denoise.hpp"
#include "behfilt/filters/wavelet.hpp"

namespace behfilt::filters {

struct RawParams {
  friend bool operator==(const RawParams&, const RawParams&) = default;
};

using FilterKind =
    std::variant<RawParams, WaveletParams, TvdParams, MedianParams, LowPassParams, HighPassParams, SavGolParams>;

inline std::string_view filter_name(const FilterKind& kind) {
  struct Visitor {
    std::string_view operator()(const RawParams&) const { return "raw"; }
    std::string_view operator()(const WaveletParams&) const { return "wavelet"; }
    std::string_view operator()(const TvdParams&) const { return "tvd"; }
    std::string_view operator()(const MedianParams&) const { return "median"; }
    std::string_view operator()(const LowPassParams&) const { return "lpf"; }
    std::string_view operator()(const HighPassParams&) const { return "hpf"; }
    std::string_view operator()(const SavGolParams&) const { return "savgol"; }
  };
  return std::visit(Visitor{}, kind);
}

/// Display label used in report rows.
inline std::string filter_label(const FilterKind& kind) {
  struct Visitor {
    std::string operator()(const RawParams&) const { return "Raw"; }
    std::string operator()(const WaveletParams&) const { return "Wavelet"; }
    std::string operator()(const TvdParams&) const { return "TVD"; }
    std::string operator()(const MedianParams&) const { return "Median"; }
    std::string operator()(const LowPassParams&) const { return "LPF"; }
    std::string operator()(const HighPassParams&) const { return "HPF"; }
    std::string operator()(const SavGolParams&) const { return "Savitzky-Golay"; }
  };
  return std::visit(Visitor{}, kind);
}

/// Canonical spec string with every parameter spelled out; parses back to
/// an equal FilterKind.
inline std::string to_spec(const FilterKind& kind) {
  using csv::format_double;
  struct Visitor {
    std::string operator()(const RawParams&) const { return "raw"; }
    std::string operator()(const WaveletParams& p) const {
      return "wavelet:family=" + p.family + ",level=" + std::to_string(p.level) +
             ",threshold=" + (p.threshold ? format_double(*p.threshold) : std::string("universal"));
    }
    std::string operator()(const TvdParams& p) const {
      return "tvd:lambda=" + (p.lambda ? format_double(*p.lambda) : std::string("auto"));
    }
    std::string operator()(const MedianParams& p) const { return "median:window=" + std::to_string(p.window); }
    std::string operator()(const LowPassParams& p) const {
      return "lpf:cutoff=" + format_double(p.cutoff_hz) + ",order=" + std::to_string(p.order);
    }
    std::string operator()(const HighPassParams& p) const {
      return "hpf:cutoff=" + format_double(p.cutoff_hz) + ",order=" + std::to_string(p.order);
    }
    std::string operator()(const SavGolParams& p) const {
      return "savgol:window=" + std::to_string(p.window) + ",polyorder=" + std::to_string(p.polyorder);
    }
  };
  return std::visit(Visitor{}, kind);
}

/// Parameter checks that do not depend on the data or the sampling rate.
inline void validate(const FilterKind& kind) {
  struct Visitor {
    void operator()(const RawParams&) const {}
    void operator()(const WaveletParams& p) const {
      (void)wavelet_by_name(p.family);
      require(p.level >= 1, ErrorCode::InvalidParameter, "wavelet level must be >= 1");
      require(!p.threshold || *p.threshold >= 0.0, ErrorCode::InvalidParameter, "wavelet threshold must be >= 0");
    }
    void operator()(const TvdParams& p) const {
      require(!p.lambda || *p.lambda >= 0.0, ErrorCode::InvalidParameter, "tvd lambda must be >= 0");
    }
    void operator()(const MedianParams& p) const {
      require(p.window % 2 == 1, ErrorCode::EvenWindow, "median window must be odd");
      require(p.window >= 3, ErrorCode::InvalidParameter, "median window must be >= 3");
    }
    void operator()(const LowPassParams& p) const { check(p.cutoff_hz, p.order); }
    void operator()(const HighPassParams& p) const { check(p.cutoff_hz, p.order); }
    void operator()(const SavGolParams& p) const { validate_savgol(p.window, p.polyorder); }

    static void check(double cutoff, int order) {
      require(cutoff > 0.0, ErrorCode::CutoffOutOfRange, "cutoff must be > 0");
      require(order >= 2 && order % 2 == 0, ErrorCode::InvalidParameter, "order must be even and >= 2");
    }
  };
  std::visit(Visitor{}, kind);
}

namespace detail {

inline double spec_number(std::string_view token, std::string_view value) {
  const auto v = csv::parse_double(value);
  require(v.has_value() && std::isfinite(*v), ErrorCode::BadFilterSpec,
          "bad number in filter spec token '" + std::string(token) + "'");
  return *v;
}

inline int spec_int(std::string_view token, std::string_view value) {
  const auto v = csv::parse_int(value);
  require(v.has_value(), ErrorCode::BadFilterSpec, "bad integer in filter spec token '" + std::string(token) + "'");
  return static_cast<int>(*v);
}

}  // namespace detail

/// Parses `name` or `name:key=value,...`, e.g. `lpf:cutoff=5,order=4`.
inline FilterKind parse_filter(std::string_view spec) {
  spec = csv::trim(spec);
  const std::size_t colon = spec.find(':');
  const std::string_view name = csv::trim(spec.substr(0, colon));
  std::vector<std::pair<std::string_view, std::string_view>> params;
  if (colon != std::string_view::npos) {
    for (std::string_view token : csv::split(spec.substr(colon + 1), ',')) {
      const std::size_t eq = token.find('=');
      require(eq != std::string_view::npos && eq > 0, ErrorCode::BadFilterSpec,
              "expected key=value, got '" + std::string(token) + "'");
      params.emplace_back(csv::trim(token.substr(0, eq)), csv::trim(token.substr(eq + 1)));
    }
  }
  const auto unknown_key = [&](std::string_view key) {
    fail(ErrorCode::BadFilterSpec, "unknown parameter '" + std::string(key) + "' for filter '" + std::string(name) + "'");
  };

  FilterKind kind;
  if (name == "raw") {
    for (const auto& [key, value] : params) unknown_key(key);
    kind = RawParams{};
  } else if (name == "wavelet") {
    WaveletParams p;
    for (const auto& [key, value] : params) {
      if (key == "level") p.level = detail::spec_int(key, value);
      else if (key == "family") p.family = std::string(value);
      else if (key == "threshold") {
        if (value == "universal") p.threshold.reset();
        else p.threshold = detail::spec_number(key, value);
      } else unknown_key(key);
    }
    kind = p;
  } else if (name == "tvd") {
    TvdParams p;
    for (const auto& [key, value] : params) {
      if (key == "lambda") {
        if (value == "auto") p.lambda.reset();
        else p.lambda = detail::spec_number(key, value);
      } else unknown_key(key);
    }
    kind = p;
  } else if (name == "median") {
    MedianParams p;
    for (const auto& [key, value] : params) {
      if (key == "window") p.window = detail::spec_int(key, value);
      else unknown_key(key);
    }
    kind = p;
  } else if (name == "lpf" || name == "hpf") {
    double cutoff = name == "lpf" ? LowPassParams{}.cutoff_hz : HighPassParams{}.cutoff_hz;
    int order = 4;
    for (const auto& [key, value] : params) {
      if (key == "cutoff") cutoff = detail::spec_number(key, value);
      else if (key == "order") order = detail::spec_int(key, value);
      else unknown_key(key);
    }
    if (name == "lpf") kind = LowPassParams{cutoff, order};
    else kind = HighPassParams{cutoff, order};
  } else if (name == "savgol") {
    SavGolParams p;
    for (const auto& [key, value] : params) {
      if (key == "window") p.window = detail::spec_int(key, value);
      else if (key == "polyorder") p.polyorder = detail::spec_int(key, value);
      else unknown_key(key);
    }
    kind = p;
  } else {
    fail(ErrorCode::BadFilterSpec, "unknown filter '" + std::string(name) + "'");
  }
  validate(kind);
  return kind;
}

/// Shortest series a filter accepts at the given rate; shorter segments
/// are passed through by the router.
inline std::size_t min_length(const FilterKind& kind) {
  struct Visitor {
    std::size_t operator()(const RawParams&) const { return 0; }
    std::size_t operator()(const WaveletParams&) const { return 2; }
    std::size_t operator()(const TvdParams&) const { return 0; }
    std::size_t operator()(const MedianParams&) const { return 1; }
    std::size_t operator()(const LowPassParams& p) const { return 3 * static_cast<std::size_t>(p.order) + 1; }
    std::size_t operator()(const HighPassParams& p) const { return 3 * static_cast<std::size_t>(p.order) + 1; }
    std::size_t operator()(const SavGolParams& p) const { return static_cast<std::size_t>(p.window); }
  };
  return std::visit(Visitor{}, kind);
}

inline std::vector<double> apply_filter(std::span<const double> x, const FilterKind& kind, double fs_hz) {
  struct Visitor {
    std::span<const double> x;
    double fs;
    std::vector<double> operator()(const RawParams&) const { return {x.begin(), x.end()}; }
    std::vector<double> operator()(const WaveletParams& p) const { return wavelet_denoise(x, p); }
    std::vector<double> operator()(const TvdParams& p) const {
      const double lambda = p.lambda ? *p.lambda : 0.5 * estimate_noise_sigma(x);
      return tv_denoise(x, lambda);
    }
    std::vector<double> operator()(const MedianParams& p) const { return median_filter(x, p.window); }
    std::vector<double> operator()(const LowPassParams& p) const {
      return butterworth_zero_phase(x, p.cutoff_hz, fs, p.order, PassBand::Low);
    }
    std::vector<double> operator()(const HighPassParams& p) const {
      return butterworth_zero_phase(x, p.cutoff_hz, fs, p.order, PassBand::High);
    }
    std::vector<double> operator()(const SavGolParams& p) const { return savitzky_golay(x, p.window, p.polyorder); }
  };
  return std::visit(Visitor{x, fs_hz}, kind);
}

}  // namespace behfilt::filters
