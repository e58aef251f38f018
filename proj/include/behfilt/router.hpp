#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "behfilt/data_model.hpp"
#include "behfilt/error.hpp"
#include "behfilt/filters/filter_kind.hpp"

namespace behfilt {

using filters::FilterKind;

struct Uniform {
  FilterKind filter;
};

struct BehaviorSpecific {
  FilterKind active;
  FilterKind inactive;
};

/// Either one filter for the whole recording, or one filter per activity
/// group applied to each contiguous run independently.
struct FilterCombination {
  std::variant<Uniform, BehaviorSpecific> mode;

  static FilterCombination uniform(FilterKind f) { return {Uniform{std::move(f)}}; }
  static FilterCombination behavior_specific(FilterKind active, FilterKind inactive) {
    return {BehaviorSpecific{std::move(active), std::move(inactive)}};
  }

  bool is_uniform() const { return std::holds_alternative<Uniform>(mode); }

  /// BehaviorSpecific with the same filter for both groups behaves like
  /// Uniform only up to run-boundary effects; reported, not rewritten.
  bool equivalent_to_uniform() const {
    if (is_uniform()) return true;
    const auto& bs = std::get<BehaviorSpecific>(mode);
    return bs.active == bs.inactive;
  }

  const FilterKind& filter_for(ActivityGroup g) const {
    if (const auto* u = std::get_if<Uniform>(&mode)) return u->filter;
    const auto& bs = std::get<BehaviorSpecific>(mode);
    return g == ActivityGroup::Active ? bs.active : bs.inactive;
  }

  std::string to_spec() const {
    if (const auto* u = std::get_if<Uniform>(&mode)) return "uniform:" + filters::to_spec(u->filter);
    const auto& bs = std::get<BehaviorSpecific>(mode);
    return "behavior:" + filters::to_spec(bs.active) + ":" + filters::to_spec(bs.inactive);
  }

  /// Row label in comparison reports, e.g. "Wavelet" or "Wavelet + LPF".
  std::string label() const {
    if (const auto* u = std::get_if<Uniform>(&mode)) return filters::filter_label(u->filter);
    const auto& bs = std::get<BehaviorSpecific>(mode);
    return filters::filter_label(bs.active) + " + " + filters::filter_label(bs.inactive);
  }
};

/// The four active+inactive pairings compared in the study, active first.
inline std::vector<std::pair<std::string, FilterCombination>> preset_combinations() {
  using namespace filters;
  return {
      {"wavelet+median", FilterCombination::behavior_specific(WaveletParams{}, MedianParams{})},
      {"wavelet+lpf", FilterCombination::behavior_specific(WaveletParams{}, LowPassParams{})},
      {"tvd+lpf", FilterCombination::behavior_specific(TvdParams{}, LowPassParams{})},
      {"tvd+median", FilterCombination::behavior_specific(TvdParams{}, MedianParams{})},
  };
}

namespace detail {

/// Splits `a:k=v,k=v:b:k=v` into filter specs: a token containing '=' is a
/// parameter list for the preceding filter name.
inline std::vector<std::string> split_filter_specs(std::string_view text) {
  std::vector<std::string> specs;
  for (std::string_view token : csv::split(text, ':')) {
    if (token.find('=') != std::string_view::npos) {
      require(!specs.empty(), ErrorCode::BadFilterSpec, "parameters '" + std::string(token) + "' precede any filter name");
      require(specs.back().find(':') == std::string::npos, ErrorCode::BadFilterSpec,
              "filter '" + specs.back() + "' has two parameter lists");
      specs.back() += ":" + std::string(token);
    } else {
      specs.emplace_back(token);
    }
  }
  return specs;
}

}  // namespace detail

/// Accepted forms: `uniform:<spec>`, `behavior:<active-spec>:<inactive-spec>`,
/// a preset name such as `wavelet+lpf`, or a bare filter spec (uniform).
inline FilterCombination parse_combination(std::string_view text) {
  text = csv::trim(text);
  for (auto& [name, combo] : preset_combinations()) {
    if (text == name) return combo;
  }
  const auto starts_with = [&](std::string_view prefix) { return text.substr(0, prefix.size()) == prefix; };
  if (starts_with("uniform:")) {
    return FilterCombination::uniform(filters::parse_filter(text.substr(8)));
  }
  if (starts_with("behavior:")) {
    const std::vector<std::string> specs = detail::split_filter_specs(text.substr(9));
    require(specs.size() == 2, ErrorCode::BadFilterSpec,
            "behavior mode needs exactly two filters, got '" + std::string(text) + "'");
    return FilterCombination::behavior_specific(filters::parse_filter(specs[0]), filters::parse_filter(specs[1]));
  }
  return FilterCombination::uniform(filters::parse_filter(text));
}

struct Run {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  ActivityGroup group = ActivityGroup::Inactive;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const Run&, const Run&) = default;
};

/// Maximal runs of equal activity group covering [0, n).
struct SegmentPlan {
  std::vector<Run> runs;
  std::size_t sample_count = 0;
};

inline SegmentPlan plan_segments(const ImuRecording& rec, const LabelTrack& track) {
  SegmentPlan plan;
  plan.sample_count = rec.size();
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const ActivityGroup g = group_of(track.behavior_at(rec[i].t_ms));
    if (!plan.runs.empty() && plan.runs.back().group == g) {
      plan.runs.back().end = i + 1;
    } else {
      plan.runs.push_back({i, i + 1, g});
    }
  }
  return plan;
}

struct RoutingStats {
  std::size_t filtered_segments = 0;
  /// Channel segments shorter than the filter minimum, left unfiltered.
  std::size_t passthrough_segments = 0;
};

namespace detail {

inline std::vector<double> filter_or_pass(std::span<const double> x, const FilterKind& kind, double fs,
                                          RoutingStats& stats) {
  if (x.size() < filters::min_length(kind)) {
    ++stats.passthrough_segments;
    return {x.begin(), x.end()};
  }
  ++stats.filtered_segments;
  return filters::apply_filter(x, kind, fs);
}

}  // namespace detail

/// Uniform: each full channel filtered once. BehaviorSpecific: each run
/// filtered on its own (padding never crosses a run boundary) with its
/// group's filter, then written back in place.
inline ImuRecording apply_combination(const ImuRecording& rec, const SegmentPlan& plan, const FilterCombination& combo,
                                      double fs_hz, RoutingStats* stats_out = nullptr) {
  require(!rec.has_missing(), ErrorCode::MissingValues, "filtering requires a recording without missing values");
  require(plan.sample_count == rec.size(), ErrorCode::LengthMismatch, "segment plan does not match recording length");
  RoutingStats stats;
  ChannelSeries out = rec.channels();
  if (const auto* u = std::get_if<Uniform>(&combo.mode)) {
    for (auto& ch : out) ch = detail::filter_or_pass(ch, u->filter, fs_hz, stats);
  } else {
    for (auto& ch : out) {
      const std::vector<double> source = ch;
      for (const Run& run : plan.runs) {
        const std::span<const double> seg(source.data() + run.begin, run.size());
        const std::vector<double> filtered = detail::filter_or_pass(seg, combo.filter_for(run.group), fs_hz, stats);
        std::copy(filtered.begin(), filtered.end(), ch.begin() + static_cast<std::ptrdiff_t>(run.begin));
      }
    }
  }
  if (stats_out) *stats_out = stats;
  return rec.with_channels(out);
}

}  // namespace behfilt
