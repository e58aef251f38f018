#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "behfilt/csv.hpp"
#include "behfilt/error.hpp"

namespace behfilt {

enum class Behavior : std::uint8_t { Eating, Lying, Walking, Standing, Interacting, Drinking, Unknown };

inline constexpr std::array<Behavior, 7> kAllBehaviors = {
    Behavior::Eating,      Behavior::Lying,    Behavior::Walking, Behavior::Standing,
    Behavior::Interacting, Behavior::Drinking, Behavior::Unknown};

/// Behaviors kept for classification; Drinking and Unknown are excluded.
inline constexpr std::array<Behavior, 5> kClassifiedBehaviors = {
    Behavior::Eating, Behavior::Lying, Behavior::Walking, Behavior::Standing, Behavior::Interacting};

constexpr std::string_view to_string(Behavior b) {
  switch (b) {
    case Behavior::Eating: return "Eating";
    case Behavior::Lying: return "Lying";
    case Behavior::Walking: return "Walking";
    case Behavior::Standing: return "Standing";
    case Behavior::Interacting: return "Interacting";
    case Behavior::Drinking: return "Drinking";
    case Behavior::Unknown: return "Unknown";
  }
  return "Unknown";
}

inline std::optional<Behavior> parse_behavior(std::string_view name) {
  name = csv::trim(name);
  for (Behavior b : kAllBehaviors) {
    const std::string_view candidate = to_string(b);
    if (candidate.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size() && same; ++i) {
      same = std::tolower(static_cast<unsigned char>(name[i])) ==
             std::tolower(static_cast<unsigned char>(candidate[i]));
    }
    if (same) return b;
  }
  return std::nullopt;
}

enum class ActivityGroup : std::uint8_t { Active, Inactive };

constexpr std::string_view to_string(ActivityGroup g) {
  return g == ActivityGroup::Active ? "Active" : "Inactive";
}

/// Unknown is routed with the inactive group.
constexpr ActivityGroup group_of(Behavior b) {
  switch (b) {
    case Behavior::Eating:
    case Behavior::Walking:
    case Behavior::Interacting:
    case Behavior::Drinking:
      return ActivityGroup::Active;
    case Behavior::Lying:
    case Behavior::Standing:
    case Behavior::Unknown:
      return ActivityGroup::Inactive;
  }
  return ActivityGroup::Inactive;
}

inline constexpr std::size_t kChannelCount = 6;
inline constexpr std::array<std::string_view, kChannelCount> kChannelNames = {"ax", "ay", "az",
                                                                             "gx", "gy", "gz"};
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

/// One 6-axis reading. Accelerations in g, angular velocities in deg/s.
/// A NaN channel value means "missing".
struct ImuSample {
  double t_ms = 0.0;
  std::array<double, kChannelCount> values{};

  double ax() const { return values[0]; }
  double ay() const { return values[1]; }
  double az() const { return values[2]; }
  double gx() const { return values[3]; }
  double gy() const { return values[4]; }
  double gz() const { return values[5]; }

  friend bool operator==(const ImuSample& a, const ImuSample& b) {
    if (a.t_ms != b.t_ms) return false;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const bool ma = is_missing(a.values[c]);
      if (ma != is_missing(b.values[c])) return false;
      if (!ma && a.values[c] != b.values[c]) return false;
    }
    return true;
  }
};

using ChannelSeries = std::array<std::vector<double>, kChannelCount>;

/// Immutable, validated recording on a (nearly) uniform clock.
///
/// Construction checks: rate > 0, strictly increasing timestamps, each
/// step within +/-20% of the nominal period, and channel values either
/// finite or NaN.
class ImuRecording {
 public:
  static constexpr double kJitterTolerance = 0.2;

  ImuRecording() = default;

  ImuRecording(std::vector<ImuSample> samples, double sample_rate_hz, std::string subject_id = {},
               std::string session_id = {})
      : samples_(std::move(samples)),
        sample_rate_hz_(sample_rate_hz),
        subject_id_(std::move(subject_id)),
        session_id_(std::move(session_id)) {
    require(sample_rate_hz_ > 0.0 && std::isfinite(sample_rate_hz_), ErrorCode::InvalidParameter,
            "sample rate must be positive");
    const double period = 1000.0 / sample_rate_hz_;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const ImuSample& s = samples_[i];
      require(std::isfinite(s.t_ms), ErrorCode::MalformedRow,
              "non-finite timestamp at sample " + std::to_string(i));
      for (double v : s.values) {
        require(std::isfinite(v) || is_missing(v), ErrorCode::MalformedRow,
                "infinite channel value at sample " + std::to_string(i));
      }
      if (i == 0) continue;
      const double step = s.t_ms - samples_[i - 1].t_ms;
      require(step > 0.0, ErrorCode::UnsortedTimestamps,
              "timestamp at sample " + std::to_string(i) + " does not increase");
      require(std::abs(step - period) <= kJitterTolerance * period, ErrorCode::TimestampJitter,
              "step of " + csv::format_double(step) + " ms at sample " + std::to_string(i) +
                  " is outside +/-20% of the " + csv::format_double(period) + " ms period");
    }
  }

  std::span<const ImuSample> samples() const { return samples_; }
  const ImuSample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double sample_rate_hz() const { return sample_rate_hz_; }
  const std::string& subject_id() const { return subject_id_; }
  const std::string& session_id() const { return session_id_; }

  std::vector<double> channel(std::size_t c) const {
    std::vector<double> out(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) out[i] = samples_[i].values[c];
    return out;
  }

  ChannelSeries channels() const {
    ChannelSeries out;
    for (std::size_t c = 0; c < kChannelCount; ++c) out[c] = channel(c);
    return out;
  }

  bool has_missing() const {
    for (const ImuSample& s : samples_) {
      for (double v : s.values) {
        if (is_missing(v)) return true;
      }
    }
    return false;
  }

  /// Same clock and metadata, new channel data.
  ImuRecording with_channels(const ChannelSeries& channels) const {
    for (const auto& ch : channels) {
      require(ch.size() == samples_.size(), ErrorCode::LengthMismatch,
              "channel length differs from recording length");
    }
    std::vector<ImuSample> out = samples_;
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t c = 0; c < kChannelCount; ++c) out[i].values[c] = channels[c][i];
    }
    return ImuRecording(std::move(out), sample_rate_hz_, subject_id_, session_id_);
  }

  friend bool operator==(const ImuRecording& a, const ImuRecording& b) {
    return a.sample_rate_hz_ == b.sample_rate_hz_ && a.samples_ == b.samples_;
  }

 private:
  std::vector<ImuSample> samples_;
  double sample_rate_hz_ = 50.0;
  std::string subject_id_;
  std::string session_id_;
};

struct LabelInterval {
  double start_ms = 0.0;
  double end_ms = 0.0;
  Behavior behavior = Behavior::Unknown;

  friend bool operator==(const LabelInterval&, const LabelInterval&) = default;
};

/// Half-open [start, end) behavior intervals, sorted and non-overlapping.
class LabelTrack {
 public:
  LabelTrack() = default;

  explicit LabelTrack(std::vector<LabelInterval> intervals) : intervals_(std::move(intervals)) {
    std::stable_sort(intervals_.begin(), intervals_.end(),
                     [](const LabelInterval& a, const LabelInterval& b) { return a.start_ms < b.start_ms; });
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
      const LabelInterval& iv = intervals_[i];
      require(std::isfinite(iv.start_ms) && std::isfinite(iv.end_ms) && iv.start_ms < iv.end_ms,
              ErrorCode::InvalidInterval,
              "interval " + std::to_string(i) + " must satisfy start_ms < end_ms");
      if (i > 0) {
        require(intervals_[i - 1].end_ms <= iv.start_ms, ErrorCode::OverlappingIntervals,
                "interval starting at " + csv::format_double(iv.start_ms) +
                    " overlaps the one ending at " + csv::format_double(intervals_[i - 1].end_ms));
      }
    }
  }

  std::span<const LabelInterval> intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }

  /// Behavior of the covering interval, Unknown when uncovered.
  Behavior behavior_at(double t_ms) const {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t_ms,
                               [](double t, const LabelInterval& iv) { return t < iv.start_ms; });
    if (it == intervals_.begin()) return Behavior::Unknown;
    --it;
    return t_ms < it->end_ms ? it->behavior : Behavior::Unknown;
  }

  friend bool operator==(const LabelTrack&, const LabelTrack&) = default;

 private:
  std::vector<LabelInterval> intervals_;
};

inline Behavior behavior_at(const LabelTrack& track, double t_ms) { return track.behavior_at(t_ms); }

inline constexpr std::string_view kRecordingHeader = "t_ms,ax,ay,az,gx,gy,gz";
inline constexpr std::string_view kLabelHeader = "start_ms,end_ms,behavior";

inline ImuRecording parse_recording(const std::string& text, double sample_rate_hz,
                                    const std::string& origin = "<memory>") {
  const std::vector<std::string> lines = csv::lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && csv::trim(lines[first]).empty()) ++first;
  require(first < lines.size(), ErrorCode::EmptyFile, origin + " is empty");

  const auto header = csv::split(lines[first]);
  const auto expected = csv::split(kRecordingHeader);
  require(header == expected, ErrorCode::MalformedHeader,
          origin + ": expected header '" + std::string(kRecordingHeader) + "'");

  std::vector<ImuSample> samples;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const auto cells = csv::split(lines[li]);
    const std::string where = origin + ":" + std::to_string(li + 1);
    require(cells.size() == 7, ErrorCode::MalformedRow, where + ": expected 7 cells");
    const auto t = csv::parse_double(cells[0]);
    require(t.has_value() && std::isfinite(*t), ErrorCode::MalformedRow, where + ": bad timestamp");
    ImuSample s;
    s.t_ms = *t;
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      const auto v = csv::parse_double(cells[c + 1]);
      s.values[c] = (v && std::isfinite(*v)) ? *v : kMissing;
    }
    if (!samples.empty() && s.t_ms <= samples.back().t_ms) {
      fail(ErrorCode::UnsortedTimestamps, where + ": timestamps must strictly increase");
    }
    samples.push_back(s);
  }
  require(!samples.empty(), ErrorCode::EmptyFile, origin + " has no data rows");
  return ImuRecording(std::move(samples), sample_rate_hz, {}, origin);
}

/// Reads a recording CSV. Empty cells and non-numeric text (including the
/// `NaN` literal) become missing values.
inline ImuRecording load_recording(const std::string& path, double sample_rate_hz) {
  ImuRecording rec = parse_recording(csv::read_file(path), sample_rate_hz, path);
  const std::string stem = std::filesystem::path(path).stem().string();
  return ImuRecording(std::vector<ImuSample>(rec.samples().begin(), rec.samples().end()), sample_rate_hz, {},
                      stem);
}

inline std::string format_recording(const ImuRecording& rec) {
  std::string out(kRecordingHeader);
  out += '\n';
  for (const ImuSample& s : rec.samples()) {
    out += csv::format_double(s.t_ms);
    for (double v : s.values) {
      out += ',';
      out += csv::format_double(v);
    }
    out += '\n';
  }
  return out;
}

inline void write_recording(const std::string& path, const ImuRecording& rec) {
  csv::write_file(path, format_recording(rec));
}

inline LabelTrack parse_labels(const std::string& text, const std::string& origin = "<memory>") {
  const std::vector<std::string> lines = csv::lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && csv::trim(lines[first]).empty()) ++first;
  require(first < lines.size(), ErrorCode::EmptyFile, origin + " is empty");
  require(csv::split(lines[first]) == csv::split(kLabelHeader), ErrorCode::MalformedHeader,
          origin + ": expected header '" + std::string(kLabelHeader) + "'");

  std::vector<LabelInterval> intervals;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const auto cells = csv::split(lines[li]);
    const std::string where = origin + ":" + std::to_string(li + 1);
    require(cells.size() == 3, ErrorCode::MalformedRow, where + ": expected 3 cells");
    const auto start = csv::parse_double(cells[0]);
    const auto end = csv::parse_double(cells[1]);
    require(start && end, ErrorCode::MalformedRow, where + ": bad interval bounds");
    const auto behavior = parse_behavior(cells[2]);
    require(behavior.has_value(), ErrorCode::UnknownBehaviorName,
            where + ": unknown behavior '" + std::string(cells[2]) + "'");
    intervals.push_back({*start, *end, *behavior});
  }
  return LabelTrack(std::move(intervals));
}

inline LabelTrack load_labels(const std::string& path) { return parse_labels(csv::read_file(path), path); }

inline std::string format_labels(const LabelTrack& track) {
  std::string out(kLabelHeader);
  out += '\n';
  for (const LabelInterval& iv : track.intervals()) {
    out += csv::format_double(iv.start_ms) + ',' + csv::format_double(iv.end_ms) + ',' +
           std::string(to_string(iv.behavior)) + '\n';
  }
  return out;
}

inline void write_labels(const std::string& path, const LabelTrack& track) {
  csv::write_file(path, format_labels(track));
}

}  // namespace behfilt
