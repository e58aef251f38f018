#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "behfilt/csv.hpp"
#include "behfilt/data_model.hpp"
#include "behfilt/error.hpp"
#include "behfilt/rng.hpp"
#include "behfilt/stats.hpp"

namespace behfilt {

using ChannelArray = std::array<double, kChannelCount>;

struct Harmonic {
  double freq_hz = 1.0;
  ChannelArray amplitude{};
};

/// Clean signal of one behavior: per-channel baseline plus a sum of
/// sinusoids. Inactive behaviors have no harmonics.
struct BehaviorModel {
  ChannelArray baseline{};
  std::vector<Harmonic> harmonics;
};

/// Default signal models. Eating and Interacting share the standing
/// posture and a weak slow component; they differ by which sensor triad
/// carries an 8 Hz oscillation. Lying is a small tilt away from standing.
inline std::map<Behavior, BehaviorModel> default_behavior_models() {
  std::map<Behavior, BehaviorModel> m;
  //                                    ax     ay     az     gx     gy     gz
  m[Behavior::Standing] = {{0.00, 0.00, 1.00, 0.00, 0.00, 0.00}, {}};
  m[Behavior::Lying] = {{0.10, 0.00, 0.90, 0.00, 0.10, 0.00}, {}};
  m[Behavior::Unknown] = {{0.05, 0.00, 0.95, 0.00, 0.05, 0.00}, {}};
  m[Behavior::Walking] = {{0.00, 0.00, 1.00, 0.00, 0.00, 0.00},
                          {{2.0, {0.30, 0.10, 0.40, 0.20, 0.40, 0.10}}, {4.0, {0.15, 0.05, 0.20, 0.10, 0.20, 0.05}}}};
  m[Behavior::Eating] = {{0.00, 0.00, 1.00, 0.00, 0.00, 0.00},
                         {{1.0, {0.05, 0.05, 0.05, 0.05, 0.05, 0.05}}, {8.0, {0.40, 0.40, 0.40, 0.00, 0.00, 0.00}}}};
  m[Behavior::Interacting] = {{0.00, 0.00, 1.00, 0.00, 0.00, 0.00},
                              {{1.0, {0.05, 0.05, 0.05, 0.05, 0.05, 0.05}}, {8.0, {0.00, 0.00, 0.00, 0.40, 0.40, 0.40}}}};
  m[Behavior::Drinking] = {{0.00, 0.25, 0.90, 0.00, 0.00, 0.00},
                           {{1.5, {0.05, 0.15, 0.05, 0.15, 0.05, 0.05}}, {5.0, {0.05, 0.10, 0.05, 0.10, 0.05, 0.05}}}};
  return m;
}

struct SynthConfig {
  double fs_hz = 50.0;
  std::vector<std::pair<Behavior, double>> schedule;  // (behavior, duration in s), in order
  std::map<Behavior, BehaviorModel> models = default_behavior_models();
  double noise_sigma_active = 0.1;
  double noise_sigma_inactive = 0.15;
  // Inactive segments also pick up a sinusoidal interference ("tremor") on
  // one random sensor triad, at a random frequency inside tremor_band_hz.
  double tremor_amplitude = 0.4;  // scaled per segment by [1-j, 1+j], j = amplitude_jitter
  std::pair<double, double> tremor_band_hz{7.0, 9.0};
  double amplitude_jitter = 0.2;   // per-segment harmonic amplitude scale in [1-j, 1+j]
  double frequency_jitter = 0.03;  // per-segment relative frequency shift in [-j, j]
  double baseline_jitter = 0.01;   // per-segment baseline offset sigma
  double spike_rate = 0.0;         // fraction of samples that receive one spike
  double spike_magnitude = 20.0;   // in units of the channel's standard deviation
  std::uint64_t seed = 0;
  std::string subject_id = "synthetic";
  std::string session_id = "synthetic";

  double duration_s() const {
    double total = 0.0;
    for (const auto& [b, d] : schedule) total += d;
    return total;
  }

  void validate() const {
    require(fs_hz > 0.0, ErrorCode::InvalidConfig, "synth fs_hz must be > 0");
    require(!schedule.empty(), ErrorCode::InvalidConfig, "synth schedule is empty");
    for (const auto& [b, d] : schedule) {
      require(d > 0.0, ErrorCode::InvalidConfig, "synth segment durations must be > 0");
      require(models.contains(b), ErrorCode::InvalidConfig,
              "no signal model for behavior " + std::string(to_string(b)));
    }
    require(spike_rate >= 0.0 && spike_rate <= 1.0, ErrorCode::InvalidConfig, "spike_rate must be in [0, 1]");
    require(noise_sigma_active >= 0.0 && noise_sigma_inactive >= 0.0, ErrorCode::InvalidConfig,
            "noise sigmas must be >= 0");
    require(tremor_amplitude >= 0.0 && tremor_band_hz.first > 0.0 && tremor_band_hz.second >= tremor_band_hz.first &&
                tremor_band_hz.second < fs_hz / 2.0,
            ErrorCode::InvalidConfig, "tremor band must satisfy 0 < lo <= hi < fs/2");
    require(spike_magnitude >= 0.0, ErrorCode::InvalidConfig, "spike_magnitude must be >= 0");
    require(amplitude_jitter >= 0.0 && amplitude_jitter < 1.0 && frequency_jitter >= 0.0 && frequency_jitter < 1.0 &&
                baseline_jitter >= 0.0,
            ErrorCode::InvalidConfig, "jitter settings out of range");
  }
};

struct Spike {
  std::size_t index = 0;
  std::size_t channel = 0;
  friend bool operator==(const Spike&, const Spike&) = default;
};

struct SynthTruth {
  ImuRecording clean;
  ImuRecording noisy;
  LabelTrack labels;
  std::vector<Spike> spikes;  // ascending index
};

/// Schedule of random segments covering `duration_s`: mostly the five
/// classified behaviors, with occasional Drinking and Unknown.
inline std::vector<std::pair<Behavior, double>> random_schedule(double duration_s, std::uint64_t seed,
                                                                double min_segment_s = 6.0,
                                                                double max_segment_s = 30.0) {
  require(duration_s > 0.0 && min_segment_s > 0.0 && max_segment_s >= min_segment_s, ErrorCode::InvalidConfig,
          "bad schedule durations");
  Rng rng(seed);
  std::vector<std::pair<Behavior, double>> out;
  double t = 0.0;
  while (t < duration_s) {
    const double u = rng.uniform();
    Behavior b = kClassifiedBehaviors[rng.index(kClassifiedBehaviors.size())];
    if (u < 0.05) b = Behavior::Drinking;
    else if (u < 0.10) b = Behavior::Unknown;
    const double d = std::min(rng.uniform(min_segment_s, max_segment_s), duration_s - t);
    out.emplace_back(b, d);
    t += d;
  }
  return out;
}

inline SynthTruth generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double period_ms = 1000.0 / cfg.fs_hz;

  // Segment boundaries on the sample grid.
  std::vector<std::size_t> bounds{0};
  double t = 0.0;
  for (const auto& [b, d] : cfg.schedule) {
    t += d;
    bounds.push_back(static_cast<std::size_t>(std::llround(t * cfg.fs_hz)));
  }
  const std::size_t n = bounds.back();
  require(n >= 1, ErrorCode::InvalidConfig, "synth schedule is shorter than one sample");

  ChannelSeries clean;
  ChannelSeries noisy;
  for (auto& ch : clean) ch.assign(n, 0.0);
  for (auto& ch : noisy) ch.assign(n, 0.0);
  std::vector<LabelInterval> intervals;

  for (std::size_t s = 0; s < cfg.schedule.size(); ++s) {
    const Behavior b = cfg.schedule[s].first;
    const BehaviorModel& model = cfg.models.at(b);
    const std::size_t begin = bounds[s];
    const std::size_t end = bounds[s + 1];
    Rng seg = rng.fork();
    ChannelArray baseline = model.baseline;
    for (double& v : baseline) v += seg.normal(0.0, cfg.baseline_jitter);
    const double scale = seg.uniform(1.0 - cfg.amplitude_jitter, 1.0 + cfg.amplitude_jitter);
    struct Term {
      double omega;
      ChannelArray amp;
      ChannelArray phase;
    };
    std::vector<Term> terms;
    for (const Harmonic& h : model.harmonics) {
      Term term{2.0 * std::numbers::pi * h.freq_hz * (1.0 + seg.uniform(-cfg.frequency_jitter, cfg.frequency_jitter)),
                h.amplitude, {}};
      for (double& a : term.amp) a *= scale;
      for (double& p : term.phase) p = seg.uniform(0.0, 2.0 * std::numbers::pi);
      terms.push_back(term);
    }
    const bool active = group_of(b) == ActivityGroup::Active;
    const double sigma = active ? cfg.noise_sigma_active : cfg.noise_sigma_inactive;
    ChannelArray tremor_amp{};
    ChannelArray tremor_phase{};
    double tremor_omega = 0.0;
    if (!active && cfg.tremor_amplitude > 0.0) {
      const std::size_t triad = seg.index(2);
      tremor_omega = 2.0 * std::numbers::pi * seg.uniform(cfg.tremor_band_hz.first, cfg.tremor_band_hz.second);
      const double a = cfg.tremor_amplitude * seg.uniform(1.0 - cfg.amplitude_jitter, 1.0 + cfg.amplitude_jitter);
      for (std::size_t c = 3 * triad; c < 3 * triad + 3; ++c) {
        tremor_amp[c] = a;
        tremor_phase[c] = seg.uniform(0.0, 2.0 * std::numbers::pi);
      }
    }
    for (std::size_t i = begin; i < end; ++i) {
      const double ts = static_cast<double>(i - begin) / cfg.fs_hz;
      for (std::size_t c = 0; c < kChannelCount; ++c) {
        double v = baseline[c];
        for (const Term& term : terms) v += term.amp[c] * std::sin(term.omega * ts + term.phase[c]);
        clean[c][i] = v;
        const double tremor = tremor_amp[c] * std::sin(tremor_omega * ts + tremor_phase[c]);
        noisy[c][i] = v + tremor + (sigma > 0.0 ? seg.normal(0.0, sigma) : 0.0);
      }
    }
    if (b != Behavior::Unknown && end > begin) {
      intervals.push_back({static_cast<double>(begin) * period_ms, static_cast<double>(end) * period_ms, b});
    }
  }

  // Spikes: each chosen sample gets one spike on one random channel.
  std::vector<Spike> spikes;
  if (cfg.spike_rate > 0.0 && cfg.spike_magnitude > 0.0) {
    ChannelArray sd{};
    for (std::size_t c = 0; c < kChannelCount; ++c) sd[c] = stats::stddev(noisy[c]);
    Rng spike_rng = rng.fork();
    for (std::size_t i = 0; i < n; ++i) {
      if (spike_rng.uniform() >= cfg.spike_rate) continue;
      const std::size_t c = spike_rng.index(kChannelCount);
      const double sign = spike_rng.uniform() < 0.5 ? -1.0 : 1.0;
      noisy[c][i] += sign * cfg.spike_magnitude * sd[c];
      spikes.push_back({i, c});
    }
  }

  std::vector<ImuSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) samples[i].t_ms = static_cast<double>(i) * period_ms;
  ImuRecording base(std::move(samples), cfg.fs_hz, cfg.subject_id, cfg.session_id);
  return {base.with_channels(clean), base.with_channels(noisy), LabelTrack(std::move(intervals)), std::move(spikes)};
}

inline std::string format_spikes(const std::vector<Spike>& spikes) {
  std::string out = "index,channel\n";
  for (const Spike& s : spikes) out += std::to_string(s.index) + "," + std::string(kChannelNames[s.channel]) + "\n";
  return out;
}

}  // namespace behfilt
