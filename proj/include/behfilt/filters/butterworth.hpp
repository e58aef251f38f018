#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "behfilt/error.hpp"

namespace behfilt::filters {

enum class PassBand { Low, High };

/// Second-order section, a0 normalized to 1:
/// y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2].
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double dc_gain() const { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

/// Digital Butterworth design as a cascade of order/2 biquads, using the
/// bilinear transform with the cutoff pre-warped.
inline std::vector<Biquad> design_butterworth(int order, double cutoff_hz, double fs_hz, PassBand band) {
  require(fs_hz > 0.0, ErrorCode::InvalidParameter, "sampling rate must be > 0");
  require(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0, ErrorCode::CutoffOutOfRange,
          "cutoff must lie strictly between 0 and fs/2");
  require(order >= 2 && order % 2 == 0, ErrorCode::InvalidParameter, "Butterworth order must be even and >= 2");

  const double k = 2.0 * fs_hz;
  const double wc = k * std::tan(std::numbers::pi * cutoff_hz / fs_hz);
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    // Analog pole pair on the unit circle, left half plane.
    const double theta = std::numbers::pi * (2.0 * i + 1.0 + order) / (2.0 * order);
    const double re = std::cos(theta);
    // Analog denominator s^2 + c1 s + c0.
    const double c1 = -2.0 * re * wc;
    const double c0 = wc * wc;
    const double d0 = k * k + c1 * k + c0;
    Biquad s;
    s.a1 = (2.0 * c0 - 2.0 * k * k) / d0;
    s.a2 = (k * k - c1 * k + c0) / d0;
    if (band == PassBand::Low) {
      const double g = c0 / d0;
      s.b0 = g;
      s.b1 = 2.0 * g;
      s.b2 = g;
    } else {
      const double g = k * k / d0;
      s.b0 = g;
      s.b1 = -2.0 * g;
      s.b2 = g;
    }
    sections.push_back(s);
  }
  return sections;
}

/// Cascade filtering (transposed direct form II). Each section starts in
/// the steady state it would reach for a constant input equal to `initial`.
inline std::vector<double> sosfilt_steady(const std::vector<Biquad>& sections, std::span<const double> x,
                                          double initial) {
  std::vector<double> y(x.begin(), x.end());
  double level = initial;
  for (const Biquad& s : sections) {
    const double g = s.dc_gain();
    double z1 = (g - s.b0) * level;
    double z2 = (s.b2 - s.a2 * g) * level;
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
    level *= g;
  }
  return y;
}

struct LowPassParams {
  double cutoff_hz = 5.0;
  int order = 4;

  friend bool operator==(const LowPassParams&, const LowPassParams&) = default;
};

struct HighPassParams {
  double cutoff_hz = 0.5;
  int order = 4;

  friend bool operator==(const HighPassParams&, const HighPassParams&) = default;
};

/// Forward-backward (zero-phase) Butterworth filtering. The series is
/// extended by odd reflection of 3*order samples at each end and trimmed
/// afterwards.
inline std::vector<double> butterworth_zero_phase(std::span<const double> x, double cutoff_hz, double fs_hz,
                                                  int order, PassBand band) {
  const std::vector<Biquad> sections = design_butterworth(order, cutoff_hz, fs_hz, band);
  const std::size_t pad = 3 * static_cast<std::size_t>(order);
  require(x.size() > pad, ErrorCode::SeriesTooShort,
          "zero-phase filtering needs more than " + std::to_string(pad) + " samples");
  const std::size_t n = x.size();

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> fwd = sosfilt_steady(sections, ext, ext.front());
  std::vector<double> rev(fwd.rbegin(), fwd.rend());
  std::vector<double> back = sosfilt_steady(sections, rev, rev.front());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = back[back.size() - 1 - (pad + i)];
  return out;
}

/// |H(e^{jw})| of a single pass of the cascade, for diagnostics and tests.
inline double magnitude_response(const std::vector<Biquad>& sections, double freq_hz, double fs_hz) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs_hz);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h(1.0, 0.0);
  for (const Biquad& s : sections) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return std::abs(h);
}

}  // namespace behfilt::filters
