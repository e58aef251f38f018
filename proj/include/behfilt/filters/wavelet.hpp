#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "behfilt/error.hpp"
#include "behfilt/stats.hpp"

namespace behfilt::filters {

/// Orthogonal wavelet described by its decomposition low-pass filter.
struct Wavelet {
  std::string_view name;
  std::vector<double> dec_lo;

  std::size_t length() const { return dec_lo.size(); }

  /// Quadrature mirror of dec_lo.
  std::vector<double> dec_hi() const {
    const std::size_t f = dec_lo.size();
    std::vector<double> h(f);
    for (std::size_t j = 0; j < f; ++j) h[j] = ((j % 2 == 0) ? 1.0 : -1.0) * dec_lo[f - 1 - j];
    return h;
  }
};

inline Wavelet haar() { return {"haar", {0.7071067811865476, 0.7071067811865476}}; }

inline Wavelet daubechies2() {
  return {"db2", {-0.12940952255126037, 0.2241438680420134, 0.8365163037378079, 0.48296291314453416}};
}

inline Wavelet daubechies4() {
  return {"db4",
          {-0.010597401784997278, 0.032883011666982945, 0.030841381835986965, -0.18703481171888114,
           -0.02798376941698385, 0.6308807679295904, 0.7148465705525415, 0.23037781330885523}};
}

inline Wavelet wavelet_by_name(std::string_view name) {
  if (name == "haar" || name == "db1") return haar();
  if (name == "db2") return daubechies2();
  if (name == "db4") return daubechies4();
  fail(ErrorCode::InvalidParameter, "unknown wavelet family '" + std::string(name) + "'");
}

namespace detail {

/// Half-sample symmetric extension: x[-1] = x[0], x[n] = x[n-1], repeated
/// as often as needed for filters longer than the signal.
inline double symmetric_at(std::span<const double> x, long i) {
  const long n = static_cast<long>(x.size());
  long m = i % (2 * n);
  if (m < 0) m += 2 * n;
  return m < n ? x[static_cast<std::size_t>(m)] : x[static_cast<std::size_t>(2 * n - 1 - m)];
}

}  // namespace detail

struct DwtLevel {
  std::vector<double> approx;
  std::vector<double> detail;
};

/// Single-level analysis. Produces floor((n + F - 1) / 2) coefficients per band.
inline DwtLevel dwt(std::span<const double> x, const Wavelet& w) {
  require(!x.empty(), ErrorCode::SeriesTooShort, "dwt of an empty series");
  const std::size_t f = w.length();
  const std::vector<double> hi = w.dec_hi();
  const std::size_t count = (x.size() + f - 1) / 2;
  DwtLevel out{std::vector<double>(count), std::vector<double>(count)};
  for (std::size_t k = 0; k < count; ++k) {
    double a = 0.0;
    double d = 0.0;
    for (std::size_t j = 0; j < f; ++j) {
      const double v = detail::symmetric_at(x, static_cast<long>(2 * k + 1) - static_cast<long>(j));
      a += w.dec_lo[j] * v;
      d += hi[j] * v;
    }
    out.approx[k] = a;
    out.detail[k] = d;
  }
  return out;
}

/// Single-level synthesis back to `n` samples. Exact inverse of dwt() for
/// orthogonal wavelets: the filter bank has a delay of F - 2 samples.
inline std::vector<double> idwt(std::span<const double> approx, std::span<const double> detail, const Wavelet& w,
                                std::size_t n) {
  require(approx.size() == detail.size(), ErrorCode::LengthMismatch, "idwt band lengths differ");
  const std::size_t f = w.length();
  const std::vector<double> hi = w.dec_hi();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const long shifted = static_cast<long>(i + f) - 2;
    double acc = 0.0;
    // Synthesis filters are the time-reversed analysis filters.
    const long k_lo = std::max(0L, (shifted - static_cast<long>(f) + 2) / 2);
    const long k_hi = std::min(static_cast<long>(approx.size()) - 1, shifted / 2);
    for (long k = k_lo; k <= k_hi; ++k) {
      const long g = shifted - 2 * k;
      if (g < 0 || g >= static_cast<long>(f)) continue;
      const std::size_t rev = f - 1 - static_cast<std::size_t>(g);
      acc += w.dec_lo[rev] * approx[static_cast<std::size_t>(k)] + hi[rev] * detail[static_cast<std::size_t>(k)];
    }
    out[i] = acc;
  }
  return out;
}

/// Deepest level whose coarsest approximation still spans a full filter.
inline int max_dwt_level(std::size_t n, std::size_t filter_length) {
  if (filter_length < 2 || n < filter_length - 1) return 0;
  return static_cast<int>(std::floor(std::log2(static_cast<double>(n) / static_cast<double>(filter_length - 1))));
}

struct WaveletDecomposition {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;  // details[0] is the finest level
  std::vector<std::size_t> lengths;          // signal length entering each level
};

inline WaveletDecomposition wavedec(std::span<const double> x, const Wavelet& w, int level) {
  WaveletDecomposition out;
  std::vector<double> current(x.begin(), x.end());
  for (int l = 0; l < level; ++l) {
    out.lengths.push_back(current.size());
    DwtLevel step = dwt(current, w);
    out.details.push_back(std::move(step.detail));
    current = std::move(step.approx);
  }
  out.approx = std::move(current);
  return out;
}

inline std::vector<double> waverec(const WaveletDecomposition& dec, const Wavelet& w) {
  std::vector<double> current = dec.approx;
  for (std::size_t l = dec.details.size(); l-- > 0;) {
    current = idwt(current, dec.details[l], w, dec.lengths[l]);
  }
  return current;
}

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

/// MAD noise estimate from the finest detail band: median(|d1|) / 0.6745.
inline double estimate_noise_sigma(std::span<const double> x, const Wavelet& w = daubechies4()) {
  if (x.size() < 2) return 0.0;
  const DwtLevel first = dwt(x, w);
  std::vector<double> mags(first.detail.size());
  for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(first.detail[i]);
  return stats::median_inplace(mags) / 0.6745;
}

struct WaveletParams {
  std::string family = "db4";
  int level = 4;
  std::optional<double> threshold;  // nullopt: universal threshold

  friend bool operator==(const WaveletParams&, const WaveletParams&) = default;
};

/// Soft-threshold wavelet denoising. The requested level is clamped to
/// [1, max feasible]; the universal threshold is sigma * sqrt(2 ln n) with
/// sigma from the finest detail band.
inline std::vector<double> wavelet_denoise(std::span<const double> x, const WaveletParams& p) {
  require(x.size() >= 2, ErrorCode::SeriesTooShort, "wavelet denoising needs at least 2 samples");
  require(p.level >= 1, ErrorCode::InvalidParameter, "wavelet level must be >= 1");
  require(!p.threshold || (*p.threshold >= 0.0 && std::isfinite(*p.threshold)), ErrorCode::InvalidParameter,
          "wavelet threshold must be a finite value >= 0");
  const Wavelet w = wavelet_by_name(p.family);
  const int level = std::clamp(p.level, 1, std::max(1, max_dwt_level(x.size(), w.length())));
  WaveletDecomposition dec = wavedec(x, w, level);

  double t = 0.0;
  if (p.threshold) {
    t = *p.threshold;
  } else {
    std::vector<double> mags(dec.details[0].size());
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = std::abs(dec.details[0][i]);
    const double sigma = stats::median_inplace(mags) / 0.6745;
    t = sigma * std::sqrt(2.0 * std::log(static_cast<double>(x.size())));
  }
  if (t > 0.0) {
    for (auto& band : dec.details) {
      for (double& v : band) v = soft_threshold(v, t);
    }
  }
  return waverec(dec, w);
}

}  // namespace behfilt::filters
