#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "behfilt/behfilt.hpp"

namespace behfilt::testing {

inline std::string data_path(const std::string& name) { return std::string(BEHFILT_TEST_DATA_DIR) + "/" + name; }

/// Numeric CSV with a header row, as named columns.
inline std::map<std::string, std::vector<double>> read_columns(const std::string& name) {
  const std::vector<std::string> lines = csv::lines_of(csv::read_file(data_path(name)));
  std::vector<std::string> header;
  for (auto cell : csv::split(lines.at(0))) header.emplace_back(cell);
  std::map<std::string, std::vector<double>> cols;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (csv::trim(lines[li]).empty()) continue;
    const auto cells = csv::split(lines[li]);
    for (std::size_t j = 0; j < header.size(); ++j) cols[header[j]].push_back(csv::parse_double(cells.at(j)).value());
  }
  return cols;
}

inline std::vector<double> sine(std::size_t n, double freq_hz, double fs_hz, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs_hz + phase);
  }
  return x;
}

inline std::vector<double> noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = rng.normal(0.0, sigma);
  return x;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Gaussian blobs: class c centred at `separation` * e_c (one axis per
/// class) with unit variance in `dims` dimensions.
struct Blobs {
  ml::Matrix x;
  std::vector<int> y;
};

inline Blobs gaussian_blobs(std::size_t classes, std::size_t per_class, std::size_t dims, double separation,
                            std::uint64_t seed) {
  Rng rng(seed);
  Blobs b{ml::Matrix(classes * per_class, dims), {}};
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = c * per_class + i;
      for (std::size_t d = 0; d < dims; ++d) b.x(r, d) = rng.normal() + (d == c % dims ? separation : 0.0);
      b.y.push_back(static_cast<int>(c));
    }
  }
  return b;
}

/// XOR in the unit square: label = (x0 > 0.5) != (x1 > 0.5), with a margin
/// around the decision lines.
inline Blobs xor_data(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b{ml::Matrix(n, 2), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const bool a = rng.uniform() < 0.5;
    const bool c = rng.uniform() < 0.5;
    b.x(i, 0) = (a ? 0.6 : 0.0) + 0.4 * rng.uniform();
    b.x(i, 1) = (c ? 0.6 : 0.0) + 0.4 * rng.uniform();
    b.y.push_back(a != c ? 1 : 0);
  }
  return b;
}

inline double accuracy(std::span<const int> truth, std::span<const int> pred) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

/// Synthetic dataset with the default signal models.
inline SynthTruth synth_dataset(double duration_s, std::uint64_t seed, double spike_rate = 0.0) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.schedule = random_schedule(duration_s, seed + 1);
  cfg.spike_rate = spike_rate;
  return generate(cfg);
}

/// Feature matrix whose first `informative` columns each shift one class by
/// 2 sigma; the remaining columns are independent noise.
inline FeatureMatrix planted_features(std::size_t rows, std::size_t cols, std::size_t informative, std::size_t classes,
                                      std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix fm;
  fm.x = ml::Matrix(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) fm.names.push_back("f" + std::to_string(j));
  for (std::size_t r = 0; r < rows; ++r) {
    const int label = static_cast<int>(r % classes);
    fm.labels.push_back(label);
    fm.window_start_ms.push_back(static_cast<double>(r));
    for (std::size_t j = 0; j < cols; ++j) {
      const bool shifted = j < informative && j % classes == static_cast<std::size_t>(label);
      const double signal = shifted ? 2.0 : 0.0;
      fm.x(r, j) = signal + rng.normal();
    }
  }
  return fm;
}

}  // namespace behfilt::testing
