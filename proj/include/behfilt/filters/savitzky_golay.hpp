#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "behfilt/error.hpp"

namespace behfilt::filters {

struct SavGolParams {
  int window = 11;
  int polyorder = 3;

  friend bool operator==(const SavGolParams&, const SavGolParams&) = default;
};

inline void validate_savgol(int window, int polyorder) {
  require(polyorder >= 0, ErrorCode::InvalidWindowOrder, "polyorder must be >= 0");
  require(window % 2 == 1 && window >= polyorder + 2, ErrorCode::InvalidWindowOrder,
          "Savitzky-Golay window must be odd and >= polyorder + 2");
}

/// Least-squares projection for one window: row r of the result gives the
/// weights that evaluate the fitted polynomial at window position r.
inline Eigen::MatrixXd savgol_projection(int window, int polyorder) {
  validate_savgol(window, polyorder);
  const int half = window / 2;
  const double scale = half > 0 ? static_cast<double>(half) : 1.0;
  Eigen::MatrixXd vander(window, polyorder + 1);
  for (int i = 0; i < window; ++i) {
    const double t = static_cast<double>(i - half) / scale;
    double p = 1.0;
    for (int j = 0; j <= polyorder; ++j) {
      vander(i, j) = p;
      p *= t;
    }
  }
  // Hat matrix V (V^T V)^-1 V^T via QR for conditioning.
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
  const Eigen::MatrixXd pinv = qr.solve(Eigen::MatrixXd::Identity(window, window));
  return vander * pinv;
}

/// Smoothing coefficients for the window center.
inline std::vector<double> savgol_coefficients(int window, int polyorder) {
  const Eigen::MatrixXd hat = savgol_projection(window, polyorder);
  const int half = window / 2;
  std::vector<double> c(static_cast<std::size_t>(window));
  for (int i = 0; i < window; ++i) c[static_cast<std::size_t>(i)] = hat(half, i);
  return c;
}

/// Savitzky-Golay smoothing. Interior samples use the centered convolution;
/// the first and last half-windows are evaluated from the polynomial fitted
/// to the first/last full window, so polynomials of degree <= polyorder are
/// reproduced everywhere.
inline std::vector<double> savitzky_golay(std::span<const double> x, int window, int polyorder) {
  validate_savgol(window, polyorder);
  require(x.size() >= static_cast<std::size_t>(window), ErrorCode::SeriesTooShort,
          "Savitzky-Golay needs at least window samples");
  const Eigen::MatrixXd hat = savgol_projection(window, polyorder);
  const std::size_t n = x.size();
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t half = w / 2;
  std::vector<double> out(n);

  const auto apply_row = [&](std::size_t row, std::size_t start) {
    double acc = 0.0;
    for (std::size_t j = 0; j < w; ++j) acc += hat(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) * x[start + j];
    return acc;
  };
  for (std::size_t i = half; i + half < n; ++i) out[i] = apply_row(half, i - half);
  for (std::size_t i = 0; i < half; ++i) out[i] = apply_row(i, 0);
  for (std::size_t i = 0; i < half; ++i) out[n - half + i] = apply_row(half + 1 + i, n - w);
  return out;
}

}  // namespace behfilt::filters
