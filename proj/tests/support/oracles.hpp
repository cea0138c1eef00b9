// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "megtext/signal/recording.hpp"

namespace megtext::oracle {

/// Recording holding one sine per channel.
inline signal::Recording sine_recording(int channels, double seconds, double rate_hz, double freq_hz,
                                        double amplitude = 1.0) {
  const auto n = static_cast<Eigen::Index>(std::lround(seconds * rate_hz));
  signal::Recording rec;
  rec.sample_rate_hz = rate_hz;
  rec.samples.resize(channels, n);
  for (int c = 0; c < channels; ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      rec.samples(c, i) = amplitude * std::sin(2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate_hz);
  return rec;
}

/// Power of one frequency by direct DFT projection over [first, first + count).
inline double tone_power(const signal::SampleMatrix& m, Eigen::Index row, double rate_hz, double freq_hz,
                         Eigen::Index first, Eigen::Index count) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = first; i < first + count; ++i)
    acc += m(row, i) * std::polar(1.0, -2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / rate_hz);
  return std::norm(acc) / static_cast<double>(count * count);
}

inline double db(double ratio) { return 10.0 * std::log10(ratio); }

/// Sort-and-interpolate quantile.
inline double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Full-matrix Levenshtein distance.
template <typename T>
std::size_t dp_edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  return d[a.size()][b.size()];
}

}  // namespace megtext::oracle
