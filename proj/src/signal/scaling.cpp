// SPDX-License-Identifier: Apache-2.0
#include "megtext/signal/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "megtext/error.hpp"

namespace megtext::signal {

double quantile_inplace(std::span<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile must lie in [0, 1]");
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double v_lo = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return v_lo;
  // The next order statistic is the minimum of the upper partition.
  const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return v_lo + frac * (v_hi - v_lo);
}

Recording robust_scale(Recording rec, double q_low, double q_high) {
  rec.validate();
  if (!(q_low >= 0.0 && q_low < q_high && q_high <= 1.0)) {
    throw ConfigError("scaler quantiles must satisfy 0 <= low < high <= 1");
  }
  const auto n = static_cast<std::size_t>(rec.time_samples());
  std::vector<double> scratch(n);
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    double* row = rec.samples.row(c).data();
    std::copy_n(row, n, scratch.begin());
    const double median = quantile_inplace(scratch, 0.5);
    const double lo = quantile_inplace(scratch, q_low);
    const double hi = quantile_inplace(scratch, q_high);
    double iqr = hi - lo;
    if (iqr < kMinIqr) iqr = 1.0;
    for (std::size_t i = 0; i < n; ++i) row[i] = (row[i] - median) / iqr;
  }
  return rec;
}

Recording clip_and_rescale(Recording rec, double clip_abs) {
  if (!(clip_abs > 0.0)) throw ConfigError("clip_abs must be positive, got " + std::to_string(clip_abs));
  rec.samples = rec.samples.cwiseMax(-clip_abs).cwiseMin(clip_abs) / clip_abs;
  return rec;
}

}  // namespace megtext::signal
