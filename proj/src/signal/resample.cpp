// SPDX-License-Identifier: Apache-2.0
#include "megtext/signal/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "megtext/error.hpp"

namespace megtext::signal {
namespace {

constexpr double kKaiserBeta = 5.0;
constexpr long kZeroCrossings = 10;

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-9 && std::round(v) > 0; }

// Windowed-sinc low-pass with cutoff `fc` relative to Nyquist, gain `gain`.
std::vector<double> design_fir(long half_len, double fc, double gain) {
  const long taps = 2 * half_len + 1;
  std::vector<double> h(static_cast<std::size_t>(taps));
  const double i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  double sum = 0.0;
  for (long i = 0; i < taps; ++i) {
    const double m = static_cast<double>(i - half_len);
    const double x = fc * m;
    const double sinc = (m == 0.0) ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
    const double r = m / static_cast<double>(half_len);
    const double w = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[static_cast<std::size_t>(i)] = fc * sinc * w;
    sum += h[static_cast<std::size_t>(i)];
  }
  // Unit DC gain before applying the interpolation gain.
  for (double& v : h) v *= gain / sum;
  return h;
}

}  // namespace

ResampleRatio resample_ratio(double source_hz, double target_hz, long max_den) {
  if (!(source_hz > 0.0) || !(target_hz > 0.0)) throw ConfigError("sample rates must be positive");
  if (is_integer(source_hz) && is_integer(target_hz)) {
    const auto s = static_cast<long>(std::round(source_hz));
    const auto t = static_cast<long>(std::round(target_hz));
    const long g = std::gcd(s, t);
    return {t / g, s / g};
  }
  // Continued-fraction convergents of target/source.
  const double value = target_hz / source_hz;
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double x = value;
  for (int it = 0; it < 64; ++it) {
    const auto a = static_cast<long>(std::floor(x));
    const long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = x - static_cast<double>(a);
    if (frac < 1e-12 || std::abs(static_cast<double>(p1) / static_cast<double>(q1) - value) < 1e-12) break;
    x = 1.0 / frac;
  }
  if (p1 <= 0 || q1 <= 0) throw ConfigError("cannot approximate resampling ratio " + std::to_string(value));
  return {p1, q1};
}

Recording resample(Recording rec, double target_rate_hz) {
  rec.validate();
  if (!(target_rate_hz > 0.0)) throw ConfigError("target rate must be positive");
  if (target_rate_hz == rec.sample_rate_hz) return rec;

  const ResampleRatio ratio = resample_ratio(rec.sample_rate_hz, target_rate_hz);
  const long up = ratio.up, down = ratio.down;
  const long n_in = static_cast<long>(rec.time_samples());
  const auto n_out = static_cast<long>(
      std::llround(static_cast<double>(n_in) * target_rate_hz / rec.sample_rate_hz));
  if (n_out < 1) throw ConfigError("resampled recording would be empty");

  const long max_rate = std::max(up, down);
  const long half_len = kZeroCrossings * max_rate;
  const std::vector<double> h = design_fir(half_len, 1.0 / static_cast<double>(max_rate), static_cast<double>(up));
  const long taps = static_cast<long>(h.size());

  SampleMatrix out(rec.channels(), n_out);
  // Output m sits at upsampled index m*down; input j at j*up; filter centred at half_len.
  for (long m = 0; m < n_out; ++m) {
    const long centre = m * down + half_len;
    // Valid j: 0 <= centre - j*up < taps.
    const long j_hi = std::min(n_in - 1, centre / up);
    const long j_lo = std::max(0L, (centre - taps + up) / up);
    for (Eigen::Index c = 0; c < rec.channels(); ++c) {
      const double* x = rec.samples.row(c).data();
      double acc = 0.0;
      for (long j = j_lo; j <= j_hi; ++j) {
        const long k = centre - j * up;
        if (k >= 0 && k < taps) acc += x[j] * h[static_cast<std::size_t>(k)];
      }
      out(c, m) = acc;
    }
  }
  rec.samples = std::move(out);
  rec.sample_rate_hz = target_rate_hz;
  return rec;
}

}  // namespace megtext::signal
