// SPDX-License-Identifier: Apache-2.0
#include "megtext/signal/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "megtext/error.hpp"

namespace megtext::signal {
namespace {

void check_frequency(double freq_hz, double rate_hz, const char* what) {
  const double nyquist = rate_hz / 2.0;
  if (!(freq_hz > 0.0) || !(freq_hz < nyquist)) {
    throw ConfigError(std::string(what) + " " + std::to_string(freq_hz) + " Hz must lie in (0, " +
                      std::to_string(nyquist) + ") Hz");
  }
}

// Butterworth section quality factors for an even order.
std::vector<double> butterworth_q(int order) {
  if (order < 2 || order % 2 != 0) throw ConfigError("Butterworth order must be even and >= 2");
  std::vector<double> qs;
  for (int k = 1; k <= order / 2; ++k) {
    const double theta = (2.0 * k - 1.0) * std::numbers::pi / (2.0 * order);
    qs.push_back(1.0 / (2.0 * std::cos(theta)));
  }
  return qs;
}

// Transposed direct form II state for one section.
struct SectionState {
  double z1 = 0, z2 = 0;
};

SectionState steady_state(const Biquad& s, double u) {
  const double y = s.dc_gain() * u;
  SectionState st;
  st.z2 = s.b2 * u - s.a2 * y;
  st.z1 = s.b1 * u - s.a1 * y + st.z2;
  return st;
}

void filter_forward(const SosFilter& sos, std::vector<double>& x) {
  if (x.empty()) return;
  double u = x.front();
  std::vector<SectionState> states;
  states.reserve(sos.size());
  for (const auto& s : sos) {
    states.push_back(steady_state(s, u));
    u *= s.dc_gain();
  }
  for (double& v : x) {
    double in = v;
    for (std::size_t k = 0; k < sos.size(); ++k) {
      const Biquad& s = sos[k];
      SectionState& st = states[k];
      const double out = s.b0 * in + st.z1;
      st.z1 = s.b1 * in - s.a1 * out + st.z2;
      st.z2 = s.b2 * in - s.a2 * out;
      in = out;
    }
    v = in;
  }
}

Recording apply_per_channel(Recording rec, const SosFilter& sos, std::size_t pad) {
  const auto n = static_cast<std::size_t>(rec.time_samples());
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    std::span<double> row(rec.samples.row(c).data(), n);
    sosfiltfilt(sos, row, pad);
  }
  return rec;
}

std::size_t pad_for(double characteristic_hz, double rate_hz, std::size_t n) {
  const auto want = static_cast<std::size_t>(std::ceil(3.0 * rate_hz / characteristic_hz));
  return std::min(want, n > 0 ? n - 1 : 0);
}

}  // namespace

Biquad design_notch(double freq_hz, double quality, double rate_hz) {
  check_frequency(freq_hz, rate_hz, "notch frequency");
  if (!(quality > 0.0)) throw ConfigError("notch quality factor must be positive");
  const double w0 = 2.0 * std::numbers::pi * freq_hz / rate_hz;
  const double bw = w0 / quality;
  const double gain = 1.0 / (1.0 + std::tan(bw / 2.0));
  Biquad s;
  s.b0 = gain;
  s.b1 = -2.0 * std::cos(w0) * gain;
  s.b2 = gain;
  s.a1 = -2.0 * gain * std::cos(w0);
  s.a2 = 2.0 * gain - 1.0;
  return s;
}

SosFilter design_butterworth_lowpass(int order, double cutoff_hz, double rate_hz) {
  check_frequency(cutoff_hz, rate_hz, "low-pass cutoff");
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
  const double cw = std::cos(w0), sw = std::sin(w0);
  SosFilter sos;
  for (double q : butterworth_q(order)) {
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    sos.push_back(s);
  }
  return sos;
}

SosFilter design_butterworth_highpass(int order, double cutoff_hz, double rate_hz) {
  check_frequency(cutoff_hz, rate_hz, "high-pass cutoff");
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
  const double cw = std::cos(w0), sw = std::sin(w0);
  SosFilter sos;
  for (double q : butterworth_q(order)) {
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    s.b0 = (1.0 + cw) / 2.0 / a0;
    s.b1 = -(1.0 + cw) / a0;
    s.b2 = s.b0;
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    sos.push_back(s);
  }
  return sos;
}

void sosfiltfilt(const SosFilter& sos, std::span<double> x, std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0 || sos.empty()) return;
  pad = std::min(pad, n - 1);

  std::vector<double> ext(n + 2 * pad);
  const double first = x.front(), last = x.back();
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * first - x[pad - i];
    ext[pad + n + i] = 2.0 * last - x[n - 2 - i];
  }
  std::copy(x.begin(), x.end(), ext.begin() + static_cast<std::ptrdiff_t>(pad));

  filter_forward(sos, ext);
  std::reverse(ext.begin(), ext.end());
  filter_forward(sos, ext);
  std::reverse(ext.begin(), ext.end());

  std::copy_n(ext.begin() + static_cast<std::ptrdiff_t>(pad), n, x.begin());
}

Recording notch_filter(Recording rec, double freq_hz) {
  rec.validate();
  const Biquad notch = design_notch(freq_hz, kNotchQuality, rec.sample_rate_hz);
  const std::size_t pad =
      pad_for(freq_hz / kNotchQuality, rec.sample_rate_hz, static_cast<std::size_t>(rec.time_samples()));
  return apply_per_channel(std::move(rec), SosFilter{notch}, pad);
}

Recording bandpass_filter(Recording rec, double low_hz, double high_hz) {
  rec.validate();
  if (!(low_hz < high_hz)) {
    throw ConfigError("band-pass edges must satisfy low < high, got " + std::to_string(low_hz) + " and " +
                      std::to_string(high_hz));
  }
  SosFilter sos = design_butterworth_highpass(kBandpassOrder, low_hz, rec.sample_rate_hz);
  const SosFilter lp = design_butterworth_lowpass(kBandpassOrder, high_hz, rec.sample_rate_hz);
  sos.insert(sos.end(), lp.begin(), lp.end());
  const std::size_t pad = pad_for(low_hz, rec.sample_rate_hz, static_cast<std::size_t>(rec.time_samples()));
  return apply_per_channel(std::move(rec), sos, pad);
}

}  // namespace megtext::signal
