// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "megtext/signal/recording.hpp"

namespace megtext::signal {

/// Normalized second-order section, a0 == 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;

  double dc_gain() const noexcept { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

using SosFilter = std::vector<Biquad>;

/// IIR notch at `freq_hz` with the given quality factor (bandwidth = freq / Q).
Biquad design_notch(double freq_hz, double quality, double rate_hz);

/// Butterworth low/high-pass of even `order`, as order/2 cascaded sections.
SosFilter design_butterworth_lowpass(int order, double cutoff_hz, double rate_hz);
SosFilter design_butterworth_highpass(int order, double cutoff_hz, double rate_hz);

/// Zero-phase forward-backward filtering of one channel in place. The signal is
/// extended by `pad` samples of odd reflection on both ends and each section starts
/// from its steady state for the first extended sample.
void sosfiltfilt(const SosFilter& sos, std::span<double> x, std::size_t pad);

inline constexpr double kNotchQuality = 30.0;
inline constexpr int kBandpassOrder = 4;

/// Zero-phase notch (Q = 30). Requires 0 < freq_hz < Nyquist.
Recording notch_filter(Recording rec, double freq_hz);

/// Zero-phase Butterworth band-pass built from a 4th-order high-pass at `low_hz`
/// and a 4th-order low-pass at `high_hz`. Requires 0 < low < high < Nyquist.
Recording bandpass_filter(Recording rec, double low_hz, double high_hz);

}  // namespace megtext::signal
