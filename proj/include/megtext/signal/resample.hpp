// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "megtext/signal/recording.hpp"

namespace megtext::signal {

/// Rational up/down factors approximating target/source.
struct ResampleRatio {
  long up = 1;
  long down = 1;
};

/// Exact for integer rates; otherwise the best continued-fraction approximation
/// with denominator at most `max_den`.
ResampleRatio resample_ratio(double source_hz, double target_hz, long max_den = 1000);

/// Polyphase anti-aliased resampling (Kaiser-windowed sinc, beta 5, 10 zero
/// crossings per side of the slower rate). Output length is
/// round(n * target / source); equal rates return the input unchanged.
Recording resample(Recording rec, double target_rate_hz);

}  // namespace megtext::signal
