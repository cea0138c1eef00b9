// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "megtext/signal/recording.hpp"

namespace megtext::signal {

/// Linear-interpolated quantile, h = (n - 1) q. `values` is reordered.
double quantile_inplace(std::span<double> values, double q);

inline constexpr double kMinIqr = 1e-12;

/// Per channel (x - median) / (Q(q_high) - Q(q_low)); an IQR below 1e-12 divides by 1.
Recording robust_scale(Recording rec, double q_low, double q_high);

/// clamp(x, -clip_abs, clip_abs) / clip_abs.
Recording clip_and_rescale(Recording rec, double clip_abs);

}  // namespace megtext::signal
