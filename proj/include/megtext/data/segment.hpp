// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "megtext/data/manifest.hpp"
#include "megtext/signal/recording.hpp"

namespace megtext::data {

/// Samples of [entry.start_s, entry.end_s) at the recording's rate. Throws
/// RangeError for empty or out-of-bounds windows.
signal::Recording segment_recording(const signal::Recording& rec, const ManifestEntry& entry);

struct WindowedSegment {
  signal::Recording recording;  // exactly window_samples long
  Eigen::Index content_samples = 0;  // samples carrying signal before zero padding
  bool truncated = false;
};

/// Right-pads with zeros or truncates to `window_samples`. Truncation is logged.
WindowedSegment fit_to_window(signal::Recording segment, Eigen::Index window_samples);

}  // namespace megtext::data
