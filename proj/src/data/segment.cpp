// SPDX-License-Identifier: Apache-2.0
#include "megtext/data/segment.hpp"

#include <cmath>
#include <spdlog/spdlog.h>
#include <string>

#include "megtext/error.hpp"

namespace megtext::data {

signal::Recording segment_recording(const signal::Recording& rec, const ManifestEntry& entry) {
  const double rate = rec.sample_rate_hz;
  const auto first = static_cast<Eigen::Index>(std::llround(entry.start_s * rate));
  const auto count = static_cast<Eigen::Index>(std::llround((entry.end_s - entry.start_s) * rate));
  if (count <= 0) {
    throw RangeError("empty window [" + std::to_string(entry.start_s) + ", " + std::to_string(entry.end_s) + ")");
  }
  if (first < 0 || first + count > rec.time_samples()) {
    throw RangeError("window [" + std::to_string(entry.start_s) + ", " + std::to_string(entry.end_s) +
                     ") s exceeds a recording of " + std::to_string(rec.duration_s()) + " s");
  }
  signal::Recording out;
  out.samples = rec.samples.middleCols(first, count);
  out.sample_rate_hz = rate;
  out.channel_names = rec.channel_names;
  return out;
}

WindowedSegment fit_to_window(signal::Recording segment, Eigen::Index window_samples) {
  if (window_samples < 1) throw ConfigError("window must hold at least one sample");
  WindowedSegment w;
  const Eigen::Index n = segment.time_samples();
  w.content_samples = std::min(n, window_samples);
  if (n > window_samples) {
    spdlog::warn("segment of {} samples truncated to the {}-sample input window", n, window_samples);
    w.truncated = true;
  }
  signal::SampleMatrix padded = signal::SampleMatrix::Zero(segment.channels(), window_samples);
  padded.leftCols(w.content_samples) = segment.samples.leftCols(w.content_samples);
  segment.samples = std::move(padded);
  w.recording = std::move(segment);
  return w;
}

}  // namespace megtext::data
