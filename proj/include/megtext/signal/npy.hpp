// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>

#include "megtext/signal/recording.hpp"

namespace megtext::signal {

/// Reads a 2-D little-endian float32/float64 .npy array (C or Fortran order) as
/// channels x time.
SampleMatrix read_npy(const std::filesystem::path& path);

/// Writes channels x time as a C-order '<f8' .npy array.
void write_npy(const std::filesystem::path& path, const SampleMatrix& m);

/// Waveform store: `<stem>.npy` holds the samples, `<stem>.json` the header record
/// {"channels", "time_samples", "sample_rate_hz", "channel_names"}.
void save_recording(const std::filesystem::path& npy_path, const Recording& rec);

/// Loads a .npy waveform. The sidecar header is used when present; otherwise
/// `fallback_rate_hz` supplies the rate.
Recording load_recording(const std::filesystem::path& npy_path, double fallback_rate_hz = 0.0);

}  // namespace megtext::signal
