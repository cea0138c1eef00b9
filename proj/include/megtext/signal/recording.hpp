// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace megtext::signal {

/// Channels x time, row-major so each channel is contiguous.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// A multichannel recording. Every pipeline stage takes and returns one by value.
struct Recording {
  SampleMatrix samples;
  double sample_rate_hz = 0.0;
  std::vector<std::string> channel_names;  // empty or one name per channel

  Eigen::Index channels() const noexcept { return samples.rows(); }
  Eigen::Index time_samples() const noexcept { return samples.cols(); }
  double duration_s() const noexcept {
    return sample_rate_hz > 0 ? static_cast<double>(samples.cols()) / sample_rate_hz : 0.0;
  }

  /// Throws ConfigError if the invariants (non-empty, positive rate, finite samples,
  /// matching channel names) do not hold.
  void validate() const;
};

}  // namespace megtext::signal
