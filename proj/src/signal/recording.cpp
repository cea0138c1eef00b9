// SPDX-License-Identifier: Apache-2.0
#include "megtext/signal/recording.hpp"

#include <string>

#include "megtext/error.hpp"

namespace megtext::signal {

void Recording::validate() const {
  if (samples.rows() < 1 || samples.cols() < 1) {
    throw ConfigError("recording must have at least one channel and one sample");
  }
  if (!(sample_rate_hz > 0.0)) {
    throw ConfigError("recording sample rate must be positive, got " + std::to_string(sample_rate_hz));
  }
  if (!samples.allFinite()) throw ConfigError("recording contains non-finite samples");
  if (!channel_names.empty() && static_cast<Eigen::Index>(channel_names.size()) != samples.rows()) {
    throw ConfigError("channel_names has " + std::to_string(channel_names.size()) + " entries for " +
                      std::to_string(samples.rows()) + " channels");
  }
}

}  // namespace megtext::signal
