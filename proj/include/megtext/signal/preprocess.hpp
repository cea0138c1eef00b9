// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json_fwd.hpp>

#include "megtext/signal/recording.hpp"

namespace megtext::signal {

struct PreprocessConfig {
  double line_freq_hz = 50.0;
  double band_low_hz = 1.0;
  double band_high_hz = 60.0;
  double target_rate_hz = 200.0;
  double clip_abs = 10.0;
  double scaler_quantile_low = 0.25;
  double scaler_quantile_high = 0.75;

  void validate() const;
};

void to_json(nlohmann::json& j, const PreprocessConfig& c);
void from_json(const nlohmann::json& j, PreprocessConfig& c);

/// notch -> band-pass -> resample -> robust scale -> clip, applied to a whole
/// continuous recording. Output rate is cfg.target_rate_hz and values lie in [-1, 1].
Recording preprocess(Recording rec, const PreprocessConfig& cfg);

}  // namespace megtext::signal
