// SPDX-License-Identifier: Apache-2.0
#include "megtext/signal/preprocess.hpp"

#include <nlohmann/json.hpp>

#include "megtext/error.hpp"
#include "megtext/signal/filters.hpp"
#include "megtext/signal/resample.hpp"
#include "megtext/signal/scaling.hpp"

namespace megtext::signal {

void PreprocessConfig::validate() const {
  if (!(line_freq_hz > 0.0)) throw ConfigError("line_freq_hz must be positive");
  if (!(band_low_hz > 0.0 && band_low_hz < band_high_hz && band_high_hz < target_rate_hz / 2.0)) {
    throw ConfigError("band edges must satisfy 0 < band_low_hz < band_high_hz < target_rate_hz / 2");
  }
  if (!(clip_abs > 0.0)) throw ConfigError("clip_abs must be positive");
  if (!(scaler_quantile_low >= 0.0 && scaler_quantile_low < scaler_quantile_high && scaler_quantile_high <= 1.0)) {
    throw ConfigError("scaler quantiles must satisfy 0 <= low < high <= 1");
  }
}

void to_json(nlohmann::json& j, const PreprocessConfig& c) {
  j = nlohmann::json{{"line_freq_hz", c.line_freq_hz},
                     {"band_low_hz", c.band_low_hz},
                     {"band_high_hz", c.band_high_hz},
                     {"target_rate_hz", c.target_rate_hz},
                     {"clip_abs", c.clip_abs},
                     {"scaler_quantile_low", c.scaler_quantile_low},
                     {"scaler_quantile_high", c.scaler_quantile_high}};
}

void from_json(const nlohmann::json& j, PreprocessConfig& c) {
  c = PreprocessConfig{};
  for (const auto& [key, value] : j.items()) {
    if (key == "line_freq_hz") c.line_freq_hz = value.get<double>();
    else if (key == "band_low_hz") c.band_low_hz = value.get<double>();
    else if (key == "band_high_hz") c.band_high_hz = value.get<double>();
    else if (key == "target_rate_hz") c.target_rate_hz = value.get<double>();
    else if (key == "clip_abs") c.clip_abs = value.get<double>();
    else if (key == "scaler_quantile_low") c.scaler_quantile_low = value.get<double>();
    else if (key == "scaler_quantile_high") c.scaler_quantile_high = value.get<double>();
    else throw SchemaError("preprocess: unknown key '" + key + "'");
  }
  c.validate();
}

Recording preprocess(Recording rec, const PreprocessConfig& cfg) {
  cfg.validate();
  rec = notch_filter(std::move(rec), cfg.line_freq_hz);
  rec = bandpass_filter(std::move(rec), cfg.band_low_hz, cfg.band_high_hz);
  rec = resample(std::move(rec), cfg.target_rate_hz);
  rec = robust_scale(std::move(rec), cfg.scaler_quantile_low, cfg.scaler_quantile_high);
  return clip_and_rescale(std::move(rec), cfg.clip_abs);
}

}  // namespace megtext::signal
