// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <nlohmann/json_fwd.hpp>
#include <random>
#include <string>
#include <utility>

#include "megtext/data/manifest.hpp"
#include "megtext/signal/recording.hpp"

namespace megtext::augment {

using Rng = std::mt19937_64;

enum class AugmentKind { time_mask, channel_mask, block_mask, noise, shift };

std::string to_string(AugmentKind k);
AugmentKind parse_augment_kind(std::string_view name);

inline constexpr Eigen::Index kMaskUnitSamples = 40;
inline constexpr double kMaskValue = 0.0;

struct AugmentationSpec {
  AugmentKind kind = AugmentKind::block_mask;
  double ratio = 0.0;                                      // masks
  double snr_db = std::numeric_limits<double>::infinity(); // noise
  double max_shift_s = 0.0;                                // shift
  double probability = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const AugmentationSpec& s);
void from_json(const nlohmann::json& j, AugmentationSpec& s);

/// Masks non-overlapping 1 x 40 units, drawn without replacement, until the masked
/// element count is the closest achievable to ratio * size.
signal::Recording apply_block_mask(signal::Recording rec, double ratio, Rng& rng);

/// Same, with all-channel x 40-sample units.
signal::Recording apply_time_mask(signal::Recording rec, double ratio, Rng& rng);

/// Masks round(ratio * channels) whole channels chosen uniformly without replacement.
signal::Recording apply_channel_mask(signal::Recording rec, double ratio, Rng& rng);

/// Adds white Gaussian noise scaled so 10 log10(P_signal / P_noise) = snr_db.
/// An infinite SNR returns the input. Zero signal power throws NumericError.
signal::Recording inject_noise(signal::Recording rec, double snr_db, Rng& rng);

/// Delays the content of a zero-padded window by `delta_s` (quantized to samples),
/// zero-filling the vacated start and moving every word span by the same amount.
/// The delay is clamped so the content stays inside the window.
std::pair<signal::Recording, data::ManifestEntry> shift_by(signal::Recording rec, data::ManifestEntry entry,
                                                             double delta_s);

/// shift_by with delta drawn uniformly from [0, max_shift_s].
std::pair<signal::Recording, data::ManifestEntry> shift_segment(signal::Recording rec, data::ManifestEntry entry,
                                                                  double max_shift_s, Rng& rng);

/// Applies the configured augmentation with probability spec.probability.
std::pair<signal::Recording, data::ManifestEntry> apply(signal::Recording rec, data::ManifestEntry entry,
                                                          const AugmentationSpec& spec, Rng& rng);

}  // namespace megtext::augment
