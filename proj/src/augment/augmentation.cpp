// SPDX-License-Identifier: Apache-2.0
#include "megtext/augment/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <vector>

#include "megtext/error.hpp"

namespace megtext::augment {
namespace {

struct Unit {
  Eigen::Index row0, rows, col0, cols;
  Eigen::Index size() const { return rows * cols; }
};

// Draws units without replacement while doing so moves the masked count closer
// to the target.
signal::Recording mask_units(signal::Recording rec, std::vector<Unit> units, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("mask ratio must lie in [0, 1]");
  const double target = ratio * static_cast<double>(rec.samples.size());
  std::shuffle(units.begin(), units.end(), rng);
  double masked = 0.0;
  for (const Unit& u : units) {
    const double next = masked + static_cast<double>(u.size());
    if (std::abs(next - target) >= std::abs(masked - target)) continue;
    rec.samples.block(u.row0, u.col0, u.rows, u.cols).setConstant(kMaskValue);
    masked = next;
  }
  return rec;
}

std::vector<Unit> column_grid(Eigen::Index row0, Eigen::Index rows, Eigen::Index time) {
  std::vector<Unit> units;
  for (Eigen::Index c0 = 0; c0 < time; c0 += kMaskUnitSamples) {
    units.push_back({row0, rows, c0, std::min(kMaskUnitSamples, time - c0)});
  }
  return units;
}

}  // namespace

std::string to_string(AugmentKind k) {
  switch (k) {
    case AugmentKind::time_mask: return "time_mask";
    case AugmentKind::channel_mask: return "channel_mask";
    case AugmentKind::block_mask: return "block_mask";
    case AugmentKind::noise: return "noise";
    case AugmentKind::shift: return "shift";
  }
  return "?";
}

AugmentKind parse_augment_kind(std::string_view name) {
  for (auto k : {AugmentKind::time_mask, AugmentKind::channel_mask, AugmentKind::block_mask, AugmentKind::noise,
                 AugmentKind::shift}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown augmentation kind '" + std::string(name) + "'");
}

void AugmentationSpec::validate() const {
  if (!(probability >= 0.0 && probability <= 1.0)) throw ConfigError("augmentation probability must lie in [0, 1]");
  switch (kind) {
    case AugmentKind::time_mask:
    case AugmentKind::channel_mask:
    case AugmentKind::block_mask:
      if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("mask ratio must lie in [0, 1]");
      break;
    case AugmentKind::noise:
      if (std::isnan(snr_db)) throw ConfigError("noise augmentation needs snr_db");
      break;
    case AugmentKind::shift:
      if (!(max_shift_s >= 0.0)) throw ConfigError("max_shift_s must be non-negative");
      break;
  }
}

void to_json(nlohmann::json& j, const AugmentationSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}, {"probability", s.probability}, {"seed", s.seed}};
  switch (s.kind) {
    case AugmentKind::noise: j["snr_db"] = s.snr_db; break;
    case AugmentKind::shift: j["max_shift_s"] = s.max_shift_s; break;
    default: j["ratio"] = s.ratio; break;
  }
}

void from_json(const nlohmann::json& j, AugmentationSpec& s) {
  s = AugmentationSpec{};
  if (!j.contains("kind")) throw SchemaError("augmentation: missing 'kind'");
  s.kind = parse_augment_kind(j.at("kind").get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (key == "probability") s.probability = value.get<double>();
    else if (key == "seed") s.seed = value.get<std::uint64_t>();
    else if (key == "ratio" && s.kind != AugmentKind::noise && s.kind != AugmentKind::shift) s.ratio = value.get<double>();
    else if (key == "snr_db" && s.kind == AugmentKind::noise) s.snr_db = value.get<double>();
    else if (key == "max_shift_s" && s.kind == AugmentKind::shift) s.max_shift_s = value.get<double>();
    else throw SchemaError("augmentation '" + to_string(s.kind) + "': unexpected key '" + key + "'");
  }
  s.validate();
}

signal::Recording apply_block_mask(signal::Recording rec, double ratio, Rng& rng) {
  std::vector<Unit> units;
  for (Eigen::Index c = 0; c < rec.channels(); ++c) {
    auto row = column_grid(c, 1, rec.time_samples());
    units.insert(units.end(), row.begin(), row.end());
  }
  return mask_units(std::move(rec), std::move(units), ratio, rng);
}

signal::Recording apply_time_mask(signal::Recording rec, double ratio, Rng& rng) {
  auto units = column_grid(0, rec.channels(), rec.time_samples());
  return mask_units(std::move(rec), std::move(units), ratio, rng);
}

signal::Recording apply_channel_mask(signal::Recording rec, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ConfigError("mask ratio must lie in [0, 1]");
  const auto n = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(rec.channels())));
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(rec.channels()));
  std::iota(rows.begin(), rows.end(), 0);
  std::shuffle(rows.begin(), rows.end(), rng);
  for (std::size_t i = 0; i < n; ++i) rec.samples.row(rows[i]).setConstant(kMaskValue);
  return rec;
}

signal::Recording inject_noise(signal::Recording rec, double snr_db, Rng& rng) {
  if (std::isinf(snr_db) && snr_db > 0) return rec;
  const double power = rec.samples.squaredNorm() / static_cast<double>(rec.samples.size());
  if (!(power > 0.0)) throw NumericError("SNR is undefined for a zero-power segment");
  const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
  std::normal_distribution<double> normal(0.0, sigma);
  for (Eigen::Index i = 0; i < rec.samples.size(); ++i) rec.samples.data()[i] += normal(rng);
  return rec;
}

std::pair<signal::Recording, data::ManifestEntry> shift_by(signal::Recording rec, data::ManifestEntry entry,
                                                             double delta_s) {
  if (!(delta_s >= 0.0)) throw ConfigError("shift must be non-negative");
  const double rate = rec.sample_rate_hz;
  const Eigen::Index window = rec.time_samples();
  const auto content = std::min(window, static_cast<Eigen::Index>(std::llround(entry.duration_s * rate)));
  const Eigen::Index room = window - content;
  const Eigen::Index shift = std::min(room, static_cast<Eigen::Index>(std::llround(delta_s * rate)));
  if (shift > 0) {
    signal::SampleMatrix moved = signal::SampleMatrix::Zero(rec.channels(), window);
    moved.rightCols(window - shift) = rec.samples.leftCols(window - shift);
    rec.samples = std::move(moved);
    const double applied = static_cast<double>(shift) / rate;
    for (auto& w : entry.word_spans) {
      w.start_s += applied;
      w.end_s += applied;
    }
  }
  return {std::move(rec), std::move(entry)};
}

std::pair<signal::Recording, data::ManifestEntry> shift_segment(signal::Recording rec, data::ManifestEntry entry,
                                                                  double max_shift_s, Rng& rng) {
  if (!(max_shift_s >= 0.0)) throw ConfigError("max_shift_s must be non-negative");
  std::uniform_real_distribution<double> uniform(0.0, max_shift_s);
  const double delta = max_shift_s > 0.0 ? uniform(rng) : 0.0;
  return shift_by(std::move(rec), std::move(entry), delta);
}

std::pair<signal::Recording, data::ManifestEntry> apply(signal::Recording rec, data::ManifestEntry entry,
                                                          const AugmentationSpec& spec, Rng& rng) {
  spec.validate();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (!(unit(rng) < spec.probability)) return {std::move(rec), std::move(entry)};
  switch (spec.kind) {
    case AugmentKind::time_mask: return {apply_time_mask(std::move(rec), spec.ratio, rng), std::move(entry)};
    case AugmentKind::channel_mask: return {apply_channel_mask(std::move(rec), spec.ratio, rng), std::move(entry)};
    case AugmentKind::block_mask: return {apply_block_mask(std::move(rec), spec.ratio, rng), std::move(entry)};
    case AugmentKind::noise: return {inject_noise(std::move(rec), spec.snr_db, rng), std::move(entry)};
    case AugmentKind::shift: return shift_segment(std::move(rec), std::move(entry), spec.max_shift_s, rng);
  }
  return {std::move(rec), std::move(entry)};
}

}  // namespace megtext::augment
