// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "megtext/augment/augmentation.hpp"
#include "megtext/data/split.hpp"
#include "megtext/data/toy.hpp"
#include "megtext/eval/generate.hpp"
#include "megtext/model/adapter.hpp"
#include "megtext/signal/preprocess.hpp"
#include "megtext/train/dataset.hpp"
#include "megtext/train/trainer.hpp"

namespace megtext::cli {

struct ToySection {
  int sentences = 20;
  int repeats = 30;
  int channels = 8;
  double rate_hz = 1000.0;
  std::uint64_t seed = 7;
  data::ToyOptions options;
};

struct DatasetSection {
  std::optional<std::string> manifest;  // jsonl path; relative to the config file
  std::optional<ToySection> toy;        // synthesized in memory when set
  data::SplitSpec split;
};

struct ExperimentConfig {
  DatasetSection dataset;
  signal::PreprocessConfig preprocess;
  std::vector<augment::AugmentationSpec> augmentation;
  model::AdaptedModelSpec model;
  train::TrainConfig train;
  eval::GenerationConfig eval;
  std::string output_dir = "runs/experiment";

  /// Overrides every training, model and decoding seed.
  void set_seed(std::uint64_t seed);
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Every section is validated; unknown keys anywhere are rejected.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct LoadedConfig {
  ExperimentConfig config;
  std::string text;               // file contents, verbatim
  std::filesystem::path base_dir; // directory of the config file
};

LoadedConfig load_config(const std::filesystem::path& path);

/// Entries plus a way to read their recordings.
struct Corpus {
  std::optional<data::ToyCorpus> toy;
  std::filesystem::path manifest_dir;
  std::vector<data::ManifestEntry> entries;

  train::RecordingSource source() const;
};

Corpus load_corpus(const ExperimentConfig& cfg, const std::filesystem::path& base_dir);

}  // namespace megtext::cli
