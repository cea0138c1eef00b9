// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "experiment.hpp"

namespace megtext::cli {

struct GlobalOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::filesystem::path> cache_dir;
};

/// Config plus resolved paths shared by every verb.
struct Context {
  LoadedConfig loaded;
  ExperimentConfig config;  // loaded config with flag overrides applied
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
};

Context make_context(const GlobalOptions& opts);

// Each command returns the process exit status.
int cmd_toy_gen(const Context& ctx, const std::optional<std::filesystem::path>& out_dir);
int cmd_preprocess(const Context& ctx);
int cmd_split(const Context& ctx);
int cmd_train(const Context& ctx, bool resume);

struct EvaluateOptions {
  std::optional<std::filesystem::path> checkpoint;  // default: <output>/run/checkpoints/best
  std::vector<std::string> modes;                   // default: free_run and tf
  std::optional<std::string> baseline;              // "noise"
};
int cmd_evaluate(const Context& ctx, const EvaluateOptions& opts);

enum class Sweep { scaling, augmentation, data_ratio, layers };
Sweep parse_sweep(std::string_view name);
std::string to_string(Sweep s);

struct AblateOptions {
  Sweep sweep = Sweep::data_ratio;
  std::vector<std::string> sizes;  // scaling
  std::vector<int> batches;        // scaling, paired with sizes
  std::vector<double> ratios;      // data_ratio
  std::vector<int> layers;         // layers: top-k trainable encoder blocks
  int epoch_cap = 0;               // 0 keeps train.max_epochs
};
int cmd_ablate(const Context& ctx, const AblateOptions& opts);

/// Grid used by the augmentation sweep when the config lists no augmentations.
std::vector<augment::AugmentationSpec> default_augmentation_grid(double window_s);

std::string describe(const augment::AugmentationSpec& s);

}  // namespace megtext::cli
