// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "megtext/augment/augmentation.hpp"
#include "megtext/eval/generate.hpp"
#include "megtext/model/adapter.hpp"
#include "megtext/nn/optim.hpp"
#include "megtext/train/dataset.hpp"

namespace megtext::train {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int max_epochs = 500;
  int patience_epochs = 5;
  double data_ratio = 1.0;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  int warmup_steps = 100;
  double max_grad_norm = 1.0;

  void validate() const;
  nn::AdamWConfig optimizer() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct RunState {
  int epoch = 0;
  double train_loss = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> train_loss_history;
  std::vector<double> eval_loss_history;
  int best_epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  bool stopped_early = false;
  long steps = 0;
};

void to_json(nlohmann::json& j, const RunState& s);
void from_json(const nlohmann::json& j, RunState& s);

/// Patience counter over 1-indexed epochs. Only a strictly lower loss counts as
/// an improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience);
  /// Records the next epoch's loss; returns true when training should stop.
  bool update(double loss);
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }
  int epochs() const { return epoch_; }
  bool improved_last() const { return best_epoch_ == epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct TrainOptions {
  std::vector<augment::AugmentationSpec> augmentations;  // training batches only
  std::optional<std::filesystem::path> run_dir;
  nlohmann::json config_snapshot;        // written verbatim as config.json when set
  model::AdaptedModelSpec model_spec;    // stored with checkpoints
  bool resume = false;                   // continue from run_dir/checkpoints/last
  std::function<void(const RunState&)> on_epoch;
};

/// Token-weighted mean cross-entropy over a dataset.
double evaluate_loss(const model::Seq2SeqModel& model, const Dataset& data, int batch_size);

/// Trains the trainable parameters with early stopping on validation loss. On
/// return the model holds the best epoch's weights.
RunState train(model::Seq2SeqModel& model, const Dataset& train_set, const Dataset& val_set, const TrainConfig& cfg,
               const TrainOptions& options = {});

struct TrainOutcome {
  model::Seq2SeqModel model;
  RunState state;
  std::vector<double> per_dataset_val_loss;
};

/// Reloads a checkpoint and continues training on new data with a fresh
/// optimizer. Data with fewer channels than the frontend is zero-padded when
/// `allow_padding`; any other mismatch is an error.
TrainOutcome finetune_from(const std::filesystem::path& checkpoint_dir, const std::filesystem::path& cache_dir,
                           Dataset train_set, Dataset val_set, const TrainConfig& cfg, TrainOptions options = {},
                           bool allow_padding = true);

struct JointDataset {
  Dataset train;
  Dataset val;
};

/// Pads every dataset to the widest channel count and trains one model on the pooled data.
TrainOutcome joint_train(std::vector<JointDataset> datasets, model::AdaptedModelSpec spec,
                         const std::filesystem::path& cache_dir, const TrainConfig& cfg, TrainOptions options = {});

/// Positions of a uniform subsample of size round(ratio * n), in input order.
/// Smaller ratios with the same seed select subsets of larger ones.
std::vector<std::size_t> subsample_indices(std::size_t n, double ratio, std::uint64_t seed);
Dataset subsample_data_ratio(const Dataset& data, double ratio, std::uint64_t seed);

struct SweepRow {
  std::string setting;
  double bleu1 = 0.0;
  int effective_epochs = 0;
  std::string error;  // empty when the run succeeded
};

/// One run per backbone size with its batch size, capped at epoch_cap epochs;
/// BLEU-1 is measured on eval_set. Failures are recorded and the sweep continues.
std::vector<SweepRow> scaling_sweep(const std::vector<std::string>& sizes, const std::vector<int>& batch_sizes,
                                    const Dataset& train_set, const Dataset& val_set, const Dataset& eval_set,
                                    int epoch_cap, const TrainConfig& cfg, const model::AdaptedModelSpec& spec,
                                    const eval::GenerationConfig& gen, const std::filesystem::path& cache_dir);

}  // namespace megtext::train
