// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <set>
#include <string>
#include <vector>

#include "megtext/model/backbone.hpp"
#include "megtext/nn/adalora.hpp"
#include "megtext/signal/recording.hpp"

namespace megtext::model {

struct FrontendConfig {
  int in_channels = 208;
  int d_model = 512;
  int kernel = 3;
  int stride1 = 1;
  int stride2 = 2;
  int padding = 1;

  void validate() const;
};

void to_json(nlohmann::json& j, const FrontendConfig& c);
void from_json(const nlohmann::json& j, FrontendConfig& c);

/// Two-convolution channel adapter, [T x in_channels] -> [ceil(T/2) x d_model].
InputStem build_frontend(const FrontendConfig& cfg, std::uint64_t seed);

/// Replaces the backbone's input stem by `frontend`. The frontend must match the
/// backbone width and map `window_samples` onto exactly the encoder frame capacity.
void graft(Seq2SeqModel& model, InputStem frontend, int window_samples);

/// Appends zero channels up to `target_channels`.
signal::Recording pad_channels(const signal::Recording& rec, int target_channels);

struct TrainabilityPlan {
  std::set<std::string> frozen{"decoder"};
  std::set<std::string> adapted{"encoder", "frontend"};
  int adapter_rank_budget = 8;  // average singular values kept per adapted matrix
  nn::AdaLoraConfig adalora;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainabilityPlan& p);
void from_json(const nlohmann::json& j, TrainabilityPlan& p);

/// Group of a parameter name: "frontend", "stem", "encoder" or "decoder".
std::string parameter_group(const std::string& name);

/// Freezes every base weight, makes the frontend fully trainable and attaches
/// low-rank adapters to the encoder attention and MLP projections.
void plan_trainability(Seq2SeqModel& model, const TrainabilityPlan& plan, std::uint64_t seed);

/// Keeps adapters trainable only in the top `k` encoder blocks; the frontend stays trainable.
void freeze_layers_except_top_k(Seq2SeqModel& model, int k);

std::vector<nn::ParamPtr> trainable_parameters(const Seq2SeqModel& model);
std::vector<std::shared_ptr<nn::LowRankAdapter>> model_adapters(const Seq2SeqModel& model, bool trainable_only);

/// Everything needed to rebuild an adapted model on top of a backbone.
struct AdaptedModelSpec {
  std::string backbone = "desk-tiny";
  std::string language = "English";
  FrontendConfig frontend;
  TrainabilityPlan plan;
  int trainable_top_k = -1;  // -1: every encoder block
  std::uint64_t seed = 0;
};

void to_json(nlohmann::json& j, const AdaptedModelSpec& s);
void from_json(const nlohmann::json& j, AdaptedModelSpec& s);

/// Backbone + frontend + plan. `frontend.d_model` is taken from the backbone when 0.
Seq2SeqModel build_adapted_model(AdaptedModelSpec spec, const std::filesystem::path& cache_dir);

/// Writes frontend and adapter weights plus `checkpoint.json` (spec, backbone id, extra).
void save_checkpoint(const std::filesystem::path& dir, const Seq2SeqModel& model, const AdaptedModelSpec& spec,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedCheckpoint {
  AdaptedModelSpec spec;
  nlohmann::json extra;
  std::unique_ptr<Seq2SeqModel> model;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir, const std::filesystem::path& cache_dir);

}  // namespace megtext::model
