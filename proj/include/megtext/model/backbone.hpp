// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "megtext/model/seq2seq.hpp"

namespace megtext::model {

/// A named speech encoder-decoder. "whisper-*" entries reproduce the published
/// architecture sizes with seeded random weights; "desk-*" entries are small
/// backbones pretrained on synthetic acoustic word sequences and cached on disk.
struct BackboneHandle {
  std::string identifier;
  int encoder_frame_capacity = 0;
  std::shared_ptr<const Tokenizer> vocabulary;
  std::string language_tag = "English";
  ModelDims dims;
  bool pretrained = false;

  void validate() const;
};

/// Registered identifiers, smallest first within each family.
std::vector<std::string> backbone_identifiers();
BackboneHandle backbone_handle(std::string_view identifier, std::string language = "English");

struct PretrainConfig {
  int steps = 1500;
  int batch_size = 32;
  float learning_rate = 1e-3f;
  double empty_fraction = 0.15;  // noise-only examples transcribed as nothing
  double noise_std = 0.3;
  int max_words = 6;
  std::uint64_t seed = 1234;
};

void to_json(nlohmann::json& j, const PretrainConfig& c);

/// One synthetic acoustic example: (input_window x stem_channels) features and its word ids.
struct AcousticExample {
  nn::Mat features;
  std::vector<int> words;
  int language_token = Tokenizer::kEnglish;
};
AcousticExample synth_acoustic_example(const ModelDims& dims, const Tokenizer& tok, const PretrainConfig& cfg,
                                       std::mt19937_64& rng);

/// Trains every backbone weight on synthetic acoustic data; returns the final mean loss.
double pretrain_backbone(Seq2SeqModel& model, const PretrainConfig& cfg);

/// $MEGTEXT_CACHE, else $HOME/.cache/megtext, else ./.megtext-cache.
std::filesystem::path default_backbone_cache();

/// Builds the backbone. Pretrained backbones are loaded from `cache_dir` when
/// present, otherwise pretrained and written there.
Seq2SeqModel load_backbone(const BackboneHandle& handle, const std::filesystem::path& cache_dir,
                           const PretrainConfig& cfg = {});

}  // namespace megtext::model
