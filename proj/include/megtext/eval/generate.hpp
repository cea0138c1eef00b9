// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "megtext/model/seq2seq.hpp"

namespace megtext::eval {

enum class DecodeMode { free_run, teacher_forcing };

std::string to_string(DecodeMode m);
/// Accepts "free_run", "teacher_forcing" and "tf".
DecodeMode parse_decode_mode(std::string_view name);

struct GenerationConfig {
  int beam_size = 5;
  double repetition_penalty = 5.0;  // 1 disables
  int no_repeat_ngram = 2;          // 0 disables
  int max_new_tokens = 24;
  double length_penalty = 1.0;
  DecodeMode mode = DecodeMode::free_run;
  std::optional<double> top_p;  // nucleus sampling instead of beam search
  std::uint64_t seed = 0;

  void validate() const;
};

void to_json(nlohmann::json& j, const GenerationConfig& c);
void from_json(const nlohmann::json& j, GenerationConfig& c);

/// Logit processing shared by beam search and sampling: repetition penalty on
/// tokens already generated (positive logits divided, negative multiplied),
/// prompt-only special tokens suppressed, and bans on tokens that would repeat
/// an n-gram of `sequence`.
void process_logits(Eigen::Ref<nn::RowVec> logits, const std::vector<int>& sequence, std::size_t prompt_len,
                    const GenerationConfig& cfg);

/// Free-running decode of one segment; returns generated token ids without
/// prompt or end-of-text. The reference transcript is never consulted.
std::vector<int> generate_tokens(const model::Seq2SeqModel& model, const nn::Mat& input, int language_token,
                                 const GenerationConfig& cfg, std::mt19937_64& rng);

std::vector<std::string> generate(const model::Seq2SeqModel& model, const std::vector<nn::Mat>& segments,
                                  const std::vector<int>& language_tokens, const GenerationConfig& cfg);

/// Argmax at each position given the gold prefix, cut at the first end-of-text.
std::vector<int> teacher_force_tokens(const model::Seq2SeqModel& model, const nn::Mat& input, int language_token,
                                      const std::vector<int>& reference);

std::vector<std::string> teacher_force_decode(const model::Seq2SeqModel& model, const std::vector<nn::Mat>& segments,
                                              const std::vector<int>& language_tokens,
                                              const std::vector<std::string>& references);

}  // namespace megtext::eval
