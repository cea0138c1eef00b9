// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "megtext/eval/generate.hpp"
#include "megtext/eval/metrics.hpp"
#include "megtext/train/dataset.hpp"

namespace megtext::eval {

inline constexpr int kReportSchemaVersion = 1;

struct Transcript {
  std::string reference;
  std::string hypothesis;
};

struct EvaluationReport {
  int schema_version = kReportSchemaVersion;
  std::string dataset;
  std::string mode = "free_run";
  std::string baseline = "none";
  std::string bleu_variant = kBleuVariant;
  std::array<double, 4> bleu{};
  RougeScore rouge1;
  double wer = 0.0;
  std::vector<Transcript> samples;
};

void to_json(nlohmann::json& j, const EvaluationReport& r);
void from_json(const nlohmann::json& j, EvaluationReport& r);

/// All metrics for paired transcripts.
EvaluationReport score_transcripts(const std::vector<std::string>& references,
                                   const std::vector<std::string>& hypotheses);

/// "Predicted: ...\nTrue: ...\n" blocks separated by blank lines.
std::string transcript_block(const EvaluationReport& r);

/// Writes `<stem>.json` and `<stem>.txt` under `dir`.
void write_report(const std::filesystem::path& dir, const std::string& stem, const EvaluationReport& r);
EvaluationReport read_report(const std::filesystem::path& json_path);

/// Decodes every example in the configured mode and scores the result.
EvaluationReport evaluate_corpus(const model::Seq2SeqModel& model, const train::Dataset& data,
                                 const GenerationConfig& cfg);

/// Unit-variance Gaussian noise of the same shape as each segment. Seeded by cfg.seed.
train::Dataset noise_dataset(const train::Dataset& data, std::uint64_t seed);

/// evaluate_corpus on noise_dataset(data), tagged baseline = "noise".
EvaluationReport noise_baseline(const model::Seq2SeqModel& model, const train::Dataset& data,
                                const GenerationConfig& cfg);

struct ProbeResult {
  double accuracy = 0.0;
  double chance = 0.0;
  double ratio = 0.0;
  std::size_t clips = 0;
  std::size_t correct = 0;
  std::size_t vocabulary = 0;
};

void to_json(nlohmann::json& j, const ProbeResult& r);

/// Free-run decodes single-word clips; a clip counts when the normalized
/// hypothesis equals its word. Chance is 1 / |vocabulary|.
ProbeResult word_probe_eval(const model::Seq2SeqModel& model, const train::Dataset& clips,
                            const std::vector<std::string>& vocabulary, const GenerationConfig& cfg);

}  // namespace megtext::eval
