// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace megtext::data {

struct WordSpan {
  std::string word;
  double start_s = 0.0;  // relative to the sentence start
  double end_s = 0.0;
};

/// One sentence-recording pair. Times in `start_s`/`end_s` index the continuous
/// recording at `signal_path`; word spans are relative to `start_s`.
struct ManifestEntry {
  std::string signal_path;
  double signal_rate_hz = 0.0;
  double duration_s = 0.0;
  std::string language = "English";
  std::string sentence;
  std::vector<WordSpan> word_spans;
  std::string subject_id;
  std::string session_id;
  std::string story_id;
  double start_s = 0.0;
  double end_s = 0.0;

  std::string speech_path;      // optional paired audio
  double speech_rate_hz = 0.0;
  nlohmann::json extra = nlohmann::json::object();  // unconsumed keys, written back verbatim

  void validate() const;
};

inline constexpr double kTimeToleranceS = 1e-3;

/// Parses one manifest line. Field names follow the jsonl layout used by the
/// original data release: speech/eeg/duration/language/sentence/sentences/subj/
/// session/story/start/end. Word times are normalized to be relative to the
/// sentence start (via audio_start when present).
ManifestEntry parse_manifest_line(std::string_view line, std::size_t line_no);

/// Blank lines are skipped; any other malformed line throws ParseError with its number.
std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path);

nlohmann::json manifest_json(const ManifestEntry& entry);
std::string serialize_manifest_line(const ManifestEntry& entry);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Resolves a relative signal path against the manifest's directory.
std::filesystem::path resolve_signal_path(const ManifestEntry& entry, const std::filesystem::path& manifest_dir);

}  // namespace megtext::data
