// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <string_view>
#include <vector>

namespace megtext::model {

/// Word-level vocabulary with Whisper-style special tokens at the front.
class Tokenizer {
 public:
  static constexpr int kEndOfText = 0;
  static constexpr int kStartOfTranscript = 1;
  static constexpr int kEnglish = 2;
  static constexpr int kDutch = 3;
  static constexpr int kTranscribe = 4;
  static constexpr int kNoTimestamps = 5;
  static constexpr int kUnknown = 6;
  static constexpr int kSpecialCount = 7;

  Tokenizer() = default;
  explicit Tokenizer(const std::vector<std::string>& words);

  int vocab_size() const { return static_cast<int>(tokens_.size()); }
  int word_count() const { return vocab_size() - kSpecialCount; }
  const std::string& token(int id) const;
  int id(std::string_view word) const;  // kUnknown when absent
  bool is_special(int id) const { return id < kSpecialCount; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Words of normalize_text(text) mapped to ids, no specials.
  std::vector<int> encode(std::string_view text) const;
  /// Space-joined words; special tokens are skipped.
  std::string decode(const std::vector<int>& ids) const;

  /// Language tag token for "English"/"Dutch" (case-insensitive, also "en"/"nl").
  static int language_token(std::string_view language);
  /// [sot, language, transcribe, notimestamps].
  static std::vector<int> prompt(std::string_view language);

  friend void to_json(nlohmann::json& j, const Tokenizer& t);
  friend void from_json(const nlohmann::json& j, Tokenizer& t);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

}  // namespace megtext::model
