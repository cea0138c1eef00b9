// SPDX-License-Identifier: Apache-2.0
#include "megtext/model/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <nlohmann/json.hpp>

#include "megtext/data/text.hpp"
#include "megtext/error.hpp"

namespace megtext::model {

namespace {
const std::vector<std::string> kSpecials = {"<|endoftext|>",  "<|startoftranscript|>", "<|en|>", "<|nl|>",
                                            "<|transcribe|>", "<|notimestamps|>",      "<|unk|>"};
}

Tokenizer::Tokenizer(const std::vector<std::string>& words) : tokens_(kSpecials) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<int>(i));
  for (const auto& w : words) {
    const std::string norm = data::normalize_text(w);
    if (norm.empty() || norm.find(' ') != std::string::npos)
      throw ConfigError("tokenizer word must be a single non-empty token: '" + w + "'");
    if (index_.count(norm)) continue;
    index_.emplace(norm, static_cast<int>(tokens_.size()));
    tokens_.push_back(norm);
  }
}

const std::string& Tokenizer::token(int id) const {
  if (id < 0 || id >= vocab_size()) throw RangeError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

int Tokenizer::id(std::string_view word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : data::split_words(text)) ids.push_back(id(w));
  return ids;
}

std::string Tokenizer::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int i : ids) {
    if (is_special(i)) continue;
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

int Tokenizer::language_token(std::string_view language) {
  std::string l(language);
  std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
  if (l == "english" || l == "en") return kEnglish;
  if (l == "dutch" || l == "nl") return kDutch;
  throw ConfigError("unsupported language '" + std::string(language) + "'");
}

std::vector<int> Tokenizer::prompt(std::string_view language) {
  return {kStartOfTranscript, language_token(language), kTranscribe, kNoTimestamps};
}

void to_json(nlohmann::json& j, const Tokenizer& t) {
  j = std::vector<std::string>(t.tokens_.begin() + Tokenizer::kSpecialCount, t.tokens_.end());
}

void from_json(const nlohmann::json& j, Tokenizer& t) { t = Tokenizer(j.get<std::vector<std::string>>()); }

}  // namespace megtext::model
