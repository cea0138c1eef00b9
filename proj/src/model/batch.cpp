// SPDX-License-Identifier: Apache-2.0
#include "megtext/model/batch.hpp"

#include <algorithm>

#include "megtext/error.hpp"
#include "megtext/model/tokenizer.hpp"

namespace megtext::model {

TokenBatch make_token_batch(const std::vector<std::vector<int>>& words, const std::vector<int>& language_tokens) {
  if (words.empty() || words.size() != language_tokens.size()) throw ConfigError("token batch size mismatch");
  constexpr int kPrompt = 4;
  std::size_t longest = 0;
  for (const auto& w : words) longest = std::max(longest, w.size());
  TokenBatch tb;
  tb.batch = static_cast<int>(words.size());
  tb.length = kPrompt + static_cast<int>(longest);
  tb.inputs.assign(static_cast<std::size_t>(tb.batch * tb.length), Tokenizer::kEndOfText);
  tb.targets.assign(tb.inputs.size(), -1);
  for (int b = 0; b < tb.batch; ++b) {
    const auto& w = words[static_cast<std::size_t>(b)];
    std::vector<int> seq{Tokenizer::kStartOfTranscript, language_tokens[static_cast<std::size_t>(b)],
                         Tokenizer::kTranscribe, Tokenizer::kNoTimestamps};
    seq.insert(seq.end(), w.begin(), w.end());
    seq.push_back(Tokenizer::kEndOfText);
    const std::size_t row = static_cast<std::size_t>(b * tb.length);
    for (int i = 0; i < tb.length && i < static_cast<int>(seq.size()); ++i) tb.inputs[row + i] = seq[static_cast<std::size_t>(i)];
    for (int i = kPrompt - 1; i + 1 < static_cast<int>(seq.size()); ++i) tb.targets[row + i] = seq[static_cast<std::size_t>(i + 1)];
  }
  return tb;
}

}  // namespace megtext::model
