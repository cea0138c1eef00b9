// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace megtext::model {

/// Decoder inputs and next-token targets for a batch of transcripts. Each row is
/// prompt + words, padded with end-of-text; targets are -1 on prompt positions
/// and padding so the loss covers the words and the closing end-of-text.
struct TokenBatch {
  std::vector<int> inputs;
  std::vector<int> targets;
  int batch = 0;
  int length = 0;
};

TokenBatch make_token_batch(const std::vector<std::vector<int>>& words, const std::vector<int>& language_tokens);

}  // namespace megtext::model
