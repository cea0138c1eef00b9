// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace megtext::eval {

using Words = std::vector<std::string>;

/// Smoothing constant added to zero n-gram match counts.
inline constexpr double kBleuEpsilon = 0.1;
inline constexpr const char* kBleuVariant = "sentence-bleu/uniform-weights-to-hyp-length/brevity-penalty/add-eps-0.1/corpus-mean";

/// Sentence BLEU in [0, 1] over already tokenized words.
double sentence_bleu(const Words& reference, const Words& hypothesis, int n);

/// Mean sentence BLEU-n over the corpus, as a percentage. Texts are normalized
/// (lowercase, punctuation stripped) and split on whitespace.
double bleu_n(const std::vector<std::string>& references, const std::vector<std::string>& hypotheses, int n);

struct RougeScore {
  double f = 0.0, p = 0.0, r = 0.0;
};

/// Clipped unigram overlap, averaged per sentence, in percent.
RougeScore rouge1(const std::vector<std::string>& references, const std::vector<std::string>& hypotheses);

/// Word-level Levenshtein distance with unit costs.
std::size_t edit_distance(const Words& reference, const Words& hypothesis);

/// Corpus WER: total edits over total reference words, in percent.
double wer(const std::vector<std::string>& references, const std::vector<std::string>& hypotheses);

}  // namespace megtext::eval
