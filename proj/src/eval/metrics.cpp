// SPDX-License-Identifier: Apache-2.0
#include "megtext/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "megtext/data/text.hpp"
#include "megtext/error.hpp"

namespace megtext::eval {

namespace {

void check_pairs(const std::vector<std::string>& refs, const std::vector<std::string>& hyps) {
  if (refs.empty()) throw ConfigError("empty corpus");
  if (refs.size() != hyps.size()) throw ConfigError("references and hypotheses differ in length");
}

std::map<Words, std::size_t> ngram_counts(const Words& w, int n) {
  std::map<Words, std::size_t> counts;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= w.size(); ++i)
    ++counts[Words(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

std::size_t clipped_matches(const Words& ref, const Words& hyp, int n) {
  const auto rc = ngram_counts(ref, n);
  std::size_t m = 0;
  for (const auto& [g, c] : ngram_counts(hyp, n)) {
    auto it = rc.find(g);
    if (it != rc.end()) m += std::min(c, it->second);
  }
  return m;
}

}  // namespace

double sentence_bleu(const Words& reference, const Words& hypothesis, int n) {
  if (n < 1) throw ConfigError("BLEU order must be >= 1");
  if (hypothesis.empty()) return 0.0;
  if (clipped_matches(reference, hypothesis, 1) == 0) return 0.0;
  // Orders longer than the hypothesis are dropped and the weights renormalized.
  n = std::min<int>(n, static_cast<int>(hypothesis.size()));
  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double matches = static_cast<double>(clipped_matches(reference, hypothesis, k));
    const double total = static_cast<double>(
        std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(hypothesis.size()) - k + 1));
    const double p = (matches > 0 ? matches : kBleuEpsilon) / total;
    log_sum += std::log(p) / n;
  }
  const double c = static_cast<double>(hypothesis.size());
  const double r = static_cast<double>(reference.size());
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum);
}

double bleu_n(const std::vector<std::string>& references, const std::vector<std::string>& hypotheses, int n) {
  check_pairs(references, hypotheses);
  double sum = 0.0;
  for (std::size_t i = 0; i < references.size(); ++i)
    sum += sentence_bleu(data::split_words(references[i]), data::split_words(hypotheses[i]), n);
  return 100.0 * sum / static_cast<double>(references.size());
}

RougeScore rouge1(const std::vector<std::string>& references, const std::vector<std::string>& hypotheses) {
  check_pairs(references, hypotheses);
  RougeScore s;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const Words ref = data::split_words(references[i]);
    const Words hyp = data::split_words(hypotheses[i]);
    const double m = static_cast<double>(clipped_matches(ref, hyp, 1));
    const double p = hyp.empty() ? 0.0 : m / static_cast<double>(hyp.size());
    const double r = ref.empty() ? 0.0 : m / static_cast<double>(ref.size());
    s.p += p;
    s.r += r;
    s.f += p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
  }
  const double n = static_cast<double>(references.size());
  return {100.0 * s.f / n, 100.0 * s.p / n, 100.0 * s.r / n};
}

std::size_t edit_distance(const Words& reference, const Words& hypothesis) {
  std::vector<std::size_t> prev(hypothesis.size() + 1), cur(hypothesis.size() + 1);
  for (std::size_t j = 0; j <= hypothesis.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= reference.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hypothesis.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hypothesis.size()];
}

double wer(const std::vector<std::string>& references, const std::vector<std::string>& hypotheses) {
  if (references.size() != hypotheses.size()) throw ConfigError("references and hypotheses differ in length");
  std::size_t edits = 0, words = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const Words ref = data::split_words(references[i]);
    edits += edit_distance(ref, data::split_words(hypotheses[i]));
    words += ref.size();
  }
  if (words == 0) throw ConfigError("WER undefined for zero reference words");
  return 100.0 * static_cast<double>(edits) / static_cast<double>(words);
}

}  // namespace megtext::eval
