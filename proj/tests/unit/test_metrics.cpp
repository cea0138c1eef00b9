// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>

#include "megtext/data/text.hpp"
#include "megtext/eval/metrics.hpp"
#include "megtext/eval/report.hpp"
#include "support/oracles.hpp"

using namespace megtext;
using eval::Words;

namespace {

nlohmann::json fixture() {
  std::ifstream in(std::filesystem::path(MEGTEXT_TEST_DATA_DIR) / "metric_fixture.json");
  return nlohmann::json::parse(in);
}

void expect_rel(double got, double want, const std::string& what) {
  EXPECT_LE(std::abs(got - want), 1e-6 * std::max(1.0, std::abs(want))) << what << " got " << got << " want " << want;
}

// Naive recursion without memoisation.
std::size_t recursive_distance(const Words& a, std::size_t i, const Words& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  if (a[i] == b[j]) return recursive_distance(a, i + 1, b, j + 1);
  return 1 + std::min({recursive_distance(a, i + 1, b, j), recursive_distance(a, i, b, j + 1),
                       recursive_distance(a, i + 1, b, j + 1)});
}

std::vector<Words> all_sequences(int max_len) {
  std::vector<Words> out{{}};
  std::vector<Words> frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<Words> next;
    for (const auto& w : frontier)
      for (const char* s : {"a", "b", "c"}) {
        auto x = w;
        x.push_back(s);
        next.push_back(x);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}


}  // namespace

TEST(EditDistance, ExhaustiveAgainstMatrixOracle) {
  const auto seqs = all_sequences(6);
  ASSERT_EQ(seqs.size(), 1093u);
  for (const auto& a : seqs)
    for (const auto& b : seqs) ASSERT_EQ(eval::edit_distance(a, b), oracle::dp_edit_distance(a, b));
}

TEST(EditDistance, ShortPairsAgainstRecursion) {
  const auto seqs = all_sequences(4);
  for (const auto& a : seqs)
    for (const auto& b : seqs) ASSERT_EQ(eval::edit_distance(a, b), recursive_distance(a, 0, b, 0));
}

TEST(Wer, PooledOverCorpus) {
  EXPECT_DOUBLE_EQ(eval::wer({"a b c d", "e f"}, {"a x c d", "e"}), 100.0 * 2 / 6);
  EXPECT_DOUBLE_EQ(eval::wer({"a"}, {"b c d"}), 300.0);
}

TEST(Bleu, MatchesFixture) {
  const auto f = fixture();
  std::vector<std::string> refs, hyps;
  for (const auto& p : f.at("pairs")) {
    const auto ref = p.at("reference").get<std::string>(), hyp = p.at("hypothesis").get<std::string>();
    refs.push_back(ref);
    hyps.push_back(hyp);
    for (int n = 1; n <= 4; ++n)
      expect_rel(eval::sentence_bleu(data::split_words(ref), data::split_words(hyp), n),
                 p.at("bleu")[static_cast<std::size_t>(n - 1)].get<double>(), ref + " | " + hyp);
  }
  for (int n = 1; n <= 4; ++n)
    expect_rel(eval::bleu_n(refs, hyps, n), f.at("corpus").at("bleu")[static_cast<std::size_t>(n - 1)].get<double>(),
               "corpus BLEU-" + std::to_string(n));
}

TEST(Rouge, MatchesFixture) {
  const auto f = fixture();
  std::vector<std::string> refs, hyps;
  for (const auto& p : f.at("pairs")) {
    refs.push_back(p.at("reference"));
    hyps.push_back(p.at("hypothesis"));
    const auto one = eval::rouge1({refs.back()}, {hyps.back()});
    expect_rel(one.p, 100.0 * p.at("rouge1").at("p").get<double>(), "p");
    expect_rel(one.r, 100.0 * p.at("rouge1").at("r").get<double>(), "r");
    expect_rel(one.f, 100.0 * p.at("rouge1").at("f").get<double>(), "f");
  }
  const auto all = eval::rouge1(refs, hyps);
  expect_rel(all.f, f.at("corpus").at("rouge1").at("f").get<double>(), "corpus f");
  expect_rel(all.p, f.at("corpus").at("rouge1").at("p").get<double>(), "corpus p");
  expect_rel(all.r, f.at("corpus").at("rouge1").at("r").get<double>(), "corpus r");
}

TEST(Metrics, IdentityCorpus) {
  const std::vector<std::string> refs{"the cat sat", "a b c d e", "hello"};
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(eval::bleu_n(refs, refs, n), 100.0, 1e-9);
  EXPECT_NEAR(eval::rouge1(refs, refs).f, 100.0, 1e-9);
  EXPECT_DOUBLE_EQ(eval::wer(refs, refs), 0.0);
}

TEST(Metrics, EmptyHypothesisScoresZero) {
  EXPECT_DOUBLE_EQ(eval::sentence_bleu({"a", "b"}, {}, 1), 0.0);
  EXPECT_DOUBLE_EQ(eval::rouge1({"a b"}, {""}).f, 0.0);
  EXPECT_DOUBLE_EQ(eval::wer({"a b"}, {""}), 100.0);
}

TEST(Metrics, NormalizationAppliedBeforeScoring) {
  EXPECT_NEAR(eval::bleu_n({"The cat, sat."}, {"the cat sat"}, 4), 100.0, 1e-9);
}

TEST(Report, TranscriptBlockAndJson) {
  const auto r = eval::score_transcripts({"a b", "c d"}, {"a b", "c"});
  EXPECT_EQ(r.samples.size(), 2u);
  const auto block = eval::transcript_block(r);
  EXPECT_NE(block.find("Predicted: a b\nTrue: a b\n"), std::string::npos);
  nlohmann::json j = r;
  EXPECT_EQ(j.at("schema_version"), eval::kReportSchemaVersion);
  const auto back = j.get<eval::EvaluationReport>();
  EXPECT_DOUBLE_EQ(back.bleu[0], r.bleu[0]);
  EXPECT_DOUBLE_EQ(back.wer, r.wer);
}
