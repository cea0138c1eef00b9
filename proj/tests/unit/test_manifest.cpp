// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "megtext/data/manifest.hpp"
#include "megtext/data/segment.hpp"
#include "megtext/data/split.hpp"
#include "megtext/data/text.hpp"
#include "megtext/data/toy.hpp"
#include "megtext/error.hpp"

using namespace megtext;
namespace fs = std::filesystem;

namespace {

std::string read_first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::vector<data::ManifestEntry> synthetic_pairs(std::size_t n) {
  std::vector<data::ManifestEntry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& e = out[i];
    e.signal_path = "rec" + std::to_string(i % 7) + ".npy";
    e.signal_rate_hz = 200;
    e.duration_s = e.end_s = 1.0;
    e.sentence = "sentence " + std::to_string(i % 997);
    e.subject_id = std::to_string(i % 5);
    e.session_id = std::to_string(i % 2);
    e.story_id = "story" + std::to_string(i % 4);
  }
  return out;
}

std::set<std::string> sentence_set(const std::vector<data::ManifestEntry>& v) {
  std::set<std::string> s;
  for (const auto& e : v) s.insert(data::sentence_key(e));
  return s;
}

}  // namespace

TEST(Manifest, ParsesReferenceExampleLine) {
  const auto e = data::parse_manifest_line(read_first_line(fs::path(MEGTEXT_TEST_DATA_DIR) / "example_line.jsonl"), 1);
  EXPECT_EQ(e.sentence, "Although the concept was a simple one Allan thought it had potential");
  EXPECT_EQ(e.subject_id, "21");
  EXPECT_EQ(e.session_id, "0");
  EXPECT_EQ(e.story_id, "The_Black_Willow");
  EXPECT_DOUBLE_EQ(e.signal_rate_hz, 200.0);
  EXPECT_NEAR(e.duration_s, 3.7, 1e-9);
  EXPECT_NEAR(e.start_s, 92.824, 1e-9);
  ASSERT_EQ(e.word_spans.size(), 12u);
  EXPECT_EQ(e.word_spans.front().word, "Although");
  EXPECT_NEAR(e.word_spans.front().start_s, 0.0, 1e-9);
  EXPECT_NEAR(e.word_spans.back().end_s, 3.7, 1e-9);
  EXPECT_EQ(e.extra.at("voice"), "Samantha");
}

TEST(Manifest, SerializeParsePreservesConsumedFields) {
  const auto e = data::parse_manifest_line(read_first_line(fs::path(MEGTEXT_TEST_DATA_DIR) / "example_line.jsonl"), 1);
  const auto back = data::parse_manifest_line(data::serialize_manifest_line(e), 1);
  EXPECT_EQ(back.sentence, e.sentence);
  EXPECT_EQ(back.signal_path, e.signal_path);
  EXPECT_EQ(back.subject_id, e.subject_id);
  EXPECT_EQ(back.session_id, e.session_id);
  EXPECT_EQ(back.story_id, e.story_id);
  EXPECT_EQ(back.speech_path, e.speech_path);
  EXPECT_DOUBLE_EQ(back.start_s, e.start_s);
  EXPECT_DOUBLE_EQ(back.end_s, e.end_s);
  ASSERT_EQ(back.word_spans.size(), e.word_spans.size());
  for (std::size_t i = 0; i < e.word_spans.size(); ++i) {
    EXPECT_EQ(back.word_spans[i].word, e.word_spans[i].word);
    EXPECT_NEAR(back.word_spans[i].start_s, e.word_spans[i].start_s, 1e-12);
  }
  EXPECT_EQ(back.extra, e.extra);
}

TEST(Manifest, EmptyFileGivesNoEntries) {
  const auto p = fs::temp_directory_path() / "megtext_empty.jsonl";
  std::ofstream(p).close();
  EXPECT_TRUE(data::parse_manifest(p).empty());
  fs::remove(p);
}

TEST(Manifest, MissingSentenceNamesField) {
  auto line = read_first_line(fs::path(MEGTEXT_TEST_DATA_DIR) / "example_line.jsonl");
  auto j = nlohmann::json::parse(line);
  j.erase("sentence");
  try {
    data::parse_manifest_line(j.dump(), 4);
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("sentence"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos);
  }
}

TEST(Manifest, MalformedLineCarriesLineNumber) {
  try {
    data::parse_manifest_line("{not json", 7);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find('7'), std::string::npos);
  }
}

TEST(Segment, WindowArithmetic) {
  signal::Recording rec{signal::SampleMatrix::Random(3, 2000), 200.0, {}};
  data::ManifestEntry e;
  e.start_s = 1.0;
  e.end_s = 4.7;
  e.duration_s = 3.7;
  auto seg = data::segment_recording(rec, e);
  EXPECT_EQ(seg.time_samples(), 740);
  EXPECT_EQ(seg.channels(), 3);
  EXPECT_TRUE((seg.samples.array() == rec.samples.middleCols(200, 740).array()).all());

  e.start_s = 0.0;
  e.end_s = e.duration_s = 10.0;
  EXPECT_TRUE((data::segment_recording(rec, e).samples.array() == rec.samples.array()).all());

  e.start_s = e.end_s = 2.0;
  EXPECT_ANY_THROW(data::segment_recording(rec, e));
  e.start_s = 9.0;
  e.end_s = 11.0;
  EXPECT_THROW(data::segment_recording(rec, e), RangeError);
}

TEST(Split, LargestRemainderCounts) {
  EXPECT_EQ(data::largest_remainder(29174, {8, 1, 1}), (std::vector<std::size_t>{23339, 2917, 2918}));
  EXPECT_EQ(data::largest_remainder(600, {8, 1, 1}), (std::vector<std::size_t>{480, 60, 60}));
}

TEST(Split, RandomPairsPartition) {
  const auto entries = synthetic_pairs(1234);
  data::SplitSpec spec;
  spec.seed = 9;
  const auto s = data::split_dataset(entries, spec);
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), entries.size());
  std::multiset<std::string> seen;
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (const auto& e : *part) seen.insert(e.signal_path + "|" + e.sentence + "|" + e.subject_id + e.session_id + e.story_id);
  std::multiset<std::string> all;
  for (const auto& e : entries) all.insert(e.signal_path + "|" + e.sentence + "|" + e.subject_id + e.session_id + e.story_id);
  EXPECT_EQ(seen, all);
  const auto again = data::split_dataset(entries, spec);
  ASSERT_EQ(again.test.size(), s.test.size());
  for (std::size_t i = 0; i < s.test.size(); ++i) EXPECT_EQ(again.test[i].sentence, s.test[i].sentence);
}

TEST(Split, HoldoutSentencesHasNoOverlap) {
  data::SplitSpec spec;
  spec.strategy = data::SplitStrategy::holdout_sentences;
  spec.seed = 2;
  const auto s = data::split_dataset(synthetic_pairs(5000), spec);
  const auto tr = sentence_set(s.train), te = sentence_set(s.test);
  for (const auto& k : te) EXPECT_EQ(tr.count(k), 0u);
  EXPECT_NEAR(static_cast<double>(te.size()), 99.7, 1.0);
}

TEST(Split, HoldoutStoryHasNoOverlap) {
  data::SplitSpec spec;
  spec.strategy = data::SplitStrategy::holdout_story;
  spec.holdout_key = "story1";
  const auto s = data::split_dataset(synthetic_pairs(3000), spec);
  for (const auto& e : s.train) EXPECT_NE(e.story_id, "story1");
  const auto tr = sentence_set(s.train);
  for (const auto& k : sentence_set(s.test)) EXPECT_EQ(tr.count(k), 0u);
}

TEST(Split, HoldoutSessionTakesWholeSession) {
  data::SplitSpec spec;
  spec.strategy = data::SplitStrategy::holdout_session;
  spec.holdout_key = "1";
  const auto s = data::split_dataset(synthetic_pairs(1000), spec);
  EXPECT_EQ(s.test.size(), 500u);
  for (const auto& e : s.test) EXPECT_EQ(e.session_id, "1");
  spec.holdout_key = "7";
  EXPECT_THROW(data::split_dataset(synthetic_pairs(10), spec), ConfigError);
}

TEST(Split, ReportNamesStrategyAndSeed) {
  data::SplitSpec spec;
  spec.seed = 42;
  const auto s = data::split_dataset(synthetic_pairs(50), spec);
  const auto r = data::split_report(spec, s);
  EXPECT_EQ(r.at("strategy"), "random_pairs");
  EXPECT_EQ(r.at("seed"), 42);
  EXPECT_EQ(r.at("counts").at("train"), 40);
}

TEST(Toy, CountsAndDeterminism) {
  const auto a = data::synthesize_toy_dataset(20, 30, 8, 200.0, 0);
  EXPECT_EQ(a.entries.size(), 600u);
  EXPECT_EQ(sentence_set(a.entries).size(), 20u);
  const auto b = data::synthesize_toy_dataset(20, 30, 8, 200.0, 0);
  ASSERT_EQ(a.recordings.size(), b.recordings.size());
  for (const auto& [k, rec] : a.recordings) EXPECT_TRUE((rec.samples.array() == b.recordings.at(k).samples.array()).all());
  for (const auto& e : a.entries) EXPECT_NO_THROW(e.validate());
}

TEST(Toy, SingleRepeatSignalsAreUnique) {
  const auto c = data::synthesize_toy_dataset(10, 1, 4, 200.0, 3);
  std::vector<signal::Recording> segs;
  for (const auto& e : c.entries) segs.push_back(data::segment_recording(c.recordings.at(e.signal_path), e));
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = i + 1; j < segs.size(); ++j)
      EXPECT_FALSE(segs[i].samples.cols() == segs[j].samples.cols() &&
                   (segs[i].samples.array() == segs[j].samples.array()).all());
}

TEST(Text, NormalizationFoldsCaseAndPunctuation) {
  EXPECT_EQ(data::normalize_text("Hello, World!  It's"), data::normalize_text("hello world its"));
  EXPECT_EQ(data::split_words("  a  b c "), (std::vector<std::string>{"a", "b", "c"}));
}
