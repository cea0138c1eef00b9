// SPDX-License-Identifier: Apache-2.0
#include "megtext/data/toy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "megtext/error.hpp"
#include "megtext/signal/npy.hpp"

namespace megtext::data {
namespace {

constexpr double kLeadS = 0.04;
constexpr double kTailS = 0.04;
constexpr double kRecordingPadS = 2.0;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Fixed multichannel waveform of one word; depends only on the word and channel count.
struct WordPattern {
  double duration_s = 0.1;
  double freq_hz = 5.0;
  std::vector<double> gain;
  std::vector<double> phase;

  double value(int channel, double t) const {
    const double env = std::sin(std::numbers::pi * t / duration_s);
    return gain[static_cast<std::size_t>(channel)] * env * env *
           std::cos(2.0 * std::numbers::pi * freq_hz * t + phase[static_cast<std::size_t>(channel)]);
  }
};

WordPattern word_pattern(const std::string& word, int channels) {
  std::mt19937_64 rng(fnv1a(word) ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(channels)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  WordPattern p;
  p.duration_s = 0.08 + 0.04 * unit(rng);
  p.freq_hz = 3.0 + 9.0 * unit(rng);
  double ss = 0.0;
  for (int c = 0; c < channels; ++c) {
    p.gain.push_back(normal(rng));
    p.phase.push_back(2.0 * std::numbers::pi * unit(rng));
    ss += p.gain.back() * p.gain.back();
  }
  const double norm = std::sqrt(ss / channels);
  // Root-mean-square gain across channels is 2.
  for (double& g : p.gain) g *= 2.0 / norm;
  return p;
}

std::string join(const std::vector<std::string>& words) {
  std::ostringstream out;
  for (std::size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
  return out.str();
}

std::string two_digit(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

}  // namespace

const std::vector<std::string>& toy_lexicon() {
  static const std::vector<std::string> words{
      "the",   "a",     "cat",   "dog",   "bird",  "fish",  "man",    "woman", "child", "house",
      "tree",  "river", "road",  "car",   "boat",  "sun",   "moon",   "star",  "rain",  "wind",
      "red",   "blue",  "green", "small", "big",   "old",   "young",  "quick", "slow",  "happy",
      "runs",  "walks", "sees",  "eats",  "sings", "jumps", "reads",  "writes", "holds", "finds",
      "today", "again", "near",  "under", "over",  "with",  "into",   "softly", "loudly", "never"};
  return words;
}

std::vector<std::string> toy_sentences(int n_sentences, std::uint64_t seed) {
  if (n_sentences < 1) throw ConfigError("n_sentences must be positive");
  std::mt19937_64 rng(seed ^ 0x5EEDF00DULL);
  std::deque<std::string> stream;
  std::set<std::string> seen;
  std::vector<std::string> sentences;
  int attempts = 0;
  while (static_cast<int>(sentences.size()) < n_sentences) {
    if (++attempts > 100 * n_sentences + 1000) throw ConfigError("cannot draw enough distinct sentences");
    const auto length = static_cast<std::size_t>(4 + rng() % 3);
    std::vector<std::string> words;
    std::deque<std::string> deferred;
    while (words.size() < length) {
      if (stream.empty()) {
        std::vector<std::string> perm = toy_lexicon();
        std::shuffle(perm.begin(), perm.end(), rng);
        stream.insert(stream.end(), perm.begin(), perm.end());
      }
      std::string w = std::move(stream.front());
      stream.pop_front();
      if (std::find(words.begin(), words.end(), w) != words.end()) {
        deferred.push_back(std::move(w));
      } else {
        words.push_back(std::move(w));
      }
    }
    stream.insert(stream.begin(), deferred.begin(), deferred.end());
    std::string text = join(words);
    if (seen.insert(text).second) sentences.push_back(std::move(text));
  }
  return sentences;
}

ToyCorpus synthesize_toy_dataset(int n_sentences, int n_repeats, int channels, double rate_hz, std::uint64_t seed,
                                 const ToyOptions& opt) {
  if (n_sentences < 1 || n_repeats < 1 || channels < 1 || !(rate_hz > 0.0)) {
    throw ConfigError("toy dataset counts and rate must be positive");
  }
  const std::vector<std::string> sentences = toy_sentences(n_sentences, seed);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int n_recordings = std::max(1, opt.subjects * opt.sessions);
  // Instance (sentence, repeat) goes to recording repeat % n_recordings, in shuffled order.
  std::vector<std::vector<std::pair<int, int>>> plan(static_cast<std::size_t>(n_recordings));
  for (int s = 0; s < n_sentences; ++s) {
    for (int r = 0; r < n_repeats; ++r) plan[static_cast<std::size_t>(r % n_recordings)].emplace_back(s, r);
  }

  ToyCorpus corpus;
  std::vector<std::vector<std::string>> sentence_words;
  for (const auto& s : sentences) {
    std::vector<std::string> words;
    std::istringstream in(s);
    for (std::string w; in >> w;) words.push_back(w);
    sentence_words.push_back(std::move(words));
  }

  for (int rec_idx = 0; rec_idx < n_recordings; ++rec_idx) {
    auto& instances = plan[static_cast<std::size_t>(rec_idx)];
    if (instances.empty()) continue;
    std::shuffle(instances.begin(), instances.end(), rng);
    const int subject = rec_idx / std::max(1, opt.sessions) + 1;
    const int session = rec_idx % std::max(1, opt.sessions);
    const std::string path = "sub-" + two_digit(subject) + "_ses-" + std::to_string(session) + ".npy";

    // Lay out sentence instances on the timeline first.
    struct Placed {
      int sentence;
      std::int64_t start;  // samples
      std::int64_t length;
      std::vector<WordSpan> spans;
    };
    std::vector<Placed> placed;
    auto cursor = static_cast<std::int64_t>(std::llround(kRecordingPadS * rate_hz));
    for (const auto& [s, r] : instances) {
      (void)r;
      Placed p{s, cursor, 0, {}};
      double t = kLeadS;
      for (const auto& w : sentence_words[static_cast<std::size_t>(s)]) {
        const WordPattern wp = word_pattern(w, channels);
        p.spans.push_back({w, t, t + wp.duration_s});
        t += wp.duration_s + 0.01 + 0.02 * unit(rng);
      }
      t += kTailS;
      p.length = static_cast<std::int64_t>(std::llround(t * rate_hz));
      cursor += p.length + static_cast<std::int64_t>(std::llround((0.3 + 0.3 * unit(rng)) * rate_hz));
      placed.push_back(std::move(p));
    }
    const std::int64_t total = cursor + static_cast<std::int64_t>(std::llround(kRecordingPadS * rate_hz));

    signal::Recording rec;
    rec.sample_rate_hz = rate_hz;
    rec.samples.resize(channels, total);
    std::vector<double> subject_gain(static_cast<std::size_t>(channels));
    for (auto& g : subject_gain) g = 0.8 + 0.4 * unit(rng);
    const bool hum = 50.0 < rate_hz / 2.0;
    for (int c = 0; c < channels; ++c) {
      const double hum_phase = 2.0 * std::numbers::pi * unit(rng);
      const double drift_phase = 2.0 * std::numbers::pi * unit(rng);
      const double drift_freq = 0.05 + 0.1 * unit(rng);
      for (std::int64_t i = 0; i < total; ++i) {
        const double t = static_cast<double>(i) / rate_hz;
        double v = opt.noise_std * normal(rng);
        if (hum) v += opt.line_noise_amplitude * std::sin(2.0 * std::numbers::pi * 50.0 * t + hum_phase);
        v += opt.drift_amplitude * std::sin(2.0 * std::numbers::pi * drift_freq * t + drift_phase);
        rec.samples(c, i) = v;
      }
    }
    for (const auto& p : placed) {
      for (const auto& span : p.spans) {
        const WordPattern wp = word_pattern(span.word, channels);
        const auto first = p.start + static_cast<std::int64_t>(std::llround(span.start_s * rate_hz));
        const auto count = static_cast<std::int64_t>(std::llround(wp.duration_s * rate_hz));
        for (std::int64_t k = 0; k < count; ++k) {
          const double t = static_cast<double>(k) / rate_hz;
          for (int c = 0; c < channels; ++c) {
            rec.samples(c, first + k) += subject_gain[static_cast<std::size_t>(c)] * wp.value(c, t);
          }
        }
      }
      ManifestEntry e;
      e.signal_path = path;
      e.signal_rate_hz = rate_hz;
      e.start_s = static_cast<double>(p.start) / rate_hz;
      e.end_s = static_cast<double>(p.start + p.length) / rate_hz;
      e.duration_s = e.end_s - e.start_s;
      e.language = "English";
      e.sentence = sentences[static_cast<std::size_t>(p.sentence)];
      e.word_spans = p.spans;
      e.subject_id = two_digit(subject);
      e.session_id = std::to_string(session);
      e.story_id = "story-" + std::to_string(p.sentence / std::max(1, opt.sentences_per_story));
      corpus.entries.push_back(std::move(e));
    }
    corpus.recordings.emplace(path, std::move(rec));
  }
  return corpus;
}

void write_toy_corpus(const ToyCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [path, rec] : corpus.recordings) signal::save_recording(dir / path, rec);
  write_manifest(dir / "manifest.jsonl", corpus.entries);
}

std::vector<ManifestEntry> make_word_clips(const std::vector<ManifestEntry>& entries, bool single_words,
                                           int clips_per_entry, int max_words, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ManifestEntry> clips;
  auto make = [](const ManifestEntry& src, std::size_t first, std::size_t last) {
    ManifestEntry c = src;
    const double t0 = src.word_spans[first].start_s;
    const double t1 = src.word_spans[last].end_s;
    c.start_s = src.start_s + t0;
    c.end_s = src.start_s + t1;
    c.duration_s = c.end_s - c.start_s;
    std::vector<WordSpan> spans;
    std::vector<std::string> words;
    for (std::size_t i = first; i <= last; ++i) {
      spans.push_back({src.word_spans[i].word, src.word_spans[i].start_s - t0, src.word_spans[i].end_s - t0});
      words.push_back(src.word_spans[i].word);
    }
    c.word_spans = std::move(spans);
    c.sentence = join(words);
    return c;
  };
  for (const auto& e : entries) {
    const std::size_t n = e.word_spans.size();
    if (n == 0) continue;
    if (single_words) {
      for (std::size_t i = 0; i < n; ++i) clips.push_back(make(e, i, i));
      continue;
    }
    for (int k = 0; k < clips_per_entry; ++k) {
      const std::size_t len = 1 + rng() % static_cast<std::size_t>(std::max(1, std::min<int>(max_words, static_cast<int>(n))));
      const std::size_t first = rng() % (n - len + 1);
      clips.push_back(make(e, first, first + len - 1));
    }
  }
  return clips;
}

}  // namespace megtext::data
