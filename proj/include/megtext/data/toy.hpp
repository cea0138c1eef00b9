// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "megtext/data/manifest.hpp"
#include "megtext/signal/recording.hpp"

namespace megtext::data {

/// The 50-word lexicon shared by the synthetic corpora and the desk backbones.
const std::vector<std::string>& toy_lexicon();

struct ToyCorpus {
  std::map<std::string, signal::Recording> recordings;  // keyed by signal_path
  std::vector<ManifestEntry> entries;
};

struct ToyOptions {
  int subjects = 2;
  int sessions = 2;
  int sentences_per_story = 5;
  double noise_std = 0.3;
  double line_noise_amplitude = 0.5;  // 50 Hz hum, removed by the notch
  double drift_amplitude = 1.0;       // sub-1 Hz drift, removed by the band-pass
};

/// Distinct 4-6 word sentences over the lexicon, no word repeated within a
/// sentence, with every lexicon word used as evenly as possible.
std::vector<std::string> toy_sentences(int n_sentences, std::uint64_t seed);

/// Renders each sentence n_repeats times into continuous recordings, one per
/// (subject, session). Each word contributes a fixed, word-specific
/// multichannel waveform; instances differ by seeded noise, hum and drift.
ToyCorpus synthesize_toy_dataset(int n_sentences, int n_repeats, int channels, double rate_hz, std::uint64_t seed,
                                 const ToyOptions& options = {});

/// Writes recordings (npy + header) and `manifest.jsonl` under `dir`.
void write_toy_corpus(const ToyCorpus& corpus, const std::filesystem::path& dir);

/// Word-level clips cut from sentence entries. `single_words` yields one clip per
/// word span; otherwise `clips_per_entry` random contiguous runs of 1..max_words words.
std::vector<ManifestEntry> make_word_clips(const std::vector<ManifestEntry>& entries, bool single_words,
                                           int clips_per_entry, int max_words, std::uint64_t seed);

}  // namespace megtext::data
