// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "megtext/data/manifest.hpp"
#include "megtext/data/toy.hpp"
#include "megtext/model/tokenizer.hpp"
#include "megtext/nn/graph.hpp"
#include "megtext/signal/preprocess.hpp"

namespace megtext::train {

/// A preprocessed, windowed sentence segment with its transcript tokens. The
/// entry's word spans are relative to the window start.
struct Example {
  signal::Recording window;  // channels x window samples
  data::ManifestEntry entry;
  std::vector<int> words;
  int language_token = model::Tokenizer::kEnglish;
  Eigen::Index content_samples = 0;
};

struct Dataset {
  std::string name;
  std::vector<Example> examples;

  bool empty() const { return examples.empty(); }
  std::size_t size() const { return examples.size(); }
  int channels() const;
  int window() const;
};

/// Continuous recording for a manifest signal path.
using RecordingSource = std::function<signal::Recording(const data::ManifestEntry&)>;

RecordingSource toy_source(const data::ToyCorpus& corpus);
RecordingSource file_source(const std::filesystem::path& manifest_dir);

/// Preprocesses each distinct recording once, then segments, windows and tokenizes
/// every entry. Entries that fail are reported through `on_error` when given,
/// otherwise the exception propagates.
Dataset build_dataset(const std::string& name, const std::vector<data::ManifestEntry>& entries,
                      const RecordingSource& source, const signal::PreprocessConfig& preprocess, int window_samples,
                      const model::Tokenizer& tokenizer,
                      const std::function<void(const data::ManifestEntry&, const std::exception&)>& on_error = {});

/// Zero-pads every example up to `channels`.
Dataset pad_dataset(Dataset ds, int channels);

/// (batch*window) x channels model input for the given examples.
nn::Mat stack_inputs(const std::vector<const Example*>& examples);
nn::Mat to_input(const signal::Recording& window);

}  // namespace megtext::train
