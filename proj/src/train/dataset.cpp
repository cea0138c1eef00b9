// SPDX-License-Identifier: Apache-2.0
#include "megtext/train/dataset.hpp"

#include <map>

#include "megtext/data/segment.hpp"
#include "megtext/error.hpp"
#include "megtext/model/adapter.hpp"
#include "megtext/signal/npy.hpp"

namespace megtext::train {

int Dataset::channels() const { return examples.empty() ? 0 : static_cast<int>(examples.front().window.channels()); }
int Dataset::window() const { return examples.empty() ? 0 : static_cast<int>(examples.front().window.time_samples()); }

RecordingSource toy_source(const data::ToyCorpus& corpus) {
  return [&corpus](const data::ManifestEntry& e) {
    auto it = corpus.recordings.find(e.signal_path);
    if (it == corpus.recordings.end()) throw ConfigError("toy corpus has no recording '" + e.signal_path + "'");
    return it->second;
  };
}

RecordingSource file_source(const std::filesystem::path& manifest_dir) {
  return [manifest_dir](const data::ManifestEntry& e) {
    return signal::load_recording(data::resolve_signal_path(e, manifest_dir), e.signal_rate_hz);
  };
}

Dataset build_dataset(const std::string& name, const std::vector<data::ManifestEntry>& entries,
                      const RecordingSource& source, const signal::PreprocessConfig& preprocess, int window_samples,
                      const model::Tokenizer& tokenizer,
                      const std::function<void(const data::ManifestEntry&, const std::exception&)>& on_error) {
  preprocess.validate();
  Dataset ds;
  ds.name = name;
  std::map<std::string, signal::Recording> cache;
  for (const auto& entry : entries) {
    try {
      auto it = cache.find(entry.signal_path);
      if (it == cache.end()) it = cache.emplace(entry.signal_path, signal::preprocess(source(entry), preprocess)).first;
      auto windowed = data::fit_to_window(data::segment_recording(it->second, entry), window_samples);
      Example ex;
      ex.window = std::move(windowed.recording);
      ex.content_samples = windowed.content_samples;
      ex.entry = entry;
      ex.words = tokenizer.encode(entry.sentence);
      if (ex.words.empty()) throw SchemaError("entry has an empty sentence");
      ex.language_token = model::Tokenizer::language_token(entry.language);
      ds.examples.push_back(std::move(ex));
    } catch (const std::exception& err) {
      if (!on_error) throw;
      on_error(entry, err);
    }
  }
  return ds;
}

Dataset pad_dataset(Dataset ds, int channels) {
  for (auto& ex : ds.examples) ex.window = model::pad_channels(ex.window, channels);
  return ds;
}

nn::Mat to_input(const signal::Recording& window) { return window.samples.transpose().cast<float>(); }

nn::Mat stack_inputs(const std::vector<const Example*>& examples) {
  if (examples.empty()) throw ConfigError("empty batch");
  const Eigen::Index t = examples.front()->window.time_samples();
  const Eigen::Index c = examples.front()->window.channels();
  nn::Mat out(t * static_cast<Eigen::Index>(examples.size()), c);
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& w = examples[i]->window;
    if (w.time_samples() != t || w.channels() != c) throw ConfigError("batch examples differ in shape");
    out.middleRows(static_cast<Eigen::Index>(i) * t, t) = w.samples.transpose().cast<float>();
  }
  return out;
}

}  // namespace megtext::train
