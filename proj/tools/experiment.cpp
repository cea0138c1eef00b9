// SPDX-License-Identifier: Apache-2.0
#include "experiment.hpp"

#include <fstream>
#include <sstream>

#include "megtext/error.hpp"

namespace megtext::cli {

namespace {

void to_json(nlohmann::json& j, const ToySection& t) {
  j = {{"sentences", t.sentences},
       {"repeats", t.repeats},
       {"channels", t.channels},
       {"rate_hz", t.rate_hz},
       {"seed", t.seed},
       {"subjects", t.options.subjects},
       {"sessions", t.options.sessions},
       {"sentences_per_story", t.options.sentences_per_story},
       {"noise_std", t.options.noise_std},
       {"line_noise_amplitude", t.options.line_noise_amplitude},
       {"drift_amplitude", t.options.drift_amplitude}};
}

ToySection parse_toy(const nlohmann::json& j) {
  ToySection t;
  for (const auto& [k, v] : j.items()) {
    if (k == "sentences") t.sentences = v.get<int>();
    else if (k == "repeats") t.repeats = v.get<int>();
    else if (k == "channels") t.channels = v.get<int>();
    else if (k == "rate_hz") t.rate_hz = v.get<double>();
    else if (k == "seed") t.seed = v.get<std::uint64_t>();
    else if (k == "subjects") t.options.subjects = v.get<int>();
    else if (k == "sessions") t.options.sessions = v.get<int>();
    else if (k == "sentences_per_story") t.options.sentences_per_story = v.get<int>();
    else if (k == "noise_std") t.options.noise_std = v.get<double>();
    else if (k == "line_noise_amplitude") t.options.line_noise_amplitude = v.get<double>();
    else if (k == "drift_amplitude") t.options.drift_amplitude = v.get<double>();
    else throw SchemaError("unknown dataset.toy key '" + k + "'");
  }
  if (t.sentences < 1 || t.repeats < 1 || t.channels < 1 || !(t.rate_hz > 0))
    throw ConfigError("dataset.toy counts and rate must be positive");
  return t;
}

}  // namespace

void ExperimentConfig::set_seed(std::uint64_t seed) {
  train.seed = seed;
  model.seed = seed;
  eval.seed = seed;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json ds = {{"split", c.dataset.split}};
  ds["manifest"] = c.dataset.manifest ? nlohmann::json(*c.dataset.manifest) : nlohmann::json(nullptr);
  if (c.dataset.toy) to_json(ds["toy"], *c.dataset.toy);
  else ds["toy"] = nullptr;
  j = {{"dataset", ds},         {"preprocess", c.preprocess}, {"augmentation", c.augmentation},
       {"model", c.model},      {"train", c.train},           {"eval", c.eval},
       {"output_dir", c.output_dir}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (!j.is_object()) throw SchemaError("config must be a JSON object");
  c = ExperimentConfig{};
  for (const auto& [key, value] : j.items()) {
    if (key == "dataset") {
      for (const auto& [k, v] : value.items()) {
        if (k == "manifest") c.dataset.manifest = v.is_null() ? std::nullopt : std::optional(v.get<std::string>());
        else if (k == "toy") c.dataset.toy = v.is_null() ? std::nullopt : std::optional(parse_toy(v));
        else if (k == "split") c.dataset.split = v.get<data::SplitSpec>();
        else throw SchemaError("unknown dataset key '" + k + "'");
      }
    } else if (key == "preprocess") c.preprocess = value.get<signal::PreprocessConfig>();
    else if (key == "augmentation") c.augmentation = value.get<std::vector<augment::AugmentationSpec>>();
    else if (key == "model") c.model = value.get<model::AdaptedModelSpec>();
    else if (key == "train") c.train = value.get<train::TrainConfig>();
    else if (key == "eval") c.eval = value.get<eval::GenerationConfig>();
    else if (key == "output_dir") c.output_dir = value.get<std::string>();
    else throw SchemaError("unknown config section '" + key + "'");
  }
  if (c.dataset.manifest.has_value() == c.dataset.toy.has_value())
    throw ConfigError("dataset needs exactly one of 'manifest' or 'toy'");
  c.preprocess.validate();
  c.train.validate();
  c.eval.validate();
  c.model.plan.validate();
}

LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  LoadedConfig out;
  out.text = buf.str();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(out.text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  try {
    out.config = j.get<ExperimentConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  out.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return out;
}

train::RecordingSource Corpus::source() const {
  if (toy) return train::toy_source(*toy);
  return train::file_source(manifest_dir);
}

Corpus load_corpus(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
  Corpus c;
  if (cfg.dataset.toy) {
    const auto& t = *cfg.dataset.toy;
    c.toy = data::synthesize_toy_dataset(t.sentences, t.repeats, t.channels, t.rate_hz, t.seed, t.options);
    c.entries = c.toy->entries;
    return c;
  }
  std::filesystem::path manifest = *cfg.dataset.manifest;
  if (manifest.is_relative()) manifest = base_dir / manifest;
  c.entries = data::parse_manifest(manifest);
  c.manifest_dir = manifest.parent_path();
  return c;
}

}  // namespace megtext::cli
