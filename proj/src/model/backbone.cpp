// SPDX-License-Identifier: Apache-2.0
#include "megtext/model/backbone.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "megtext/data/toy.hpp"
#include "megtext/error.hpp"
#include "megtext/model/batch.hpp"
#include "megtext/nn/archive.hpp"
#include "megtext/nn/ops.hpp"
#include "megtext/nn/optim.hpp"

namespace megtext::model {

namespace {

constexpr std::uint64_t kWeightSeed = 20240513;

struct Spec {
  ModelDims dims;
  bool pretrained;
};

const std::map<std::string, Spec, std::less<>>& registry() {
  static const std::map<std::string, Spec, std::less<>> r = [] {
    std::map<std::string, Spec, std::less<>> m;
    auto whisper = [&](const char* id, int d, int heads, int layers) {
      m.emplace(id, Spec{ModelDims{id, d, heads, layers, layers, 4 * d, 1500, 448, 80}, false});
    };
    whisper("whisper-tiny", 384, 6, 4);
    whisper("whisper-base", 512, 8, 6);
    whisper("whisper-small", 768, 12, 12);
    whisper("whisper-medium", 1024, 16, 24);
    whisper("whisper-large", 1280, 20, 32);
    m.emplace("desk-tiny", Spec{ModelDims{"desk-tiny", 64, 4, 2, 2, 256, 100, 32, 16}, true});
    m.emplace("desk-small", Spec{ModelDims{"desk-small", 96, 4, 3, 2, 384, 100, 32, 16}, true});
    return m;
  }();
  return r;
}

std::uint64_t hash_word(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

// Fixed acoustic template of a word: a windowed chirp with per-channel gains.
struct Template {
  int length = 20;
  double f0 = 0.1, f1 = 0.2;
  std::vector<double> gain, phase;
};

const Template& word_template(int token, const std::string& word, int channels) {
  static std::map<std::pair<std::string, int>, Template> cache;
  auto key = std::make_pair(word, channels);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::mt19937_64 rng(hash_word(word) * 31 + static_cast<std::uint64_t>(channels) + static_cast<std::uint64_t>(token));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Template t;
  t.length = 16 + static_cast<int>(rng() % 9);
  t.f0 = 0.02 + 0.2 * unit(rng);
  t.f1 = 0.02 + 0.2 * unit(rng);
  double ss = 0.0;
  for (int c = 0; c < channels; ++c) {
    t.gain.push_back(normal(rng));
    t.phase.push_back(2.0 * std::numbers::pi * unit(rng));
    ss += t.gain.back() * t.gain.back();
  }
  for (double& g : t.gain) g *= 1.5 / std::sqrt(ss / channels);
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

void BackboneHandle::validate() const {
  if (encoder_frame_capacity <= 0) throw ConfigError("backbone frame capacity must be positive");
  if (!vocabulary) throw ConfigError("backbone has no vocabulary");
  for (int i = 0; i < vocabulary->vocab_size(); ++i) {
    if (vocabulary->is_special(i)) continue;
    if (vocabulary->id(vocabulary->token(i)) != i) throw ConfigError("backbone vocabulary does not round-trip");
  }
  dims.validate();
}

std::vector<std::string> backbone_identifiers() {
  return {"desk-tiny", "desk-small", "whisper-tiny", "whisper-base", "whisper-small", "whisper-medium",
          "whisper-large"};
}

BackboneHandle backbone_handle(std::string_view identifier, std::string language) {
  auto it = registry().find(identifier);
  if (it == registry().end()) throw ConfigError("unknown backbone '" + std::string(identifier) + "'");
  Tokenizer::language_token(language);
  BackboneHandle h;
  h.identifier = std::string(identifier);
  h.dims = it->second.dims;
  h.encoder_frame_capacity = h.dims.encoder_capacity;
  h.vocabulary = std::make_shared<const Tokenizer>(data::toy_lexicon());
  h.language_tag = std::move(language);
  h.pretrained = it->second.pretrained;
  return h;
}

void to_json(nlohmann::json& j, const PretrainConfig& c) {
  j = {{"steps", c.steps},       {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
       {"empty_fraction", c.empty_fraction}, {"noise_std", c.noise_std}, {"max_words", c.max_words},
       {"seed", c.seed}};
}

AcousticExample synth_acoustic_example(const ModelDims& dims, const Tokenizer& tok, const PretrainConfig& cfg,
                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int window = dims.input_window();
  const int channels = dims.stem_channels;
  AcousticExample ex;
  ex.language_token = unit(rng) < 0.5 ? Tokenizer::kEnglish : Tokenizer::kDutch;
  ex.features = nn::Mat::Zero(window, channels);
  if (unit(rng) >= cfg.empty_fraction) {
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cfg.max_words));
    int t = 4 + static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) {
      const int id = Tokenizer::kSpecialCount + static_cast<int>(rng() % static_cast<std::uint64_t>(tok.word_count()));
      const Template& tp = word_template(id, tok.token(id), channels);
      if (t + tp.length > window) break;
      const double amp = 0.7 + 0.6 * unit(rng);
      for (int s = 0; s < tp.length; ++s) {
        const double x = static_cast<double>(s) / tp.length;
        const double env = std::sin(std::numbers::pi * x);
        const double ph = 2.0 * std::numbers::pi * (tp.f0 * s + 0.5 * (tp.f1 - tp.f0) * s * x);
        for (int c = 0; c < channels; ++c)
          ex.features(t + s, c) += static_cast<float>(amp * tp.gain[static_cast<std::size_t>(c)] * env * env *
                                                      std::cos(ph + tp.phase[static_cast<std::size_t>(c)]));
      }
      ex.words.push_back(id);
      t += tp.length + 2 + static_cast<int>(rng() % 5);
    }
  }
  // Noise-only examples span a wide amplitude range so that silence of any level maps to nothing.
  double sigma = cfg.noise_std;
  if (ex.words.empty()) sigma = cfg.noise_std * std::exp(std::log(0.2) + (std::log(10.0) - std::log(0.2)) * unit(rng));
  for (Eigen::Index i = 0; i < ex.features.size(); ++i)
    ex.features.data()[i] += static_cast<float>(sigma * normal(rng));
  return ex;
}

double pretrain_backbone(Seq2SeqModel& model, const PretrainConfig& cfg) {
  if (cfg.steps < 1 || cfg.batch_size < 1) throw ConfigError("pretraining steps and batch size must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::vector<nn::ParamPtr> params;
  for (auto& p : model.parameters())
    if (p->trainable) params.push_back(p);
  nn::AdamWConfig opt_cfg;
  opt_cfg.learning_rate = cfg.learning_rate;
  nn::AdamW opt(params, opt_cfg);
  const int window = model.dims().input_window();
  double recent = 0.0;
  int recent_n = 0;
  for (int step = 1; step <= cfg.steps; ++step) {
    nn::Mat input(static_cast<Eigen::Index>(cfg.batch_size) * window, model.dims().stem_channels);
    std::vector<std::vector<int>> words;
    std::vector<int> langs;
    for (int b = 0; b < cfg.batch_size; ++b) {
      auto ex = synth_acoustic_example(model.dims(), model.tokenizer(), cfg, rng);
      input.middleRows(static_cast<Eigen::Index>(b) * window, window) = ex.features;
      words.push_back(std::move(ex.words));
      langs.push_back(ex.language_token);
    }
    const TokenBatch tb = make_token_batch(words, langs);
    nn::Graph g;
    auto enc = model.encode(g, input, cfg.batch_size);
    auto mem = model.memory(g, enc, cfg.batch_size);
    auto logits = model.decode(g, mem, tb.inputs, cfg.batch_size);
    auto loss = nn::cross_entropy(logits, tb.targets);
    const double l = loss.value()(0, 0);
    if (!std::isfinite(l)) throw NumericError("non-finite loss during backbone pretraining");
    g.backward(loss);
    opt.clip_gradients();
    opt.step();
    opt.zero_grad();
    if (step > cfg.steps - 50) {
      recent += l;
      ++recent_n;
    }
    if (step % 100 == 0) spdlog::debug("pretrain step {} loss {:.4f}", step, l);
  }
  return recent / std::max(1, recent_n);
}

std::filesystem::path default_backbone_cache() {
  if (const char* c = std::getenv("MEGTEXT_CACHE"); c && *c) return c;
  if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".cache" / "megtext";
  return ".megtext-cache";
}

Seq2SeqModel load_backbone(const BackboneHandle& handle, const std::filesystem::path& cache_dir,
                           const PretrainConfig& cfg) {
  handle.validate();
  Seq2SeqModel model(handle.dims, *handle.vocabulary, kWeightSeed);
  if (!handle.pretrained) return model;

  nlohmann::json meta = {{"identifier", handle.identifier}, {"dims", handle.dims},
                         {"vocabulary", *handle.vocabulary}, {"pretrain", cfg}};
  const auto dir = cache_dir / handle.identifier;
  const auto weights = dir / ("weights-" + std::to_string(std::hash<std::string>{}(meta.dump())) + ".bin");
  if (std::filesystem::exists(weights)) {
    nn::assign_tensors(nn::load_tensors(weights), model.parameters(), true);
    return model;
  }
  spdlog::info("pretraining backbone {} ({} steps), cached at {}", handle.identifier, cfg.steps, weights.string());
  meta["final_loss"] = pretrain_backbone(model, cfg);
  std::filesystem::create_directories(dir);
  nn::save_tensors(weights, model.parameters());
  std::ofstream(weights.string() + ".json") << meta.dump(2) << '\n';
  return model;
}

}  // namespace megtext::model
