// SPDX-License-Identifier: Apache-2.0
// Acceptance runner. Prints one PASS/FAIL line per criterion; `--only N` runs one.

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "megtext/augment/augmentation.hpp"
#include "megtext/data/split.hpp"
#include "megtext/data/text.hpp"
#include "megtext/data/toy.hpp"
#include "megtext/error.hpp"
#include "megtext/eval/metrics.hpp"
#include "megtext/eval/report.hpp"
#include "megtext/model/adapter.hpp"
#include "megtext/model/backbone.hpp"
#include "megtext/signal/filters.hpp"
#include "megtext/signal/preprocess.hpp"
#include "megtext/signal/scaling.hpp"
#include "megtext/train/trainer.hpp"
#include "support/oracles.hpp"

using namespace megtext;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances.
constexpr double kNotchMinDb = 20.0;
constexpr double kBandStopMinDb = 12.0;
constexpr double kRippleMaxDb = 1.0;
constexpr double kPreprocessMaxSeconds = 5.0;
constexpr double kScalerTol = 1e-9;
constexpr double kMetricRelTol = 1e-6;
constexpr double kMaskFractionTol = 0.02;
constexpr double kSnrTolDb = 0.5;
constexpr double kBinomialSigmas = 3.0;
constexpr double kE2eMinBleu = 90.0;
constexpr double kNoiseMaxBleu = 10.0;
constexpr double kE2eMaxSeconds = 15.0 * 60.0;
constexpr double kProbeMinRatio = 10.0;

struct Outcome {
  bool ok = true;
  std::vector<std::string> notes;

  void check(bool cond, const std::string& note) {
    if (!cond) ok = false;
    notes.push_back((cond ? "" : "FAILED ") + note);
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <typename F>
double tone_gain_db(double freq_hz, double rate_hz, F&& f, double seconds) {
  const auto in = oracle::sine_recording(1, seconds, rate_hz, freq_hz);
  const auto out = f(in);
  const Eigen::Index n = in.time_samples(), first = n / 4, count = n / 2;
  return oracle::db(oracle::tone_power(out.samples, 0, rate_hz, freq_hz, first, count) /
                    oracle::tone_power(in.samples, 0, rate_hz, freq_hz, first, count));
}

Outcome spectral_suite() {
  Outcome o;
  const signal::PreprocessConfig cfg;
  const double rate = 1000.0;
  auto notch = [&](const signal::Recording& r) { return signal::notch_filter(r, cfg.line_freq_hz); };
  auto band = [&](const signal::Recording& r) { return signal::bandpass_filter(r, cfg.band_low_hz, cfg.band_high_hz); };

  const double g_line = tone_gain_db(cfg.line_freq_hz, rate, notch, 8.0);
  o.check(g_line <= -kNotchMinDb, fmt::format("notch {:.1f} dB at {} Hz", g_line, cfg.line_freq_hz));
  const double g_low = tone_gain_db(0.5, rate, band, 16.0);
  o.check(g_low <= -kBandStopMinDb, fmt::format("band-pass {:.1f} dB at 0.5 Hz", g_low));
  const double g_high = tone_gain_db(90.0, rate, band, 8.0);
  o.check(g_high <= -kBandStopMinDb, fmt::format("band-pass {:.1f} dB at 90 Hz", g_high));
  double ripple = 0.0;
  for (double f : {3.0, 5.0, 10.0, 20.0, 30.0, 40.0}) ripple = std::max(ripple, std::abs(tone_gain_db(f, rate, band, 8.0)));
  o.check(ripple < kRippleMaxDb, fmt::format("mid-band ripple {:.3f} dB", ripple));

  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 1.0);
  signal::Recording big{signal::SampleMatrix(208, 60000), rate, {}};
  for (Eigen::Index c = 0; c < big.channels(); ++c)
    for (Eigen::Index t = 0; t < big.time_samples(); ++t)
      big.samples(c, t) = noise(rng) + 3.0 * std::sin(2.0 * M_PI * 50.0 * static_cast<double>(t) / rate) +
                          (c % 17 == 0 ? 40.0 : 1.0) * std::sin(2.0 * M_PI * 7.0 * static_cast<double>(t) / rate);
  const auto t0 = Clock::now();
  const auto out = signal::preprocess(big, cfg);
  const double elapsed = seconds_since(t0);
  o.check(elapsed < kPreprocessMaxSeconds, fmt::format("208x60000 in {:.2f} s", elapsed));
  const double peak = out.samples.cwiseAbs().maxCoeff();
  o.check(peak <= 1.0 && out.samples.allFinite(), fmt::format("max |x| {:.4f}", peak));
  return o;
}

Outcome scaler_oracle() {
  Outcome o;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> rows(1, 16), cols(1, 256), kind(0, 3);
  std::normal_distribution<double> normal(0.0, 3.0);
  double worst = 0.0;
  int constant_channels = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int c = rows(rng), t = cols(rng);
    signal::Recording r{signal::SampleMatrix(c, t), 100.0, {}};
    for (int i = 0; i < c; ++i) {
      const int k = kind(rng);
      constant_channels += k == 0;
      for (int j = 0; j < t; ++j) r.samples(i, j) = k == 0 ? -2.5 : (k == 1 ? std::round(normal(rng)) : normal(rng));
    }
    const auto out = signal::robust_scale(r, 0.25, 0.75);
    for (int i = 0; i < c; ++i) {
      std::vector<double> v(r.samples.row(i).data(), r.samples.row(i).data() + t);
      const double med = oracle::sorted_quantile(v, 0.5);
      double iqr = oracle::sorted_quantile(v, 0.75) - oracle::sorted_quantile(v, 0.25);
      if (iqr < signal::kMinIqr) iqr = 1.0;
      for (int j = 0; j < t; ++j) worst = std::max(worst, std::abs(out.samples(i, j) - (v[j] - med) / iqr));
    }
  }
  o.check(worst <= kScalerTol, fmt::format("200 matrices, max error {:.2e}", worst));
  o.check(constant_channels > 0, fmt::format("{} constant channels", constant_channels));
  return o;
}

std::vector<eval::Words> all_sequences(int max_len) {
  std::vector<eval::Words> out{{}}, frontier{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<eval::Words> next;
    for (const auto& w : frontier)
      for (const char* s : {"a", "b", "c"}) {
        auto x = w;
        x.push_back(s);
        next.push_back(std::move(x));
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

std::string join(const eval::Words& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

bool rel_close(double got, double want) { return std::abs(got - want) <= kMetricRelTol * std::max(1.0, std::abs(want)); }

Outcome metric_oracles() {
  Outcome o;
  const auto seqs = all_sequences(6);
  std::vector<std::string> joined;
  for (const auto& s : seqs) joined.push_back(join(s));
  std::size_t mismatches = 0, wer_mismatches = 0, pairs = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i)
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      ++pairs;
      const auto d = oracle::dp_edit_distance(seqs[i], seqs[j]);
      if (eval::edit_distance(seqs[i], seqs[j]) != d) ++mismatches;
      if (seqs[i].empty()) continue;
      const double want = 100.0 * static_cast<double>(d) / static_cast<double>(seqs[i].size());
      if (!rel_close(eval::wer({joined[i]}, {joined[j]}), want)) ++wer_mismatches;
    }
  o.check(mismatches == 0, fmt::format("edit distance on {} pairs, {} mismatches", pairs, mismatches));
  o.check(wer_mismatches == 0, fmt::format("WER, {} mismatches", wer_mismatches));

  std::ifstream in(fs::path(MEGTEXT_TEST_DATA_DIR) / "metric_fixture.json");
  const auto f = nlohmann::json::parse(in);
  std::vector<std::string> refs, hyps;
  std::size_t bad = 0;
  for (const auto& p : f.at("pairs")) {
    const auto ref = p.at("reference").get<std::string>(), hyp = p.at("hypothesis").get<std::string>();
    refs.push_back(ref);
    hyps.push_back(hyp);
    for (int n = 1; n <= 4; ++n)
      bad += !rel_close(eval::sentence_bleu(data::split_words(ref), data::split_words(hyp), n),
                        p.at("bleu")[static_cast<std::size_t>(n - 1)].get<double>());
    const auto r = eval::rouge1({ref}, {hyp});
    bad += !rel_close(r.f, 100.0 * p.at("rouge1").at("f").get<double>());
    bad += !rel_close(r.p, 100.0 * p.at("rouge1").at("p").get<double>());
    bad += !rel_close(r.r, 100.0 * p.at("rouge1").at("r").get<double>());
  }
  for (int n = 1; n <= 4; ++n)
    bad += !rel_close(eval::bleu_n(refs, hyps, n), f.at("corpus").at("bleu")[static_cast<std::size_t>(n - 1)].get<double>());
  bad += !rel_close(eval::rouge1(refs, hyps).f, f.at("corpus").at("rouge1").at("f").get<double>());
  o.check(bad == 0, fmt::format("{}-pair BLEU/ROUGE fixture, {} mismatches", refs.size(), bad));

  double worst_identity = 0.0;
  for (int n = 1; n <= 4; ++n) worst_identity = std::max(worst_identity, std::abs(eval::bleu_n(refs, refs, n) - 100.0));
  worst_identity = std::max(worst_identity, std::abs(eval::rouge1(refs, refs).f - 100.0));
  worst_identity = std::max(worst_identity, std::abs(eval::wer(refs, refs)));
  o.check(worst_identity < 1e-9, fmt::format("identity corpus deviation {:.1e}", worst_identity));
  return o;
}

signal::Recording nonzero(int channels, int samples, std::uint64_t seed) {
  augment::Rng rng(seed);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  signal::Recording r{signal::SampleMatrix(channels, samples), 200.0, {}};
  for (Eigen::Index i = 0; i < r.samples.size(); ++i) r.samples.data()[i] = u(rng) * (i % 2 ? 1.0 : -1.0);
  return r;
}

double zero_fraction(const signal::Recording& r) {
  return static_cast<double>((r.samples.array() == 0.0).count()) / static_cast<double>(r.samples.size());
}

Outcome augmentation_statistics() {
  Outcome o;
  using MaskFn = signal::Recording (*)(signal::Recording, double, augment::Rng&);
  const std::vector<std::tuple<std::string, MaskFn, double>> masks = {
      {"block", augment::apply_block_mask, 0.1},
      {"block", augment::apply_block_mask, 0.3},
      {"time", augment::apply_time_mask, 0.1},
      {"channel", augment::apply_channel_mask, 0.25}};
  for (const auto& [name, fn, target] : masks) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      augment::Rng rng(seed);
      worst = std::max(worst, std::abs(zero_fraction(fn(nonzero(8, 2000, seed + 1000), target, rng)) - target));
    }
    o.check(worst <= kMaskFractionTol, fmt::format("{} mask {} worst deviation {:.4f}", name, target, worst));
  }

  for (double snr : {0.0, 15.0}) {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      augment::Rng data_rng(seed), rng(seed + 77);
      std::normal_distribution<double> n(0.0, 2.0);
      signal::Recording r{signal::SampleMatrix(8, 2000), 200.0, {}};
      for (Eigen::Index i = 0; i < r.samples.size(); ++i) r.samples.data()[i] = n(data_rng);
      const auto out = augment::inject_noise(r, snr, rng);
      const double measured = oracle::db(r.samples.squaredNorm() / (out.samples - r.samples).squaredNorm());
      worst = std::max(worst, std::abs(measured - snr));
    }
    o.check(worst <= kSnrTolDb, fmt::format("noise {} dB worst deviation {:.3f} dB", snr, worst));
  }

  for (double p : {0.5, 0.2}) {
    augment::AugmentationSpec spec;
    spec.kind = augment::AugmentKind::block_mask;
    spec.ratio = 0.5;
    spec.probability = p;
    augment::Rng rng(123);
    const auto base = nonzero(2, 80, 3);
    const int n = 1000;
    int applied = 0;
    for (int i = 0; i < n; ++i) applied += zero_fraction(augment::apply(base, {}, spec, rng).first) > 0.0;
    const double sigma = std::sqrt(n * p * (1 - p));
    o.check(std::abs(applied - n * p) <= kBinomialSigmas * sigma, fmt::format("p={} applied {}/{}", p, applied, n));
  }
  return o;
}

model::ModelDims tiny_dims() {
  model::ModelDims d;
  d.name = "contract";
  d.d_model = 16;
  d.heads = 2;
  d.encoder_layers = 2;
  d.decoder_layers = 1;
  d.ffn = 32;
  d.encoder_capacity = 10;
  d.decoder_capacity = 12;
  d.stem_channels = 4;
  return d;
}

Outcome shape_contracts() {
  Outcome o;
  int frame_errors = 0;
  for (int t = 1; t <= 4096; ++t) frame_errors += model::InputStem::output_frames(t) != (t + 1) / 2;
  o.check(frame_errors == 0, fmt::format("frontend frames ceil(T/2) for T in [1,4096], {} errors", frame_errors));

  model::FrontendConfig fc;
  fc.in_channels = 3;
  fc.d_model = 16;
  bool rejected = false;
  {
    model::Seq2SeqModel m(tiny_dims(), model::Tokenizer(data::toy_lexicon()), 1);
    try {
      model::graft(m, model::build_frontend(fc, 1), 24);
    } catch (const ConfigError&) {
      rejected = true;
    }
  }
  o.check(rejected, "graft rejects 12 frames for a 10-frame encoder");

  model::Seq2SeqModel m(tiny_dims(), model::Tokenizer(data::toy_lexicon()), 1);
  model::graft(m, model::build_frontend(fc, 1), 20);
  model::TrainabilityPlan plan;
  plan.adapter_rank_budget = 2;
  plan.adalora.init_r = 3;
  model::plan_trainability(m, plan, 1);
  std::map<std::string, nn::Mat> decoder_before;
  for (const auto& p : m.parameters())
    if (p->name.rfind(model::kDecoderPrefix, 0) == 0) decoder_before.emplace(p->name, p->value);

  train::Dataset ds;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    train::Example ex;
    ex.window = {signal::SampleMatrix(3, 20), 200.0, {}};
    for (Eigen::Index k = 0; k < ex.window.samples.size(); ++k) ex.window.samples.data()[k] = noise(rng);
    ex.words = {model::Tokenizer::kSpecialCount + i % 5};
    ex.content_samples = 20;
    ds.examples.push_back(std::move(ex));
  }
  train::TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_epochs = 3;
  cfg.learning_rate = 1e-2;
  const auto before_adapters = model::trainable_parameters(m).front()->value;
  train::train(m, ds, ds, cfg);
  std::size_t changed = 0;
  for (const auto& [name, value] : decoder_before) changed += !(m.find(name)->value == value);
  o.check(changed == 0 && !decoder_before.empty(),
          fmt::format("{} decoder tensors bit-identical after training", decoder_before.size() - changed));
  o.check(!(model::trainable_parameters(m).front()->value == before_adapters), "trainable tensors moved");

  std::mt19937_64 prng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  signal::Recording r{signal::SampleMatrix(208, 300), 200.0, {}};
  for (Eigen::Index k = 0; k < r.samples.size(); ++k) r.samples.data()[k] = u(prng);
  const auto padded = model::pad_channels(r, 273);
  const bool kept = padded.channels() == 273 && (padded.samples.topRows(208).array() == r.samples.array()).all() &&
                    padded.samples.bottomRows(65).isZero(0.0);
  o.check(kept, "padding 208->273 keeps original channels and zero-fills the rest");
  return o;
}

std::vector<data::ManifestEntry> synthetic_pairs(std::size_t n) {
  std::vector<data::ManifestEntry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& e = out[i];
    e.signal_path = "rec" + std::to_string(i % 11) + ".npy";
    e.signal_rate_hz = 200;
    e.duration_s = e.end_s = 1.0;
    e.sentence = "sentence " + std::to_string(i % 1501);
    e.subject_id = std::to_string(i % 5);
    e.session_id = std::to_string(i % 2);
    e.story_id = "story" + std::to_string(i % 4);
  }
  return out;
}

std::string counts(const data::DatasetSplit& s) {
  return fmt::format("{}/{}/{}", s.train.size(), s.val.size(), s.test.size());
}

std::size_t sentence_overlap(const data::DatasetSplit& s) {
  std::set<std::string> train;
  for (const auto& e : s.train) train.insert(data::sentence_key(e));
  std::set<std::string> shared;
  for (const auto& e : s.test)
    if (train.count(data::sentence_key(e))) shared.insert(data::sentence_key(e));
  return shared.size();
}

Outcome split_reproduction() {
  Outcome o;
  data::SplitSpec spec;
  spec.seed = 3;
  const auto big = data::split_dataset(synthetic_pairs(29174), spec);
  o.check(counts(big) == "23339/2917/2918", "29174 entries -> " + counts(big));

  const auto entries = synthetic_pairs(29174);
  data::SplitSpec sentences;
  sentences.strategy = data::SplitStrategy::holdout_sentences;
  sentences.seed = 3;
  data::SplitSpec story;
  story.strategy = data::SplitStrategy::holdout_story;
  story.holdout_key = "story2";
  data::SplitSpec session;
  session.strategy = data::SplitStrategy::holdout_session;
  session.holdout_key = "1";
  for (const auto& [name, s] : std::vector<std::pair<std::string, data::SplitSpec>>{
           {"sentences", sentences}, {"story", story}, {"session", session}}) {
    const auto split = data::split_dataset(entries, s);
    const auto overlap = sentence_overlap(split);
    // Sentences recur across sessions in this corpus; check whole-session separation.
    if (name == "session") {
      bool whole = !split.test.empty();
      for (const auto& e : split.test) whole = whole && e.session_id == "1";
      for (const auto& e : split.train) whole = whole && e.session_id != "1";
      o.check(whole, "hold-out session: test is exactly session 1");
      continue;
    }
    o.check(overlap == 0 && !split.test.empty(), fmt::format("hold-out {}: {} shared sentences", name, overlap));
  }
  return o;
}

Outcome split_second_corpus() {
  Outcome o;
  data::SplitSpec spec;
  spec.seed = 3;
  const auto s = data::split_dataset(synthetic_pairs(10758), spec);
  o.check(counts(s) == "8570/1112/1076", "10758 entries -> " + counts(s) + " (expected 8570/1112/1076)");
  return o;
}

struct ToySetup {
  data::ToyCorpus corpus;
  data::DatasetSplit split;
  model::AdaptedModelSpec spec;
};

ToySetup toy_setup() {
  ToySetup t;
  t.corpus = data::synthesize_toy_dataset(20, 30, 8, 1000.0, 7);
  data::SplitSpec ss;
  ss.seed = 1;
  t.split = data::split_dataset(t.corpus.entries, ss);
  t.spec.backbone = "desk-tiny";
  t.spec.frontend.in_channels = 8;
  t.spec.frontend.d_model = 0;
  t.spec.seed = 3;
  return t;
}

Outcome synthetic_end_to_end() {
  Outcome o;
  const auto tb = Clock::now();
  const auto backbone = model::load_backbone(model::backbone_handle("desk-tiny"), model::default_backbone_cache());
  const double backbone_s = seconds_since(tb);
  (void)backbone;

  const auto t0 = Clock::now();
  auto t = toy_setup();
  auto model = model::build_adapted_model(t.spec, model::default_backbone_cache());
  const auto src = train::toy_source(t.corpus);
  const signal::PreprocessConfig pp;
  const int window = model.dims().input_window();
  const auto tr = train::build_dataset("train", t.split.train, src, pp, window, model.tokenizer());
  const auto va = train::build_dataset("val", t.split.val, src, pp, window, model.tokenizer());
  const auto te = train::build_dataset("test", t.split.test, src, pp, window, model.tokenizer());

  std::size_t decoder_trainable = 0, frozen_outside = 0;
  for (const auto& p : model::trainable_parameters(model)) {
    decoder_trainable += p->name.rfind(model::kDecoderPrefix, 0) == 0;
    frozen_outside += p->name.find("lora_") == std::string::npos && p->name.rfind(model::kFrontendPrefix, 0) != 0;
  }
  o.check(decoder_trainable == 0 && frozen_outside == 0, "only frontend and adapter tensors train");

  train::TrainConfig cfg;
  cfg.seed = 3;
  cfg.max_epochs = 40;
  train::TrainOptions opt;
  opt.model_spec = t.spec;
  const auto state = train::train(model, tr, va, cfg, opt);

  eval::GenerationConfig gen;
  const auto free_run = eval::evaluate_corpus(model, te, gen);
  gen.mode = eval::DecodeMode::teacher_forcing;
  const auto forced = eval::evaluate_corpus(model, te, gen);
  gen.mode = eval::DecodeMode::free_run;
  const auto noise = eval::noise_baseline(model, te, gen);
  const double elapsed = seconds_since(t0);

  o.check(free_run.bleu[0] >= kE2eMinBleu, fmt::format("free-run BLEU-1 {:.2f}", free_run.bleu[0]));
  o.check(forced.bleu[0] >= kE2eMinBleu, fmt::format("teacher-forcing BLEU-1 {:.2f}", forced.bleu[0]));
  o.check(noise.bleu[0] <= kNoiseMaxBleu, fmt::format("noise BLEU-1 {:.2f}", noise.bleu[0]));
  o.check(elapsed < kE2eMaxSeconds, fmt::format("{:.0f} s for {} epochs (backbone ready in {:.0f} s)", elapsed,
                                                state.epoch, backbone_s));
  return o;
}

nlohmann::json determinism_config() {
  return nlohmann::json::parse(R"({
    "dataset": {"toy": {"sentences": 6, "repeats": 10, "channels": 8, "rate_hz": 1000, "seed": 7},
                "split": {"strategy": "random_pairs", "ratios": [8, 1, 1], "seed": 1}},
    "model": {"backbone": "desk-tiny", "frontend": {"in_channels": 8, "d_model": 0}},
    "train": {"max_epochs": 3, "batch_size": 16},
    "augmentation": [{"kind": "noise", "snr_db": 15, "probability": 0.5},
                     {"kind": "block_mask", "ratio": 0.1, "probability": 0.5}],
    "output_dir": "out"
  })");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Silences std::cout for its lifetime.
class QuietStdout {
 public:
  QuietStdout() : saved_(std::cout.rdbuf(sink_.rdbuf())) {}
  ~QuietStdout() { std::cout.rdbuf(saved_); }
  QuietStdout(const QuietStdout&) = delete;
  QuietStdout& operator=(const QuietStdout&) = delete;

 private:
  std::ostringstream sink_;
  std::streambuf* saved_;
};

Outcome determinism() {
  Outcome o;
  const QuietStdout quiet;
  const auto root = fs::temp_directory_path() / "megtext_acceptance_determinism";
  fs::remove_all(root);
  std::vector<std::string> train_csv, ablate_csv;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / std::to_string(run);
    fs::create_directories(dir);
    std::ofstream(dir / "config.json") << determinism_config().dump(2);
    cli::GlobalOptions g;
    g.config = dir / "config.json";
    g.seed = 11;
    const auto ctx = cli::make_context(g);
    o.check(cli::cmd_train(ctx, false) == 0, fmt::format("train run {} exit 0", run + 1));
    train_csv.push_back(slurp(ctx.output_dir / "run" / "metrics.csv"));
    cli::AblateOptions ab;
    ab.sweep = cli::Sweep::data_ratio;
    ab.ratios = {0.5, 1.0};
    ab.epoch_cap = 2;
    o.check(cli::cmd_ablate(ctx, ab) == 0, fmt::format("ablate run {} exit 0", run + 1));
    ablate_csv.push_back(slurp(ctx.output_dir / "ablate" / "data_ratio.csv"));
  }
  o.check(!train_csv[0].empty() && train_csv[0] == train_csv[1], "train metrics.csv bit-identical");
  o.check(!ablate_csv[0].empty() && ablate_csv[0] == ablate_csv[1], "ablate data_ratio.csv bit-identical");
  return o;
}

std::vector<std::string> unique_words(const std::vector<data::ManifestEntry>& clips) {
  std::set<std::string> s;
  for (const auto& c : clips) s.insert(data::normalize_text(c.sentence));
  return {s.begin(), s.end()};
}

Outcome word_probe() {
  Outcome o;
  auto t = toy_setup();
  const auto src = train::toy_source(t.corpus);
  const signal::PreprocessConfig pp;
  const auto handle = model::backbone_handle("desk-tiny");
  const int window = handle.dims.input_window();
  const auto& tok = *handle.vocabulary;

  const auto test_clips = data::make_word_clips(t.split.test, true, 0, 1, 5);
  const auto probe_set = train::build_dataset("probe", test_clips, src, pp, window, tok);
  const auto vocab = unique_words(test_clips);
  eval::GenerationConfig gen;

  {
    model::Seq2SeqModel random(handle.dims, tok, 99);
    model::FrontendConfig fc;
    fc.in_channels = 8;
    fc.d_model = handle.dims.d_model;
    model::graft(random, model::build_frontend(fc, 99), window);
    const auto r = eval::word_probe_eval(random, probe_set, vocab, gen);
    const double n = static_cast<double>(r.clips);
    const double sigma = std::sqrt(n * r.chance * (1.0 - r.chance));
    const double dev = std::abs(static_cast<double>(r.correct) - n * r.chance);
    o.check(dev <= kBinomialSigmas * sigma,
            fmt::format("random weights {}/{} correct, chance {:.1f} +- {:.1f}", r.correct, r.clips, n * r.chance,
                        kBinomialSigmas * sigma));
  }

  auto model = model::build_adapted_model(t.spec, model::default_backbone_cache());
  const auto train_clips = data::make_word_clips(t.split.train, false, 3, 4, 6);
  const auto val_clips = data::make_word_clips(t.split.val, false, 3, 4, 7);
  const auto tr = train::build_dataset("train", train_clips, src, pp, window, tok);
  const auto va = train::build_dataset("val", val_clips, src, pp, window, tok);
  train::TrainConfig cfg;
  cfg.seed = 3;
  cfg.max_epochs = 30;
  train::TrainOptions opt;
  opt.model_spec = t.spec;
  train::train(model, tr, va, cfg, opt);
  const auto r = eval::word_probe_eval(model, probe_set, vocab, gen);
  o.check(r.ratio > kProbeMinRatio, fmt::format("trained {}/{} correct, {:.1f}x chance over {} words", r.correct,
                                                r.clips, r.ratio, r.vocabulary));
  return o;
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  std::optional<std::string> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) only = argv[++i];
    else if (a == "--verbose") spdlog::set_level(spdlog::level::info);
    else {
      std::cerr << "usage: acceptance [--only ID] [--verbose]\n";
      return 2;
    }
  }
  const std::vector<Criterion> criteria = {
      {"1", "preprocessing spectral suite", spectral_suite},
      {"2", "robust scaler oracle", scaler_oracle},
      {"3", "metric oracles", metric_oracles},
      {"4", "augmentation statistics", augmentation_statistics},
      {"5", "shape and freezing contracts", shape_contracts},
      {"6", "split reproduction", split_reproduction},
      {"6b", "split reproduction, 10758-entry corpus", split_second_corpus},
      {"7", "synthetic end-to-end", synthetic_end_to_end},
      {"8", "determinism", determinism},
      {"9", "word probe", word_probe},
  };
  bool all_ok = true, matched = false;
  for (const auto& c : criteria) {
    if (only && *only != c.id) continue;
    matched = true;
    Outcome out;
    const auto t0 = Clock::now();
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    std::string notes;
    for (const auto& n : out.notes) notes += (notes.empty() ? "" : "; ") + n;
    std::cout << fmt::format("{} criterion {} ({}) [{:.1f} s]: {}", out.ok ? "PASS" : "FAIL", c.id, c.title,
                             seconds_since(t0), notes)
              << std::endl;
    all_ok = all_ok && out.ok;
  }
  if (!matched) {
    std::cerr << "unknown criterion " << *only << "\n";
    return 2;
  }
  return all_ok ? 0 : 1;
}
