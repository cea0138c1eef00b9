// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <map>
#include <spdlog/spdlog.h>

#include "chart.hpp"
#include "megtext/data/segment.hpp"
#include "megtext/error.hpp"
#include "megtext/eval/report.hpp"
#include "megtext/model/backbone.hpp"
#include "megtext/signal/npy.hpp"

namespace fs = std::filesystem;

namespace megtext::cli {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string entry_label(const data::ManifestEntry& e) {
  return fmt::format("{} [{:.3f}s, {:.3f}s]", e.signal_path, e.start_s, e.end_s);
}

/// Collects per-entry failures while datasets are built.
struct ErrorLog {
  std::size_t count = 0;
  std::function<void(const data::ManifestEntry&, const std::exception&)> sink() {
    return [this](const data::ManifestEntry& e, const std::exception& err) {
      ++count;
      std::cerr << "error: " << entry_label(e) << ": " << err.what() << '\n';
    };
  }
};

struct Prepared {
  Corpus corpus;
  data::DatasetSplit split;
};

Prepared prepare(const Context& ctx) {
  Prepared p;
  p.corpus = load_corpus(ctx.config, ctx.loaded.base_dir);
  p.split = data::split_dataset(p.corpus.entries, ctx.config.dataset.split);
  spdlog::info("split {} entries into {}/{}/{}", p.corpus.entries.size(), p.split.train.size(), p.split.val.size(),
               p.split.test.size());
  return p;
}

train::Dataset fit_channels(train::Dataset ds, int want) {
  if (ds.empty()) return ds;
  const int have = ds.channels();
  if (have == want) return ds;
  if (have < want) return train::pad_dataset(std::move(ds), want);
  throw ConfigError(fmt::format("dataset '{}' has {} channels but the frontend takes {}", ds.name, have, want));
}

/// Train/val/eval datasets built once per input window.
class DatasetCache {
 public:
  DatasetCache(const Context& ctx, const Prepared& prep, ErrorLog& errors)
      : ctx_(ctx), prep_(prep), errors_(errors), source_(prep.corpus.source()) {}

  struct Sets {
    train::Dataset train, val, eval;
  };

  const Sets& get(int window, const model::Tokenizer& tok, int channels) {
    auto it = sets_.find({window, channels});
    if (it != sets_.end()) return it->second;
    const auto& pp = ctx_.config.preprocess;
    Sets s;
    s.train = fit_channels(train::build_dataset("train", prep_.split.train, source_, pp, window, tok, errors_.sink()),
                           channels);
    s.val = fit_channels(train::build_dataset("val", prep_.split.val, source_, pp, window, tok, errors_.sink()),
                         channels);
    const auto& eval_entries = prep_.split.test.empty() ? prep_.split.val : prep_.split.test;
    s.eval = fit_channels(train::build_dataset("test", eval_entries, source_, pp, window, tok, errors_.sink()),
                          channels);
    return sets_.emplace(std::pair{window, channels}, std::move(s)).first->second;
  }

 private:
  const Context& ctx_;
  const Prepared& prep_;
  ErrorLog& errors_;
  train::RecordingSource source_;
  std::map<std::pair<int, int>, Sets> sets_;
};

int input_window(const model::AdaptedModelSpec& spec) {
  return static_cast<int>(model::backbone_handle(spec.backbone, spec.language).dims.input_window());
}

}  // namespace

Context make_context(const GlobalOptions& opts) {
  Context ctx;
  ctx.loaded = load_config(opts.config);
  ctx.config = ctx.loaded.config;
  if (opts.seed) ctx.config.set_seed(*opts.seed);
  if (opts.output_dir) {
    ctx.output_dir = *opts.output_dir;
    ctx.config.output_dir = opts.output_dir->string();
  } else {
    fs::path out = ctx.config.output_dir;
    ctx.output_dir = out.is_relative() ? ctx.loaded.base_dir / out : out;
  }
  ctx.cache_dir = opts.cache_dir ? *opts.cache_dir : model::default_backbone_cache();
  return ctx;
}

int cmd_toy_gen(const Context& ctx, const std::optional<fs::path>& out_dir) {
  if (!ctx.config.dataset.toy) throw ConfigError("toy-gen needs a dataset.toy section");
  const auto corpus = load_corpus(ctx.config, ctx.loaded.base_dir);
  const fs::path dir = out_dir ? *out_dir : ctx.output_dir / "toy";
  data::write_toy_corpus(*corpus.toy, dir);
  std::cout << fmt::format("wrote {} entries over {} recordings to {}\n", corpus.entries.size(),
                           corpus.toy->recordings.size(), (dir / "manifest.jsonl").string());
  return 0;
}

int cmd_preprocess(const Context& ctx) {
  const auto corpus = load_corpus(ctx.config, ctx.loaded.base_dir);
  const auto source = corpus.source();
  const auto& pp = ctx.config.preprocess;
  pp.validate();
  const int window = input_window(ctx.config.model);
  const fs::path dir = ctx.output_dir / "preprocessed";
  fs::create_directories(dir / "segments");

  std::map<std::string, signal::Recording> cache;
  std::vector<data::ManifestEntry> stored;
  std::size_t failed = 0, truncated = 0;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    const auto& entry = corpus.entries[i];
    try {
      auto it = cache.find(entry.signal_path);
      if (it == cache.end()) it = cache.emplace(entry.signal_path, signal::preprocess(source(entry), pp)).first;
      auto windowed = data::fit_to_window(data::segment_recording(it->second, entry), window);
      if (windowed.truncated) ++truncated;
      const std::string name = fmt::format("segments/{:06d}.npy", i);
      data::ManifestEntry out = entry;
      out.signal_path = name;
      out.signal_rate_hz = windowed.recording.sample_rate_hz;
      out.start_s = 0.0;
      out.end_s = windowed.recording.duration_s();
      out.duration_s = out.end_s;
      out.extra["content_samples"] = windowed.content_samples;
      out.extra["source_signal_path"] = entry.signal_path;
      out.extra["source_start_s"] = entry.start_s;
      out.validate();
      signal::save_recording(dir / name, windowed.recording);
      stored.push_back(std::move(out));
    } catch (const std::exception& err) {
      ++failed;
      std::cerr << "error: " << entry_label(entry) << ": " << err.what() << '\n';
    }
  }
  data::write_manifest(dir / "manifest.jsonl", stored);
  std::cout << fmt::format("preprocessed {} of {} entries ({} failed, {} truncated) into {}\n", stored.size(),
                           corpus.entries.size(), failed, truncated, dir.string());
  return failed == 0 ? 0 : 1;
}

int cmd_split(const Context& ctx) {
  const auto prep = prepare(ctx);
  const fs::path dir = ctx.output_dir / "split";
  fs::create_directories(dir);
  data::write_manifest(dir / "train.jsonl", prep.split.train);
  data::write_manifest(dir / "val.jsonl", prep.split.val);
  data::write_manifest(dir / "test.jsonl", prep.split.test);
  write_text(dir / "split_report.json", data::split_report(ctx.config.dataset.split, prep.split).dump(2) + "\n");
  std::cout << fmt::format("train {} val {} test {} ({})\n", prep.split.train.size(), prep.split.val.size(),
                           prep.split.test.size(), dir.string());
  return 0;
}

int cmd_train(const Context& ctx, bool resume) {
  const auto prep = prepare(ctx);
  const auto& spec = ctx.config.model;
  auto model = model::build_adapted_model(spec, ctx.cache_dir);
  const int channels = model.stem().in_channels();
  ErrorLog errors;
  DatasetCache datasets(ctx, prep, errors);
  const auto& sets = datasets.get(static_cast<int>(model.dims().input_window()), model.tokenizer(), channels);

  const fs::path run_dir = ctx.output_dir / "run";
  if (!resume || !fs::exists(run_dir / "config.verbatim.json"))
    write_text(run_dir / "config.verbatim.json", ctx.loaded.text);
  train::TrainOptions opts;
  opts.augmentations = ctx.config.augmentation;
  opts.run_dir = run_dir;
  opts.config_snapshot = ctx.config;
  opts.model_spec = spec;
  opts.resume = resume;
  opts.on_epoch = [](const train::RunState& s) {
    spdlog::info("epoch {} train {:.5f} val {:.5f}", s.epoch, s.train_loss, s.eval_loss_history.back());
  };
  const auto state = train::train(model, sets.train, sets.val, ctx.config.train, opts);
  std::cout << fmt::format("trained {} epochs, best epoch {} val loss {:.6f}{}; run in {}\n", state.epoch,
                           state.best_epoch, state.best_val_loss, state.stopped_early ? " (early stop)" : "",
                           run_dir.string());
  return errors.count == 0 ? 0 : 1;
}

int cmd_evaluate(const Context& ctx, const EvaluateOptions& opts) {
  const fs::path ckpt = opts.checkpoint ? *opts.checkpoint : ctx.output_dir / "run" / "checkpoints" / "best";
  if (!fs::exists(ckpt / "checkpoint.json")) throw ConfigError("checkpoint not found: " + ckpt.string());
  std::vector<eval::DecodeMode> modes;
  for (const auto& m : opts.modes.empty() ? std::vector<std::string>{"free_run", "tf"} : opts.modes)
    modes.push_back(eval::parse_decode_mode(m));
  if (opts.baseline && *opts.baseline != "noise") throw ConfigError("unknown baseline '" + *opts.baseline + "'");

  const auto prep = prepare(ctx);
  auto loaded = model::load_checkpoint(ckpt, ctx.cache_dir);
  const auto& model = *loaded.model;
  ErrorLog errors;
  DatasetCache datasets(ctx, prep, errors);
  const auto& test = datasets.get(static_cast<int>(model.dims().input_window()), model.tokenizer(),
                                  model.stem().in_channels()).eval;
  if (test.empty()) throw ConfigError("no evaluation entries");

  const fs::path dir = ctx.output_dir / "eval";
  auto emit = [&](const std::string& stem, const eval::EvaluationReport& r) {
    eval::write_report(dir, stem, r);
    std::cout << fmt::format("{:<16} BLEU-1 {:6.2f}  BLEU-4 {:6.2f}  ROUGE-1 F {:6.2f}  WER {:6.2f}  -> {}\n", stem,
                             r.bleu[0], r.bleu[3], r.rouge1.f, r.wer, (dir / (stem + ".json")).string());
  };
  for (auto mode : modes) {
    auto gen = ctx.config.eval;
    gen.mode = mode;
    emit(eval::to_string(mode), eval::evaluate_corpus(model, test, gen));
  }
  if (opts.baseline) {
    auto gen = ctx.config.eval;
    gen.mode = eval::DecodeMode::free_run;
    emit("noise_baseline", eval::noise_baseline(model, test, gen));
  }
  return errors.count == 0 ? 0 : 1;
}

Sweep parse_sweep(std::string_view name) {
  if (name == "scaling") return Sweep::scaling;
  if (name == "augmentation") return Sweep::augmentation;
  if (name == "data_ratio") return Sweep::data_ratio;
  if (name == "layers") return Sweep::layers;
  throw ConfigError("unknown sweep '" + std::string(name) + "'");
}

std::string to_string(Sweep s) {
  switch (s) {
    case Sweep::scaling: return "scaling";
    case Sweep::augmentation: return "augmentation";
    case Sweep::data_ratio: return "data_ratio";
    case Sweep::layers: return "layers";
  }
  return "?";
}

std::vector<augment::AugmentationSpec> default_augmentation_grid(double window_s) {
  using augment::AugmentKind;
  std::vector<augment::AugmentationSpec> grid;
  auto mask = [&](AugmentKind k, double ratio) {
    augment::AugmentationSpec s;
    s.kind = k;
    s.ratio = ratio;
    grid.push_back(s);
  };
  mask(AugmentKind::time_mask, 0.1);
  mask(AugmentKind::channel_mask, 0.1);
  mask(AugmentKind::block_mask, 0.1);
  mask(AugmentKind::block_mask, 0.3);
  for (double snr : {0.0, 15.0})
    for (double p : {0.5, 1.0}) {
      augment::AugmentationSpec s;
      s.kind = AugmentKind::noise;
      s.snr_db = snr;
      s.probability = p;
      grid.push_back(s);
    }
  for (double p : {0.5, 1.0}) {
    augment::AugmentationSpec s;
    s.kind = AugmentKind::shift;
    s.max_shift_s = window_s;
    s.probability = p;
    grid.push_back(s);
  }
  return grid;
}

std::string describe(const augment::AugmentationSpec& s) {
  std::string out = augment::to_string(s.kind);
  switch (s.kind) {
    case augment::AugmentKind::noise: out += fmt::format(" {:g}dB", s.snr_db); break;
    case augment::AugmentKind::shift: out += fmt::format(" {:g}s", s.max_shift_s); break;
    default: out += fmt::format(" {:g}", s.ratio);
  }
  return out + fmt::format(" p{:g}", s.probability);
}

int cmd_ablate(const Context& ctx, const AblateOptions& opts) {
  if (opts.epoch_cap < 0) throw ConfigError("epoch cap must be non-negative");
  const auto prep = prepare(ctx);
  ErrorLog errors;
  DatasetCache datasets(ctx, prep, errors);
  const auto& base_spec = ctx.config.model;
  train::TrainConfig base_train = ctx.config.train;
  if (opts.epoch_cap > 0) base_train.max_epochs = std::min(base_train.max_epochs, opts.epoch_cap);
  auto gen = ctx.config.eval;
  gen.mode = eval::DecodeMode::free_run;

  auto run_point = [&](const std::string& setting, const model::AdaptedModelSpec& spec, const train::TrainConfig& tc,
                       const std::vector<augment::AugmentationSpec>& augs) {
    train::SweepRow row;
    row.setting = setting;
    try {
      auto model = model::build_adapted_model(spec, ctx.cache_dir);
      const auto& sets =
          datasets.get(static_cast<int>(model.dims().input_window()), model.tokenizer(), model.stem().in_channels());
      train::TrainOptions to;
      to.model_spec = spec;
      to.augmentations = augs;
      const auto st = train::train(model, sets.train, sets.val, tc, to);
      row.effective_epochs = st.best_epoch;
      row.bleu1 = eval::evaluate_corpus(model, sets.eval, gen).bleu[0];
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    spdlog::info("{} {}: BLEU-1 {:.2f} epochs {} {}", to_string(opts.sweep), setting, row.bleu1, row.effective_epochs,
                 row.error);
    return row;
  };

  std::vector<train::SweepRow> rows;
  ChartSpec chart;
  switch (opts.sweep) {
    case Sweep::scaling: {
      const auto sizes = opts.sizes.empty() ? std::vector<std::string>{"desk-tiny", "desk-small"} : opts.sizes;
      const auto batches = opts.batches.empty() ? std::vector<int>(sizes.size(), base_train.batch_size) : opts.batches;
      if (batches.size() != sizes.size()) throw ConfigError("--batches must pair one batch size with each --sizes entry");
      for (std::size_t i = 0; i < sizes.size(); ++i) {
        try {
          model::AdaptedModelSpec s = base_spec;
          s.backbone = sizes[i];
          const auto handle = model::backbone_handle(s.backbone, s.language);
          const auto& sets = datasets.get(static_cast<int>(handle.dims.input_window()), *handle.vocabulary,
                                          s.frontend.in_channels);
          auto part = train::scaling_sweep({sizes[i]}, {batches[i]}, sets.train, sets.val, sets.eval,
                                           base_train.max_epochs, base_train, s, gen, ctx.cache_dir);
          rows.push_back(std::move(part.front()));
        } catch (const std::exception& e) {
          rows.push_back({sizes[i], 0.0, 0, e.what()});
        }
      }
      chart = {"BLEU-1 by backbone size", "backbone (batch size " + [&] {
                 std::string b;
                 for (std::size_t i = 0; i < batches.size(); ++i) b += (i ? "/" : "") + std::to_string(batches[i]);
                 return b;
               }() + ")", "BLEU-1", false, true};
      break;
    }
    case Sweep::augmentation: {
      const double window_s = input_window(base_spec) / ctx.config.preprocess.target_rate_hz;
      const auto grid = ctx.config.augmentation.empty() ? default_augmentation_grid(window_s) : ctx.config.augmentation;
      rows.push_back(run_point("none", base_spec, base_train, {}));
      for (const auto& a : grid) rows.push_back(run_point(describe(a), base_spec, base_train, {a}));
      chart = {"BLEU-1 by augmentation", "augmentation", "BLEU-1", true, false};
      break;
    }
    case Sweep::data_ratio: {
      const auto ratios = opts.ratios.empty() ? std::vector<double>{0.25, 0.5, 1.0} : opts.ratios;
      for (double r : ratios) {
        train::TrainConfig tc = base_train;
        tc.data_ratio = r;
        rows.push_back(run_point(fmt::format("{:g}", r), base_spec, tc, ctx.config.augmentation));
      }
      chart = {"BLEU-1 by training data ratio", "training data ratio", "BLEU-1", false, false};
      break;
    }
    case Sweep::layers: {
      auto layers = opts.layers;
      if (layers.empty()) {
        const int n = model::backbone_handle(base_spec.backbone, base_spec.language).dims.encoder_layers;
        for (int k = 1; k <= n; ++k) layers.push_back(k);
      }
      for (int k : layers) {
        model::AdaptedModelSpec s = base_spec;
        s.trainable_top_k = k;
        rows.push_back(run_point(std::to_string(k), s, base_train, ctx.config.augmentation));
      }
      chart = {"BLEU-1 by fine-tuned encoder layers", "fine-tuned encoder layers", "BLEU-1", false, false};
      break;
    }
  }

  const fs::path dir = ctx.output_dir / "ablate";
  const std::string stem = to_string(opts.sweep);
  write_sweep_csv(dir / (stem + ".csv"), rows);
  write_text(dir / (stem + ".svg"), render_chart(chart, rows, stem + ".csv"));
  std::size_t failed = 0;
  for (const auto& r : rows) {
    std::cout << fmt::format("{:<24} BLEU-1 {:6.2f}  epochs {:3d}{}\n", r.setting, r.bleu1, r.effective_epochs,
                             r.error.empty() ? "" : "  error: " + r.error);
    failed += r.error.empty() ? 0 : 1;
  }
  std::cout << fmt::format("{} rows ({} failed) -> {}\n", rows.size(), failed, (dir / (stem + ".csv")).string());
  return failed == 0 && errors.count == 0 ? 0 : 1;
}

}  // namespace megtext::cli
