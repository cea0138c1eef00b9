// SPDX-License-Identifier: Apache-2.0
#include "megtext/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>
#include <random>
#include <spdlog/spdlog.h>

#include "megtext/error.hpp"
#include "megtext/eval/report.hpp"
#include "megtext/model/batch.hpp"
#include "megtext/nn/adalora.hpp"
#include "megtext/nn/archive.hpp"
#include "megtext/nn/ops.hpp"

namespace megtext::train {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be positive");
  if (patience_epochs < 1) throw ConfigError("patience_epochs must be positive");
  if (!(data_ratio > 0 && data_ratio <= 1)) throw ConfigError("data_ratio must lie in (0, 1]");
  optimizer().validate();
}

nn::AdamWConfig TrainConfig::optimizer() const {
  nn::AdamWConfig o;
  o.learning_rate = static_cast<float>(learning_rate);
  o.weight_decay = static_cast<float>(weight_decay);
  o.beta1 = static_cast<float>(beta1);
  o.beta2 = static_cast<float>(beta2);
  o.warmup_steps = warmup_steps;
  o.max_grad_norm = static_cast<float>(max_grad_norm);
  return o;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
       {"max_epochs", c.max_epochs},       {"patience_epochs", c.patience_epochs},
       {"data_ratio", c.data_ratio},       {"seed", c.seed},
       {"optimizer", "adamw"},             {"weight_decay", c.weight_decay},
       {"betas", {c.beta1, c.beta2}},      {"warmup_steps", c.warmup_steps},
       {"lr_schedule", "linear-warmup-then-constant"},
       {"max_grad_norm", c.max_grad_norm}, {"loss", "token-cross-entropy"}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "learning_rate") c.learning_rate = it->get<double>();
    else if (k == "batch_size") c.batch_size = it->get<int>();
    else if (k == "max_epochs") c.max_epochs = it->get<int>();
    else if (k == "patience_epochs") c.patience_epochs = it->get<int>();
    else if (k == "data_ratio") c.data_ratio = it->get<double>();
    else if (k == "seed") c.seed = it->get<std::uint64_t>();
    else if (k == "weight_decay") c.weight_decay = it->get<double>();
    else if (k == "betas") {
      c.beta1 = it->at(0).get<double>();
      c.beta2 = it->at(1).get<double>();
    } else if (k == "warmup_steps") c.warmup_steps = it->get<int>();
    else if (k == "max_grad_norm") c.max_grad_norm = it->get<double>();
    else if (k == "optimizer") {
      if (it->get<std::string>() != "adamw") throw ConfigError("only the adamw optimizer is supported");
    } else if (k == "lr_schedule") {
      if (it->get<std::string>() != "linear-warmup-then-constant") throw ConfigError("unsupported lr_schedule");
    } else if (k == "loss") {
      if (it->get<std::string>() != "token-cross-entropy") throw ConfigError("unsupported loss");
    } else throw SchemaError("unknown train key '" + k + "'");
  }
  c.validate();
}

void to_json(nlohmann::json& j, const RunState& s) {
  j = {{"epoch", s.epoch},
       {"train_loss", std::isfinite(s.train_loss) ? nlohmann::json(s.train_loss) : nlohmann::json(nullptr)},
       {"train_loss_history", s.train_loss_history},
       {"eval_loss_history", s.eval_loss_history},
       {"best_epoch", s.best_epoch},
       {"best_val_loss", std::isfinite(s.best_val_loss) ? nlohmann::json(s.best_val_loss) : nlohmann::json(nullptr)},
       {"stopped_early", s.stopped_early},
       {"steps", s.steps}};
}

void from_json(const nlohmann::json& j, RunState& s) {
  static const std::set<std::string> known = {"epoch",      "train_loss",   "train_loss_history", "eval_loss_history",
                                              "best_epoch", "best_val_loss", "stopped_early",     "steps"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw SchemaError("unknown run state key '" + it.key() + "'");
  s.epoch = j.at("epoch").get<int>();
  s.train_loss = j.at("train_loss").is_null() ? std::nan("") : j.at("train_loss").get<double>();
  s.train_loss_history = j.at("train_loss_history").get<std::vector<double>>();
  s.eval_loss_history = j.at("eval_loss_history").get<std::vector<double>>();
  s.best_epoch = j.at("best_epoch").get<int>();
  s.best_val_loss = j.at("best_val_loss").is_null() ? std::numeric_limits<double>::infinity()
                                                    : j.at("best_val_loss").get<double>();
  s.stopped_early = j.at("stopped_early").get<bool>();
  s.steps = j.at("steps").get<long>();
}

EarlyStopper::EarlyStopper(int patience) : patience_(patience) {
  if (patience < 1) throw ConfigError("patience must be >= 1");
}

bool EarlyStopper::update(double loss) {
  ++epoch_;
  if (loss < best_) {
    best_ = loss;
    best_epoch_ = epoch_;
  }
  return epoch_ - best_epoch_ >= patience_;
}

namespace {

struct Batch {
  nn::Mat input;
  model::TokenBatch tokens;
  int size = 0;
};

Batch make_batch(const std::vector<const Example*>& examples) {
  Batch b;
  b.size = static_cast<int>(examples.size());
  b.input = stack_inputs(examples);
  std::vector<std::vector<int>> words;
  std::vector<int> langs;
  for (const auto* ex : examples) {
    words.push_back(ex->words);
    langs.push_back(ex->language_token);
  }
  b.tokens = model::make_token_batch(words, langs);
  return b;
}

std::pair<double, std::size_t> batch_loss(const model::Seq2SeqModel& m, nn::Graph& g, const Batch& b,
                                          nn::Var* loss_out) {
  auto enc = m.encode(g, b.input, b.size);
  auto mem = m.memory(g, enc, b.size);
  auto logits = m.decode(g, mem, b.tokens.inputs, b.size);
  auto loss = nn::cross_entropy(logits, b.tokens.targets);
  const auto counted =
      static_cast<std::size_t>(std::count_if(b.tokens.targets.begin(), b.tokens.targets.end(), [](int t) { return t >= 0; }));
  if (loss_out) *loss_out = loss;
  return {static_cast<double>(loss.value()(0, 0)), counted};
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(c)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

std::string format_loss(double v) { return fmt::format("{:.9g}", v); }

void write_metrics_csv(const std::filesystem::path& path, const RunState& s) {
  std::ofstream out(path);
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < s.eval_loss_history.size(); ++i)
    out << (i + 1) << ',' << format_loss(s.train_loss_history[i]) << ',' << format_loss(s.eval_loss_history[i])
        << '\n';
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream(path) << j.dump(2) << '\n';
}

}  // namespace

double evaluate_loss(const model::Seq2SeqModel& model, const Dataset& data, int batch_size) {
  if (data.empty()) throw ConfigError("cannot evaluate loss on an empty dataset");
  double total = 0.0;
  std::size_t tokens = 0;
  for (std::size_t start = 0; start < data.size(); start += static_cast<std::size_t>(batch_size)) {
    std::vector<const Example*> items;
    for (std::size_t i = start; i < std::min(data.size(), start + static_cast<std::size_t>(batch_size)); ++i)
      items.push_back(&data.examples[i]);
    nn::Graph g(false);
    const auto [loss, n] = batch_loss(model, g, make_batch(items), nullptr);
    total += loss * static_cast<double>(n);
    tokens += n;
  }
  return total / static_cast<double>(std::max<std::size_t>(1, tokens));
}

RunState train(model::Seq2SeqModel& model, const Dataset& train_in, const Dataset& val_set, const TrainConfig& cfg,
               const TrainOptions& options) {
  cfg.validate();
  if (train_in.empty() || val_set.empty()) throw ConfigError("training and validation sets must be non-empty");
  for (const auto& a : options.augmentations) a.validate();
  const Dataset train_set = cfg.data_ratio < 1.0 ? subsample_data_ratio(train_in, cfg.data_ratio, cfg.seed) : train_in;

  const auto params = model::trainable_parameters(model);
  if (params.empty()) throw ConfigError("model has no trainable parameters");
  nn::AdamW opt(params, cfg.optimizer());

  const std::size_t n = train_set.size();
  const auto bs = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((n + bs - 1) / bs);
  const auto adapters = model::model_adapters(model, true);
  const nn::AdaLoraConfig ada = options.model_spec.plan.adalora;
  std::optional<nn::RankAllocator> allocator;
  if (!adapters.empty()) allocator.emplace(adapters, ada, steps_per_epoch * cfg.max_epochs);

  RunState state;
  EarlyStopper stopper(cfg.patience_epochs);
  std::vector<nn::Mat> best_values;
  auto snapshot = [&] {
    best_values.clear();
    for (const auto& p : params) best_values.push_back(p->value);
  };
  snapshot();

  std::filesystem::path ckpt_dir;
  if (options.run_dir) {
    std::filesystem::create_directories(*options.run_dir);
    ckpt_dir = *options.run_dir / "checkpoints";
    const nlohmann::json snap = options.config_snapshot.is_null() ? nlohmann::json(cfg) : options.config_snapshot;
    if (!options.resume || !std::filesystem::exists(*options.run_dir / "config.json"))
      write_json(*options.run_dir / "config.json", snap);
  }

  if (options.resume && options.run_dir && std::filesystem::exists(ckpt_dir / "last" / "trainer_state.bin")) {
    std::ifstream in(*options.run_dir / "run_state.json");
    state = nlohmann::json::parse(in).get<RunState>();
    const auto ts = nn::load_tensors(ckpt_dir / "last" / "trainer_state.bin");
    nn::assign_tensors(nn::load_tensors(ckpt_dir / "best" / "adapter.bin"), params, true);
    snapshot();
    nn::assign_tensors(nn::load_tensors(ckpt_dir / "last" / "adapter.bin"), params, true);
    nn::TensorMap opt_state, alloc_state;
    for (const auto& [k, v] : ts) {
      if (k.rfind("opt/", 0) == 0) opt_state.emplace(k.substr(4), v);
      else if (k.rfind("alloc/", 0) == 0) alloc_state.emplace(k.substr(6), v);
    }
    opt.load_state(opt_state);
    if (allocator) allocator->load_state(alloc_state);
    for (double l : state.eval_loss_history) stopper.update(l);
    spdlog::info("resuming after epoch {}", state.epoch);
    if (state.stopped_early || state.epoch >= cfg.max_epochs) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
      return state;
    }
  }

  std::vector<std::size_t> order(n);
  for (int epoch = state.epoch + 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix(cfg.seed, 0x5401F1E, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (std::size_t start = 0; start < n; start += bs) {
      std::vector<Example> augmented;
      std::vector<const Example*> items;
      const std::size_t stop = std::min(n, start + bs);
      if (!options.augmentations.empty()) augmented.reserve(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        const Example& src = train_set.examples[order[i]];
        if (options.augmentations.empty()) {
          items.push_back(&src);
          continue;
        }
        Example ex = src;
        for (std::size_t k = 0; k < options.augmentations.size(); ++k) {
          const auto& spec = options.augmentations[k];
          augment::Rng rng(mix(cfg.seed ^ spec.seed, static_cast<std::uint64_t>(epoch), order[i], k));
          auto [rec, entry] = augment::apply(std::move(ex.window), std::move(ex.entry), spec, rng);
          ex.window = std::move(rec);
          ex.entry = std::move(entry);
        }
        augmented.push_back(std::move(ex));
        items.push_back(&augmented.back());
      }
      nn::Graph g;
      nn::Var loss;
      const auto [l, count] = batch_loss(model, g, make_batch(items), &loss);
      if (!std::isfinite(l))
        throw NumericError(fmt::format("non-finite training loss at epoch {} step {}", epoch, state.steps + 1));
      g.backward(loss);
      nn::orthogonal_regularization(adapters, ada.orth_reg_weight);
      opt.clip_gradients();
      opt.step();
      ++state.steps;
      if (allocator) allocator->update_and_allocate(state.steps);
      opt.zero_grad();
      loss_sum += l * static_cast<double>(count);
      token_sum += count;
    }
    state.epoch = epoch;
    state.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, token_sum));
    state.train_loss_history.push_back(state.train_loss);
    const double val = evaluate_loss(model, val_set, cfg.batch_size);
    if (!std::isfinite(val)) throw NumericError(fmt::format("non-finite validation loss at epoch {}", epoch));
    state.eval_loss_history.push_back(val);
    const bool stop = stopper.update(val);
    state.best_epoch = stopper.best_epoch();
    state.best_val_loss = stopper.best_loss();
    if (stopper.improved_last()) snapshot();
    state.stopped_early = stop && epoch < cfg.max_epochs;
    spdlog::debug("epoch {} train {:.5f} val {:.5f} best {}", epoch, state.train_loss, val, state.best_epoch);

    if (options.run_dir) {
      write_metrics_csv(*options.run_dir / "metrics.csv", state);
      const nlohmann::json extra = {{"epoch", epoch}, {"val_loss", val}};
      model::save_checkpoint(ckpt_dir / "last", model, options.model_spec, extra);
      nn::TensorMap ts;
      for (auto& [k, v] : opt.state()) ts.emplace("opt/" + k, v);
      if (allocator)
        for (auto& [k, v] : allocator->state()) ts.emplace("alloc/" + k, v);
      nn::save_tensors(ckpt_dir / "last" / "trainer_state.bin", ts);
      if (stopper.improved_last()) model::save_checkpoint(ckpt_dir / "best", model, options.model_spec, extra);
      write_json(*options.run_dir / "run_state.json", state);
    }
    if (options.on_epoch) options.on_epoch(state);
    if (stop) break;
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  return state;
}

TrainOutcome finetune_from(const std::filesystem::path& checkpoint_dir, const std::filesystem::path& cache_dir,
                           Dataset train_set, Dataset val_set, const TrainConfig& cfg, TrainOptions options,
                           bool allow_padding) {
  auto loaded = model::load_checkpoint(checkpoint_dir, cache_dir);
  const int want = loaded.model->stem().in_channels();
  for (Dataset* ds : {&train_set, &val_set}) {
    const int have = ds->channels();
    if (have == want) continue;
    if (have < want && allow_padding) {
      *ds = pad_dataset(std::move(*ds), want);
      continue;
    }
    throw ConfigError("dataset '" + ds->name + "' has " + std::to_string(have) + " channels, checkpoint frontend expects " +
                      std::to_string(want) + (have < want ? " (padding disabled)" : ""));
  }
  options.model_spec = loaded.spec;
  TrainOutcome out{std::move(*loaded.model), {}, {}};
  out.state = train(out.model, train_set, val_set, cfg, options);
  return out;
}

TrainOutcome joint_train(std::vector<JointDataset> datasets, model::AdaptedModelSpec spec,
                         const std::filesystem::path& cache_dir, const TrainConfig& cfg, TrainOptions options) {
  if (datasets.size() < 2) throw ConfigError("joint training needs at least two datasets");
  int channels = 0;
  for (const auto& d : datasets) {
    if (d.train.empty() || d.val.empty()) throw ConfigError("joint training dataset '" + d.train.name + "' is empty");
    channels = std::max({channels, d.train.channels(), d.val.channels()});
  }
  Dataset pooled_train, pooled_val;
  pooled_train.name = "joint";
  pooled_val.name = "joint";
  for (auto& d : datasets) {
    d.train = pad_dataset(std::move(d.train), channels);
    d.val = pad_dataset(std::move(d.val), channels);
    pooled_train.examples.insert(pooled_train.examples.end(), d.train.examples.begin(), d.train.examples.end());
    pooled_val.examples.insert(pooled_val.examples.end(), d.val.examples.begin(), d.val.examples.end());
  }
  spec.frontend.in_channels = channels;
  options.model_spec = spec;
  TrainOutcome out{model::build_adapted_model(spec, cache_dir), {}, {}};
  out.state = train(out.model, pooled_train, pooled_val, cfg, options);
  for (const auto& d : datasets) out.per_dataset_val_loss.push_back(evaluate_loss(out.model, d.val, cfg.batch_size));
  return out;
}

std::vector<std::size_t> subsample_indices(std::size_t n, double ratio, std::uint64_t seed) {
  if (!(ratio > 0 && ratio <= 1)) throw ConfigError("data ratio must lie in (0, 1]");
  const auto keep = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
  if (keep == 0) throw ConfigError("data ratio leaves an empty training set");
  std::mt19937_64 rng(seed ^ 0xDA7A5EEDULL);
  std::vector<std::uint64_t> key(n);
  for (auto& k : key) k = rng();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return key[a] != key[b] ? key[a] < key[b] : a < b; });
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  return idx;
}

Dataset subsample_data_ratio(const Dataset& data, double ratio, std::uint64_t seed) {
  Dataset out;
  out.name = data.name;
  for (std::size_t i : subsample_indices(data.size(), ratio, seed)) out.examples.push_back(data.examples[i]);
  return out;
}

std::vector<SweepRow> scaling_sweep(const std::vector<std::string>& sizes, const std::vector<int>& batch_sizes,
                                    const Dataset& train_set, const Dataset& val_set, const Dataset& eval_set,
                                    int epoch_cap, const TrainConfig& cfg, const model::AdaptedModelSpec& spec,
                                    const eval::GenerationConfig& gen, const std::filesystem::path& cache_dir) {
  if (sizes.size() != batch_sizes.size()) throw ConfigError("sizes and batch sizes differ in length");
  if (epoch_cap < 1) throw ConfigError("epoch cap must be positive");
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    SweepRow row;
    row.setting = sizes[i];
    try {
      model::AdaptedModelSpec s = spec;
      s.backbone = sizes[i];
      s.frontend.d_model = 0;
      s.frontend.in_channels = train_set.channels();
      TrainConfig c = cfg;
      c.batch_size = batch_sizes[i];
      c.max_epochs = std::min(cfg.max_epochs, epoch_cap);
      auto model = model::build_adapted_model(s, cache_dir);
      TrainOptions opts;
      opts.model_spec = s;
      const RunState st = train(model, train_set, val_set, c, opts);
      row.effective_epochs = st.best_epoch;
      row.bleu1 = eval::evaluate_corpus(model, eval_set, gen).bleu[0];
    } catch (const std::exception& e) {
      row.error = e.what();
      spdlog::warn("scaling sweep run '{}' failed: {}", sizes[i], e.what());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace megtext::train
