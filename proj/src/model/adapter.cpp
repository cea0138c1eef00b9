// SPDX-License-Identifier: Apache-2.0
#include "megtext/model/adapter.hpp"

#include <fstream>

#include "megtext/error.hpp"
#include "megtext/nn/archive.hpp"

namespace megtext::model {

void FrontendConfig::validate() const {
  if (in_channels < 1) throw ConfigError("frontend in_channels must be >= 1");
  if (d_model < 1) throw ConfigError("frontend d_model must be >= 1");
  if (kernel != 3 || stride1 != 1 || stride2 != 2 || padding != 1)
    throw ConfigError("frontend supports kernel 3, strides (1, 2) and padding 1");
}

void to_json(nlohmann::json& j, const FrontendConfig& c) {
  j = {{"in_channels", c.in_channels}, {"d_model", c.d_model}, {"kernel", c.kernel},
       {"strides", {c.stride1, c.stride2}}, {"padding", c.padding}};
}

void from_json(const nlohmann::json& j, FrontendConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "in_channels") c.in_channels = it->get<int>();
    else if (k == "d_model") c.d_model = it->get<int>();
    else if (k == "kernel") c.kernel = it->get<int>();
    else if (k == "strides") {
      c.stride1 = it->at(0).get<int>();
      c.stride2 = it->at(1).get<int>();
    } else if (k == "padding") c.padding = it->get<int>();
    else throw SchemaError("unknown frontend key '" + k + "'");
  }
}

InputStem build_frontend(const FrontendConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  return InputStem::create(kFrontendPrefix, cfg.in_channels, cfg.d_model, seed);
}

void graft(Seq2SeqModel& model, InputStem frontend, int window_samples) {
  if (window_samples < 1) throw ConfigError("input window must be positive");
  const int frames = InputStem::output_frames(window_samples);
  const int capacity = model.dims().encoder_capacity;
  if (frames != capacity)
    throw ConfigError("frontend yields " + std::to_string(frames) + " frames for a " +
                      std::to_string(window_samples) + "-sample window but the backbone encoder expects " +
                      std::to_string(capacity) + " frames");
  model.set_stem(std::move(frontend));
}

signal::Recording pad_channels(const signal::Recording& rec, int target_channels) {
  if (target_channels < rec.channels())
    throw ConfigError("cannot pad " + std::to_string(rec.channels()) + " channels down to " +
                      std::to_string(target_channels));
  signal::Recording out = rec;
  out.samples = signal::SampleMatrix::Zero(target_channels, rec.time_samples());
  out.samples.topRows(rec.channels()) = rec.samples;
  if (!rec.channel_names.empty()) {
    for (Eigen::Index c = rec.channels(); c < target_channels; ++c)
      out.channel_names.push_back("pad" + std::to_string(c - rec.channels()));
  }
  return out;
}

void TrainabilityPlan::validate() const {
  static const std::set<std::string> groups{"frontend", "encoder", "decoder"};
  for (const auto& g : frozen)
    if (!groups.count(g)) throw ConfigError("unknown parameter group '" + g + "'");
  for (const auto& g : adapted) {
    if (!groups.count(g)) throw ConfigError("unknown parameter group '" + g + "'");
    if (frozen.count(g)) throw ConfigError("group '" + g + "' is both frozen and adapted");
  }
  if (adapted.empty()) throw ConfigError("trainability plan adapts nothing");
  if (adapter_rank_budget < 1) throw ConfigError("adapter rank budget must be positive");
}

void to_json(nlohmann::json& j, const TrainabilityPlan& p) {
  j = {{"frozen", p.frozen}, {"adapted", p.adapted}, {"adapter_rank_budget", p.adapter_rank_budget},
       {"adalora", p.adalora}};
}

void from_json(const nlohmann::json& j, TrainabilityPlan& p) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "frozen") p.frozen = it->get<std::set<std::string>>();
    else if (k == "adapted") p.adapted = it->get<std::set<std::string>>();
    else if (k == "adapter_rank_budget") p.adapter_rank_budget = it->get<int>();
    else if (k == "adalora") p.adalora = it->get<nn::AdaLoraConfig>();
    else throw SchemaError("unknown trainability key '" + k + "'");
  }
  p.adalora.target_r = p.adapter_rank_budget;
  if (p.adalora.init_r < p.adalora.target_r) p.adalora.init_r = p.adalora.target_r;
  p.validate();
}

std::string parameter_group(const std::string& name) {
  for (const char* prefix : {kFrontendPrefix, kStemPrefix, kEncoderPrefix, kDecoderPrefix}) {
    const std::string p(prefix);
    if (name.rfind(p, 0) == 0) return p.substr(0, p.size() - 1);
  }
  return {};
}

namespace {
bool is_adapter_param(const std::string& name) { return name.find(".lora_") != std::string::npos; }

std::vector<nn::LinearLayer*> adaptable_linears(EncoderBlock& b) {
  return {&b.attn.q, &b.attn.k, &b.attn.v, &b.attn.o, &b.fc1, &b.fc2};
}
}  // namespace

void plan_trainability(Seq2SeqModel& model, const TrainabilityPlan& plan, std::uint64_t seed) {
  plan.validate();
  if (model.stem().conv1.weight->name.rfind(kFrontendPrefix, 0) != 0 && plan.adapted.count("frontend"))
    throw ConfigError("plan adapts the frontend but no frontend is grafted");
  nn::AdaLoraConfig ada = plan.adalora;
  ada.target_r = plan.adapter_rank_budget;
  if (ada.init_r < ada.target_r) ada.init_r = ada.target_r;
  ada.validate();

  nn::InitRng rng(seed ^ 0xADA10AULL);
  if (plan.adapted.count("encoder")) {
    for (auto& block : model.encoder_blocks()) {
      for (auto* lin : adaptable_linears(block)) {
        if (!lin->adapter) {
          const std::string base = lin->weight->name.substr(0, lin->weight->name.size() - std::string(".weight").size());
          lin->adapter = nn::make_adapter(base, lin->in_features(), lin->out_features(), ada, rng);
        }
      }
    }
  }
  std::size_t trainable = 0, total = 0;
  model.visit_slots([&](nn::ParamPtr& p) {
    const std::string group = parameter_group(p->name);
    p->trainable = plan.adapted.count(group) &&
                   (group == "frontend" || (group == "encoder" && is_adapter_param(p->name)));
    total += static_cast<std::size_t>(p->size());
    if (p->trainable) trainable += static_cast<std::size_t>(p->size());
  });
  if (trainable == 0) throw ConfigError("trainability plan leaves no trainable parameters");
  if (trainable >= total) throw ConfigError("trainability plan must freeze part of the model");
}

void freeze_layers_except_top_k(Seq2SeqModel& model, int k) {
  const int layers = static_cast<int>(model.encoder_blocks().size());
  if (k < 0 || k > layers)
    throw ConfigError("k = " + std::to_string(k) + " outside [0, " + std::to_string(layers) + "] encoder layers");
  for (int l = 0; l < layers; ++l) {
    const bool on = l >= layers - k;
    for (auto* lin : adaptable_linears(model.encoder_blocks()[static_cast<std::size_t>(l)])) {
      if (!lin->adapter) {
        if (on) throw ConfigError("encoder block " + std::to_string(l) + " has no adapter; apply a plan first");
        continue;
      }
      lin->adapter->a->trainable = lin->adapter->e->trainable = lin->adapter->b->trainable = on;
    }
  }
}

std::vector<nn::ParamPtr> trainable_parameters(const Seq2SeqModel& model) {
  std::vector<nn::ParamPtr> out;
  for (auto& p : model.parameters())
    if (p->trainable) out.push_back(p);
  return out;
}

std::vector<std::shared_ptr<nn::LowRankAdapter>> model_adapters(const Seq2SeqModel& model, bool trainable_only) {
  std::vector<std::shared_ptr<nn::LowRankAdapter>> out;
  for (auto& block : const_cast<Seq2SeqModel&>(model).encoder_blocks())
    for (auto* lin : adaptable_linears(block))
      if (lin->adapter && (!trainable_only || lin->adapter->e->trainable)) out.push_back(lin->adapter);
  return out;
}

void to_json(nlohmann::json& j, const AdaptedModelSpec& s) {
  j = {{"backbone", s.backbone}, {"language", s.language},           {"frontend", s.frontend},
       {"plan", s.plan},         {"trainable_top_k", s.trainable_top_k}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, AdaptedModelSpec& s) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "backbone") s.backbone = it->get<std::string>();
    else if (k == "language") s.language = it->get<std::string>();
    else if (k == "frontend") s.frontend = it->get<FrontendConfig>();
    else if (k == "plan") s.plan = it->get<TrainabilityPlan>();
    else if (k == "trainable_top_k") s.trainable_top_k = it->get<int>();
    else if (k == "seed") s.seed = it->get<std::uint64_t>();
    else throw SchemaError("unknown model key '" + k + "'");
  }
}

Seq2SeqModel build_adapted_model(AdaptedModelSpec spec, const std::filesystem::path& cache_dir) {
  const BackboneHandle handle = backbone_handle(spec.backbone, spec.language);
  Seq2SeqModel model = load_backbone(handle, cache_dir);
  if (spec.frontend.d_model == 0) spec.frontend.d_model = handle.dims.d_model;
  if (spec.frontend.d_model != handle.dims.d_model)
    throw ConfigError("frontend d_model " + std::to_string(spec.frontend.d_model) + " does not match backbone width " +
                      std::to_string(handle.dims.d_model));
  graft(model, build_frontend(spec.frontend, spec.seed), handle.dims.input_window());
  plan_trainability(model, spec.plan, spec.seed);
  if (spec.trainable_top_k >= 0) freeze_layers_except_top_k(model, spec.trainable_top_k);
  return model;
}

void save_checkpoint(const std::filesystem::path& dir, const Seq2SeqModel& model, const AdaptedModelSpec& spec,
                     const nlohmann::json& extra) {
  std::filesystem::create_directories(dir);
  std::vector<nn::ParamPtr> own;
  for (auto& p : model.parameters())
    if (parameter_group(p->name) == "frontend" || is_adapter_param(p->name)) own.push_back(p);
  nn::save_tensors(dir / "adapter.bin", own);
  nlohmann::json meta = {{"format", 1}, {"backbone", spec.backbone}, {"spec", spec}, {"extra", extra}};
  std::ofstream(dir / "checkpoint.json") << meta.dump(2) << '\n';
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir, const std::filesystem::path& cache_dir) {
  const auto meta_path = dir / "checkpoint.json";
  if (!std::filesystem::exists(meta_path) || !std::filesystem::exists(dir / "adapter.bin"))
    throw ConfigError("no checkpoint at " + dir.string());
  std::ifstream in(meta_path);
  const auto meta = nlohmann::json::parse(in);
  LoadedCheckpoint out;
  out.spec = meta.at("spec").get<AdaptedModelSpec>();
  out.extra = meta.value("extra", nlohmann::json::object());
  out.model = std::make_unique<Seq2SeqModel>(build_adapted_model(out.spec, cache_dir));
  std::vector<nn::ParamPtr> own;
  for (auto& p : out.model->parameters())
    if (parameter_group(p->name) == "frontend" || is_adapter_param(p->name)) own.push_back(p);
  nn::assign_tensors(nn::load_tensors(dir / "adapter.bin"), own, true);
  return out;
}

}  // namespace megtext::model
