// SPDX-License-Identifier: Apache-2.0
#include "megtext/nn/adalora.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <tuple>

#include "megtext/error.hpp"

namespace megtext::nn {

void AdaLoraConfig::validate() const {
  if (init_r < 1 || target_r < 1 || target_r > init_r) throw ConfigError("AdaLoRA ranks need 1 <= target_r <= init_r");
  if (!(alpha > 0)) throw ConfigError("AdaLoRA alpha must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("AdaLoRA betas must lie in [0, 1)");
  if (orth_reg_weight < 0) throw ConfigError("orth_reg_weight must be non-negative");
  if (tinit < 0 || tfinal < 0 || delta_t < 1) throw ConfigError("invalid AdaLoRA schedule");
}

void to_json(nlohmann::json& j, const AdaLoraConfig& c) {
  j = {{"init_r", c.init_r},   {"target_r", c.target_r}, {"alpha", c.alpha},
       {"beta1", c.beta1},     {"beta2", c.beta2},       {"orth_reg_weight", c.orth_reg_weight},
       {"tinit", c.tinit},     {"tfinal", c.tfinal},     {"delta_t", c.delta_t},
       {"init_std", c.init_std}};
}

void from_json(const nlohmann::json& j, AdaLoraConfig& c) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k == "init_r") c.init_r = it->get<int>();
    else if (k == "target_r") c.target_r = it->get<int>();
    else if (k == "alpha") c.alpha = it->get<float>();
    else if (k == "beta1") c.beta1 = it->get<float>();
    else if (k == "beta2") c.beta2 = it->get<float>();
    else if (k == "orth_reg_weight") c.orth_reg_weight = it->get<float>();
    else if (k == "tinit") c.tinit = it->get<int>();
    else if (k == "tfinal") c.tfinal = it->get<int>();
    else if (k == "delta_t") c.delta_t = it->get<int>();
    else if (k == "init_std") c.init_std = it->get<float>();
    else throw SchemaError("unknown adalora key '" + k + "'");
  }
  c.validate();
}

std::shared_ptr<LowRankAdapter> make_adapter(const std::string& name, int in, int out, const AdaLoraConfig& cfg,
                                             InitRng& rng) {
  auto a = std::make_shared<LowRankAdapter>();
  a->a = std::make_shared<Parameter>(name + ".lora_A", randn(in, cfg.init_r, cfg.init_std, rng));
  a->e = std::make_shared<Parameter>(name + ".lora_E", Mat::Zero(1, cfg.init_r));
  a->b = std::make_shared<Parameter>(name + ".lora_B", randn(cfg.init_r, out, cfg.init_std, rng));
  a->scaling = cfg.alpha / static_cast<float>(cfg.init_r);
  return a;
}

double orthogonal_regularization(const std::vector<std::shared_ptr<LowRankAdapter>>& adapters, float weight) {
  if (adapters.empty() || weight == 0.0f) return 0.0;
  double total = 0.0;
  std::vector<std::pair<Parameter*, bool>> factors;  // (param, rank along columns)
  for (const auto& ad : adapters) {
    if (ad->a->trainable) factors.emplace_back(ad->a.get(), true);
    if (ad->b->trainable) factors.emplace_back(ad->b.get(), false);
  }
  if (factors.empty()) return 0.0;
  const float w = weight / static_cast<float>(factors.size());
  for (auto [p, cols] : factors) {
    const Mat& v = p->value;
    const Eigen::Index r = cols ? v.cols() : v.rows();
    Mat cov = cols ? Mat(v.transpose() * v) : Mat(v * v.transpose());
    cov -= Mat::Identity(r, r);
    const double norm = cov.norm();
    total += norm;
    if (norm < 1e-12) continue;
    if (p->grad.size() == 0) p->grad = Mat::Zero(v.rows(), v.cols());
    const float s = static_cast<float>(2.0 * w / norm);
    if (cols) p->grad.noalias() += s * (v * cov);
    else p->grad.noalias() += s * (cov * v);
  }
  return weight * total / static_cast<double>(factors.size());
}

RankAllocator::RankAllocator(std::vector<std::shared_ptr<LowRankAdapter>> adapters, AdaLoraConfig cfg,
                             long total_steps)
    : adapters_(std::move(adapters)), cfg_(cfg), total_steps_(total_steps) {
  cfg_.validate();
  if (total_steps_ <= cfg_.tinit + cfg_.tfinal) throw ConfigError("AdaLoRA schedule longer than training");
  for (const auto& a : adapters_) {
    init_budget_ += a->rank();
    target_budget_ += cfg_.target_r;
    Scores s;
    s.ipt_a = s.unc_a = Mat::Zero(a->a->value.rows(), a->a->value.cols());
    s.ipt_e = s.unc_e = Mat::Zero(1, a->rank());
    s.ipt_b = s.unc_b = Mat::Zero(a->b->value.rows(), a->b->value.cols());
    scores_.push_back(std::move(s));
  }
}

int RankAllocator::budget(long step) const {
  if (step <= cfg_.tinit) return init_budget_;
  if (step > total_steps_ - cfg_.tfinal) return target_budget_;
  const double coeff =
      1.0 - static_cast<double>(step - cfg_.tinit) / static_cast<double>(total_steps_ - cfg_.tfinal - cfg_.tinit);
  return static_cast<int>((init_budget_ - target_budget_) * coeff * coeff * coeff + target_budget_);
}

void RankAllocator::update_importance() {
  auto ema = [&](const Parameter& p, Mat& ipt, Mat& unc) {
    if (p.grad.size() == 0) return;
    const Mat cur = (p.value.array() * p.grad.array()).abs().matrix();
    ipt = cfg_.beta1 * ipt + (1.0f - cfg_.beta1) * cur;
    unc = cfg_.beta2 * unc + (1.0f - cfg_.beta2) * (cur - ipt).cwiseAbs();
  };
  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    ema(*adapters_[i]->a, scores_[i].ipt_a, scores_[i].unc_a);
    ema(*adapters_[i]->e, scores_[i].ipt_e, scores_[i].unc_e);
    ema(*adapters_[i]->b, scores_[i].ipt_b, scores_[i].unc_b);
  }
}

void RankAllocator::mask_to_budget(int budget) {
  const int k = init_budget_ - budget;
  if (k <= 0) return;
  struct Slot {
    float score;
    std::size_t adapter;
    Eigen::Index rank;
  };
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    const auto& s = scores_[i];
    Eigen::VectorXf score = (s.ipt_e.array() * s.unc_e.array()).matrix().transpose();
    score += (s.ipt_a.array() * s.unc_a.array()).colwise().mean().matrix().transpose();
    score += (s.ipt_b.array() * s.unc_b.array()).rowwise().mean().matrix();
    for (Eigen::Index r = 0; r < score.size(); ++r) slots.push_back({score(r), i, r});
  }
  // Exactly k lowest-scoring triplets are masked; ties go to the earlier slot.
  std::nth_element(slots.begin(), slots.begin() + (k - 1), slots.end(), [](const Slot& a, const Slot& b) {
    if (a.score != b.score) return a.score < b.score;
    return std::tie(a.adapter, a.rank) < std::tie(b.adapter, b.rank);
  });
  for (auto it = slots.begin(); it != slots.begin() + k; ++it) adapters_[it->adapter]->e->value(0, it->rank) = 0.0f;
}

void RankAllocator::update_and_allocate(long step) {
  if (step < total_steps_ - cfg_.tfinal) update_importance();
  const int b = budget(step);
  const bool mask = step > cfg_.tinit && (step > total_steps_ - cfg_.tfinal || step % cfg_.delta_t == 0);
  if (mask) mask_to_budget(b);
}

int RankAllocator::active_rank() const {
  int n = 0;
  for (const auto& a : adapters_) n += static_cast<int>((a->e->value.array() != 0.0f).count());
  return n;
}

}  // namespace megtext::nn

namespace megtext::nn {

TensorMap RankAllocator::state() const {
  TensorMap out;
  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    const std::string k = adapters_[i]->e->name;
    const auto& s = scores_[i];
    out["ipt_a:" + k] = s.ipt_a;
    out["unc_a:" + k] = s.unc_a;
    out["ipt_e:" + k] = s.ipt_e;
    out["unc_e:" + k] = s.unc_e;
    out["ipt_b:" + k] = s.ipt_b;
    out["unc_b:" + k] = s.unc_b;
  }
  return out;
}

void RankAllocator::load_state(const TensorMap& state) {
  for (std::size_t i = 0; i < adapters_.size(); ++i) {
    const std::string k = adapters_[i]->e->name;
    auto& s = scores_[i];
    s.ipt_a = state.at("ipt_a:" + k);
    s.unc_a = state.at("unc_a:" + k);
    s.ipt_e = state.at("ipt_e:" + k);
    s.unc_e = state.at("unc_e:" + k);
    s.ipt_b = state.at("ipt_b:" + k);
    s.unc_b = state.at("unc_b:" + k);
  }
}

}  // namespace megtext::nn
