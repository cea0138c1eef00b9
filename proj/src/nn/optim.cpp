// SPDX-License-Identifier: Apache-2.0
#include "megtext/nn/optim.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "megtext/error.hpp"

namespace megtext::nn {

void AdamWConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
  if (weight_decay < 0) throw ConfigError("weight_decay must be non-negative");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("betas must lie in [0, 1)");
  if (!(eps > 0)) throw ConfigError("eps must be positive");
  if (warmup_steps < 0) throw ConfigError("warmup_steps must be non-negative");
}

void to_json(nlohmann::json& j, const AdamWConfig& c) {
  j = {{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay}, {"betas", {c.beta1, c.beta2}},
       {"eps", c.eps},                     {"warmup_steps", c.warmup_steps}, {"max_grad_norm", c.max_grad_norm}};
}

void from_json(const nlohmann::json& j, AdamWConfig& c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  if (j.contains("betas")) {
    c.beta1 = j.at("betas").at(0).get<float>();
    c.beta2 = j.at("betas").at(1).get<float>();
  }
  c.eps = j.value("eps", c.eps);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.max_grad_norm = j.value("max_grad_norm", c.max_grad_norm);
}

AdamW::AdamW(std::vector<ParamPtr> params, AdamWConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  cfg_.validate();
  for (const auto& p : params_) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

double grad_norm_squared(const std::vector<ParamPtr>& params) {
  double s = 0.0;
  for (const auto& p : params)
    if (p->grad.size() != 0) s += p->grad.cast<double>().squaredNorm();
  return s;
}

double AdamW::clip_gradients() {
  const double norm = std::sqrt(grad_norm_squared(params_));
  if (cfg_.max_grad_norm > 0 && norm > cfg_.max_grad_norm) {
    const float s = static_cast<float>(cfg_.max_grad_norm / (norm + 1e-6));
    for (auto& p : params_)
      if (p->grad.size() != 0) p->grad *= s;
  }
  return norm;
}

float AdamW::learning_rate() const {
  if (cfg_.warmup_steps == 0) return cfg_.learning_rate;
  const long t = step_ == 0 ? 1 : step_;
  return cfg_.learning_rate * std::min(1.0f, static_cast<float>(t) / static_cast<float>(cfg_.warmup_steps));
}

void AdamW::step() {
  ++step_;
  const float lr = learning_rate();
  const float bc1 = 1.0f - std::pow(cfg_.beta1, static_cast<float>(step_));
  const float bc2 = 1.0f - std::pow(cfg_.beta2, static_cast<float>(step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.grad.size() == 0) continue;
    p.value *= 1.0f - lr * cfg_.weight_decay;
    m_[i] = cfg_.beta1 * m_[i] + (1.0f - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0f - cfg_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

TensorMap AdamW::state() const {
  TensorMap out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out["m:" + params_[i]->name] = m_[i];
    out["v:" + params_[i]->name] = v_[i];
  }
  out["step"] = Mat::Constant(1, 1, static_cast<float>(step_));
  return out;
}

void AdamW::load_state(const TensorMap& state) {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto m = state.find("m:" + params_[i]->name), v = state.find("v:" + params_[i]->name);
    if (m == state.end() || v == state.end()) throw SchemaError("optimizer state lacks '" + params_[i]->name + "'");
    m_[i] = m->second;
    v_[i] = v->second;
  }
  step_ = static_cast<long>(state.at("step")(0, 0));
}

void AdamW::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

}  // namespace megtext::nn
