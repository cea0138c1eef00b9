// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "megtext/nn/archive.hpp"
#include "megtext/nn/graph.hpp"

namespace megtext::nn {

struct AdamWConfig {
  float learning_rate = 1e-3f;
  float weight_decay = 0.01f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  int warmup_steps = 100;      // linear ramp from 0, constant afterwards
  float max_grad_norm = 1.0f;  // <= 0 disables clipping

  void validate() const;
};

void to_json(nlohmann::json& j, const AdamWConfig& c);
void from_json(const nlohmann::json& j, AdamWConfig& c);

/// Adam with decoupled weight decay. Parameters whose gradient was never
/// allocated are skipped for the step.
class AdamW {
 public:
  AdamW(std::vector<ParamPtr> params, AdamWConfig cfg);

  /// Scales gradients to max_grad_norm and returns the pre-clip global norm.
  double clip_gradients();
  void step();
  void zero_grad();

  long steps() const { return step_; }
  float learning_rate() const;
  const std::vector<ParamPtr>& params() const { return params_; }

  /// Moments keyed "m:<param>" / "v:<param>" plus the step count.
  TensorMap state() const;
  void load_state(const TensorMap& state);

 private:
  std::vector<ParamPtr> params_;
  std::vector<Mat> m_, v_;
  AdamWConfig cfg_;
  long step_ = 0;
};

/// Sum of squared gradient entries over the given parameters.
double grad_norm_squared(const std::vector<ParamPtr>& params);

}  // namespace megtext::nn
