// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "megtext/nn/archive.hpp"
#include "megtext/nn/layers.hpp"

namespace megtext::nn {

/// Adaptive low-rank adaptation: each adapted matrix gets an SVD-form update
/// whose singular values are pruned toward a global rank budget by a
/// sensitivity-times-uncertainty importance score.
struct AdaLoraConfig {
  int init_r = 12;
  int target_r = 8;
  float alpha = 8.0f;
  float beta1 = 0.85f;
  float beta2 = 0.85f;
  float orth_reg_weight = 0.5f;
  int tinit = 0;
  int tfinal = 0;
  int delta_t = 1;
  float init_std = 0.02f;

  void validate() const;
};

void to_json(nlohmann::json& j, const AdaLoraConfig& c);
void from_json(const nlohmann::json& j, AdaLoraConfig& c);

std::shared_ptr<LowRankAdapter> make_adapter(const std::string& name, int in, int out, const AdaLoraConfig& cfg,
                                             InitRng& rng);

/// Adds weight * mean_over_factors(||P^T P - I||_F) to the factor gradients and
/// returns the weighted penalty.
double orthogonal_regularization(const std::vector<std::shared_ptr<LowRankAdapter>>& adapters, float weight);

class RankAllocator {
 public:
  RankAllocator(std::vector<std::shared_ptr<LowRankAdapter>> adapters, AdaLoraConfig cfg, long total_steps);

  /// Budget (total active singular values) scheduled for a step.
  int budget(long step) const;
  int initial_budget() const { return init_budget_; }
  int target_budget() const { return target_budget_; }

  /// Call after the optimizer step, before gradients are cleared.
  void update_and_allocate(long step);
  /// Singular values currently non-zero across all adapters.
  int active_rank() const;

  TensorMap state() const;
  void load_state(const TensorMap& state);

 private:
  void update_importance();
  void mask_to_budget(int budget);

  std::vector<std::shared_ptr<LowRankAdapter>> adapters_;
  AdaLoraConfig cfg_;
  long total_steps_;
  int init_budget_ = 0;
  int target_budget_ = 0;
  struct Scores {
    Mat ipt_a, unc_a, ipt_e, unc_e, ipt_b, unc_b;
  };
  std::vector<Scores> scores_;
};

}  // namespace megtext::nn
