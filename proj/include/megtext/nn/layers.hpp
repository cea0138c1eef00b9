// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "megtext/nn/graph.hpp"

namespace megtext::nn {

using InitRng = std::mt19937_64;

/// Matrix of N(0, std^2) draws.
Mat randn(Eigen::Index rows, Eigen::Index cols, float std, InitRng& rng);

/// Low-rank update in singular-value form: x -> ((x A) * diag(E)) B * scaling, with
/// A in x r, E 1 x r, B r x out. E starts at zero so the update is initially null.
struct LowRankAdapter {
  ParamPtr a, e, b;
  float scaling = 1.0f;
  int rank() const { return static_cast<int>(e->value.cols()); }
};

struct LinearLayer {
  ParamPtr weight;  // in x out
  ParamPtr bias;    // 1 x out, may be null
  std::shared_ptr<LowRankAdapter> adapter;

  static LinearLayer create(const std::string& name, int in, int out, bool with_bias, InitRng& rng);
  Var forward(Graph& g, Var x) const;
  int in_features() const { return static_cast<int>(weight->value.rows()); }
  int out_features() const { return static_cast<int>(weight->value.cols()); }
};

struct LayerNormLayer {
  ParamPtr gamma, beta;

  static LayerNormLayer create(const std::string& name, int width);
  Var forward(Graph& g, Var x) const;
};

struct Conv1dLayer {
  ParamPtr weight;  // (kernel * in) x out
  ParamPtr bias;    // 1 x out
  int kernel = 3;
  int stride = 1;
  int pad = 1;

  static Conv1dLayer create(const std::string& name, int in, int out, int kernel, int stride, int pad, InitRng& rng);
  Var forward(Graph& g, Var x, int batch) const;
  int in_channels() const { return static_cast<int>(weight->value.rows()) / kernel; }
  int out_channels() const { return static_cast<int>(weight->value.cols()); }
};

/// Deep copy: fresh Parameter objects with identical values and flags.
ParamPtr clone_param(const ParamPtr& p);

}  // namespace megtext::nn
