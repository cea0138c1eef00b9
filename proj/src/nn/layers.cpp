// SPDX-License-Identifier: Apache-2.0
#include "megtext/nn/layers.hpp"

#include <cmath>

#include "megtext/nn/ops.hpp"

namespace megtext::nn {

Mat randn(Eigen::Index rows, Eigen::Index cols, float std, InitRng& rng) {
  std::normal_distribution<float> normal(0.0f, std);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

LinearLayer LinearLayer::create(const std::string& name, int in, int out, bool with_bias, InitRng& rng) {
  LinearLayer l;
  l.weight = std::make_shared<Parameter>(name + ".weight", randn(in, out, 1.0f / std::sqrt(static_cast<float>(in)), rng));
  if (with_bias) l.bias = std::make_shared<Parameter>(name + ".bias", Mat::Zero(1, out));
  return l;
}

Var LinearLayer::forward(Graph& g, Var x) const {
  Var y = matmul(x, g.param(*weight));
  if (bias) y = add_bias(y, g.param(*bias));
  if (adapter) {
    Var h = matmul(x, g.param(*adapter->a));
    h = mul_cols(h, g.param(*adapter->e));
    h = matmul(h, g.param(*adapter->b));
    y = add(y, scale(h, adapter->scaling));
  }
  return y;
}

LayerNormLayer LayerNormLayer::create(const std::string& name, int width) {
  return {std::make_shared<Parameter>(name + ".gamma", Mat::Ones(1, width)),
          std::make_shared<Parameter>(name + ".beta", Mat::Zero(1, width))};
}

Var LayerNormLayer::forward(Graph& g, Var x) const { return layer_norm(x, g.param(*gamma), g.param(*beta)); }

Conv1dLayer Conv1dLayer::create(const std::string& name, int in, int out, int kernel, int stride, int pad,
                                InitRng& rng) {
  Conv1dLayer c;
  const float std = 1.0f / std::sqrt(static_cast<float>(kernel * in));
  c.weight = std::make_shared<Parameter>(name + ".weight", randn(kernel * in, out, std, rng));
  c.bias = std::make_shared<Parameter>(name + ".bias", Mat::Zero(1, out));
  c.kernel = kernel;
  c.stride = stride;
  c.pad = pad;
  return c;
}

Var Conv1dLayer::forward(Graph& g, Var x, int batch) const {
  return conv1d(x, g.param(*weight), g.param(*bias), batch, kernel, stride, pad);
}

ParamPtr clone_param(const ParamPtr& p) {
  auto c = std::make_shared<Parameter>(p->name, p->value);
  c->trainable = p->trainable;
  return c;
}

}  // namespace megtext::nn
