// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "megtext/nn/graph.hpp"

namespace megtext::nn {

// Activations are stacked row-wise: a batch of B sequences of length T is a
// (B*T) x features matrix, sequence b occupying rows [b*T, (b+1)*T).

Var matmul(Var a, Var b);
Var matmul_nt(Var a, Var b);     // a * b^T
Var slice_rows(Var x, Eigen::Index first, Eigen::Index count);
Var add(Var a, Var b);
Var add_bias(Var x, Var bias);     // bias is 1 x cols
Var mul_cols(Var x, Var scale);    // x * diag(scale), scale is 1 x cols
Var scale(Var x, float s);
Var gelu(Var x);                   // exact (erf) form
Var layer_norm(Var x, Var gamma, Var beta, float eps = 1e-5f);

/// Multi-head scaled dot-product attention. q is (batch*tq) x d, k and v are
/// (batch*tk) x d; heads split the columns. `causal` masks keys after the query.
/// With `shared_kv`, k and v hold a single sequence attended by every query batch.
Var attention(Var q, Var k, Var v, int batch, int heads, bool causal, bool shared_kv = false);

/// 1-D convolution. x is (batch*t_in) x c_in; weight is (kernel*c_in) x c_out with
/// tap j occupying rows [j*c_in, (j+1)*c_in); output is (batch*t_out) x c_out with
/// t_out = (t_in + 2*pad - kernel) / stride + 1.
Var conv1d(Var x, Var weight, Var bias, int batch, int kernel, int stride, int pad);

/// Adds a t x d positional table to each of the `batch` stacked sequences.
Var add_positional(Var x, Var table, int batch);

/// Row gather from an embedding table.
Var embedding(Var table, const std::vector<int>& ids);

/// Mean token cross-entropy over rows whose target is >= 0.
Var cross_entropy(Var logits, const std::vector<int>& targets);

/// Output rows of conv1d for the given input length.
inline int conv_out_len(int t_in, int kernel, int stride, int pad) { return (t_in + 2 * pad - kernel) / stride + 1; }

}  // namespace megtext::nn
