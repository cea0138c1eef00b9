// SPDX-License-Identifier: Apache-2.0
#include "megtext/nn/ops.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "megtext/error.hpp"

namespace megtext::nn {
namespace {

void check(bool cond, const char* what) {
  if (!cond) throw ConfigError(std::string("shape mismatch in ") + what);
}

constexpr float kInvSqrt2 = 0.70710678118654752f;
constexpr float kInvSqrt2Pi = 0.39894228040143268f;

}  // namespace

Var matmul(Var a, Var b) {
  check(a.cols() == b.rows(), "matmul");
  Graph& g = *a.graph;
  Mat y = a.value() * b.value();
  return g.record(std::move(y), {a, b}, [a, b](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    if (g.requires_grad(a)) g.grad(a.id).noalias() += dy * b.value().transpose();
    if (g.requires_grad(b)) g.grad(b.id).noalias() += a.value().transpose() * dy;
  });
}

Var matmul_nt(Var a, Var b) {
  check(a.cols() == b.cols(), "matmul_nt");
  Graph& g = *a.graph;
  Mat y = a.value() * b.value().transpose();
  return g.record(std::move(y), {a, b}, [a, b](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    if (g.requires_grad(a)) g.grad(a.id).noalias() += dy * b.value();
    if (g.requires_grad(b)) g.grad(b.id).noalias() += dy.transpose() * a.value();
  });
}

Var slice_rows(Var x, Eigen::Index first, Eigen::Index count) {
  check(first >= 0 && count >= 0 && first + count <= x.rows(), "slice_rows");
  Graph& g = *x.graph;
  return g.record(x.value().middleRows(first, count), {x}, [x, first, count](Graph& g, int self) {
    g.grad(x.id).middleRows(first, count) += g.grad(self);
  });
}

Var add(Var a, Var b) {
  check(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  Graph& g = *a.graph;
  return g.record(a.value() + b.value(), {a, b}, [a, b](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    if (g.requires_grad(a)) g.grad(a.id) += dy;
    if (g.requires_grad(b)) g.grad(b.id) += dy;
  });
}

Var add_bias(Var x, Var bias) {
  check(bias.rows() == 1 && bias.cols() == x.cols(), "add_bias");
  Graph& g = *x.graph;
  Mat y = x.value();
  y.rowwise() += bias.value().row(0);
  return g.record(std::move(y), {x, bias}, [x, bias](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    if (g.requires_grad(x)) g.grad(x.id) += dy;
    if (g.requires_grad(bias)) g.grad(bias.id) += dy.colwise().sum();
  });
}

Var mul_cols(Var x, Var s) {
  check(s.rows() == 1 && s.cols() == x.cols(), "mul_cols");
  Graph& g = *x.graph;
  Mat y = x.value() * s.value().row(0).asDiagonal();
  return g.record(std::move(y), {x, s}, [x, s](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    if (g.requires_grad(x)) g.grad(x.id) += dy * s.value().row(0).asDiagonal();
    if (g.requires_grad(s)) g.grad(s.id) += (dy.array() * x.value().array()).matrix().colwise().sum();
  });
}

Var scale(Var x, float s) {
  Graph& g = *x.graph;
  return g.record(x.value() * s, {x}, [x, s](Graph& g, int self) { g.grad(x.id) += g.grad(self) * s; });
}

Var gelu(Var x) {
  Graph& g = *x.graph;
  const Mat& xv = x.value();
  Mat y = xv.unaryExpr([](float v) { return 0.5f * v * (1.0f + std::erf(v * kInvSqrt2)); });
  return g.record(std::move(y), {x}, [x](Graph& g, int self) {
    const Mat& xv = x.value();
    const Mat dydx = xv.unaryExpr([](float v) {
      return 0.5f * (1.0f + std::erf(v * kInvSqrt2)) + v * kInvSqrt2Pi * std::exp(-0.5f * v * v);
    });
    g.grad(x.id).array() += g.grad(self).array() * dydx.array();
  });
}

Var layer_norm(Var x, Var gamma, Var beta, float eps) {
  check(gamma.cols() == x.cols() && beta.cols() == x.cols(), "layer_norm");
  Graph& g = *x.graph;
  const Mat& xv = x.value();
  const Eigen::Index n = xv.rows(), d = xv.cols();
  Mat xhat(n, d);
  Eigen::VectorXf inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const float mean = xv.row(i).mean();
    const float var = (xv.row(i).array() - mean).square().mean();
    inv_std(i) = 1.0f / std::sqrt(var + eps);
    xhat.row(i) = (xv.row(i).array() - mean) * inv_std(i);
  }
  Mat y = xhat * gamma.value().row(0).asDiagonal();
  y.rowwise() += beta.value().row(0);
  return g.record(std::move(y), {x, gamma, beta},
                  [x, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g, int self) {
                    const Mat& dy = g.grad(self);
                    if (g.requires_grad(gamma)) {
                      g.grad(gamma.id) += (dy.array() * xhat.array()).matrix().colwise().sum();
                    }
                    if (g.requires_grad(beta)) g.grad(beta.id) += dy.colwise().sum();
                    if (g.requires_grad(x)) {
                      const Mat dxhat = dy * gamma.value().row(0).asDiagonal();
                      Mat& dx = g.grad(x.id);
                      const auto d = static_cast<float>(dxhat.cols());
                      for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
                        const float m1 = dxhat.row(i).sum() / d;
                        const float m2 = dxhat.row(i).dot(xhat.row(i)) / d;
                        dx.row(i).array() += inv_std(i) * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
                      }
                    }
                  });
}

Var attention(Var q, Var k, Var v, int batch, int heads, bool causal, bool shared_kv) {
  const Eigen::Index d = q.cols();
  check(k.cols() == d && v.cols() == d && d % heads == 0, "attention width");
  check(q.rows() % batch == 0 && (shared_kv || k.rows() % batch == 0) && v.rows() == k.rows(), "attention batch");
  const Eigen::Index tq = q.rows() / batch, tk = shared_kv ? k.rows() : k.rows() / batch, dh = d / heads;
  const float sc = 1.0f / std::sqrt(static_cast<float>(dh));
  Graph& g = *q.graph;
  const Mat &qv = q.value(), &kv = k.value(), &vv = v.value();

  Mat out(q.rows(), d);
  std::vector<Mat> probs(static_cast<std::size_t>(batch * heads));
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < heads; ++h) {
      const auto qb = qv.block(b * tq, h * dh, tq, dh);
      const Eigen::Index kb0 = shared_kv ? 0 : b * tk;
      const auto kb = kv.block(kb0, h * dh, tk, dh);
      const auto vb = vv.block(kb0, h * dh, tk, dh);
      Mat s = (qb * kb.transpose()) * sc;
      for (Eigen::Index i = 0; i < tq; ++i) {
        auto row = s.row(i);
        const Eigen::Index visible = causal ? std::min(tk, i + 1) : tk;
        if (visible < tk) row.tail(tk - visible).setConstant(-std::numeric_limits<float>::infinity());
        const float mx = row.head(visible).maxCoeff();
        row = (row.array() - mx).exp();
        row /= row.sum();
      }
      out.block(b * tq, h * dh, tq, dh).noalias() = s * vb;
      probs[static_cast<std::size_t>(b * heads + h)] = std::move(s);
    }
  }
  return g.record(std::move(out), {q, k, v},
                  [q, k, v, batch, heads, tq, tk, dh, sc, shared_kv, probs = std::move(probs)](Graph& g, int self) {
                    const Mat& dout = g.grad(self);
                    const Mat &qv = q.value(), &kv = k.value(), &vv = v.value();
                    const bool gq = g.requires_grad(q), gk = g.requires_grad(k), gv = g.requires_grad(v);
                    for (int b = 0; b < batch; ++b) {
                      for (int h = 0; h < heads; ++h) {
                        const Mat& p = probs[static_cast<std::size_t>(b * heads + h)];
                        const auto dob = dout.block(b * tq, h * dh, tq, dh);
                        const Eigen::Index kb0 = shared_kv ? 0 : b * tk;
                        if (gv) g.grad(v.id).block(kb0, h * dh, tk, dh).noalias() += p.transpose() * dob;
                        if (!gq && !gk) continue;
                        Mat dp = dob * vv.block(kb0, h * dh, tk, dh).transpose();
                        const Eigen::VectorXf rowdot = (dp.array() * p.array()).rowwise().sum();
                        Mat ds = (p.array() * (dp.array().colwise() - rowdot.array())).matrix() * sc;
                        if (gq) g.grad(q.id).block(b * tq, h * dh, tq, dh).noalias() += ds * kv.block(kb0, h * dh, tk, dh);
                        if (gk) g.grad(k.id).block(kb0, h * dh, tk, dh).noalias() += ds.transpose() * qv.block(b * tq, h * dh, tq, dh);
                      }
                    }
                  });
}

Var conv1d(Var x, Var weight, Var bias, int batch, int kernel, int stride, int pad) {
  const Eigen::Index c_in = x.cols();
  check(weight.rows() == kernel * c_in && bias.cols() == weight.cols() && x.rows() % batch == 0, "conv1d");
  const int t_in = static_cast<int>(x.rows() / batch);
  const int t_out = conv_out_len(t_in, kernel, stride, pad);
  check(t_out >= 1, "conv1d length");
  Graph& g = *x.graph;
  const Mat& xv = x.value();

  Mat cols = Mat::Zero(static_cast<Eigen::Index>(batch) * t_out, kernel * c_in);
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < t_out; ++t) {
      for (int j = 0; j < kernel; ++j) {
        const int s = t * stride - pad + j;
        if (s < 0 || s >= t_in) continue;
        cols.block(b * t_out + t, j * c_in, 1, c_in) = xv.row(static_cast<Eigen::Index>(b) * t_in + s);
      }
    }
  }
  Mat y = cols * weight.value();
  y.rowwise() += bias.value().row(0);
  return g.record(std::move(y), {x, weight, bias},
                  [x, weight, bias, batch, kernel, stride, pad, t_in, t_out, c_in, cols = std::move(cols)](Graph& g,
                                                                                                           int self) {
                    const Mat& dy = g.grad(self);
                    if (g.requires_grad(weight)) g.grad(weight.id).noalias() += cols.transpose() * dy;
                    if (g.requires_grad(bias)) g.grad(bias.id) += dy.colwise().sum();
                    if (!g.requires_grad(x)) return;
                    const Mat dcols = dy * weight.value().transpose();
                    Mat& dx = g.grad(x.id);
                    for (int b = 0; b < batch; ++b) {
                      for (int t = 0; t < t_out; ++t) {
                        for (int j = 0; j < kernel; ++j) {
                          const int s = t * stride - pad + j;
                          if (s < 0 || s >= t_in) continue;
                          dx.row(static_cast<Eigen::Index>(b) * t_in + s) += dcols.block(b * t_out + t, j * c_in, 1, c_in);
                        }
                      }
                    }
                  });
}

Var add_positional(Var x, Var table, int batch) {
  check(x.rows() == table.rows() * batch && x.cols() == table.cols(), "add_positional");
  Graph& g = *x.graph;
  const Eigen::Index t = table.rows();
  Mat y = x.value();
  for (int b = 0; b < batch; ++b) y.middleRows(b * t, t) += table.value();
  return g.record(std::move(y), {x, table}, [x, table, batch, t](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    if (g.requires_grad(x)) g.grad(x.id) += dy;
    if (g.requires_grad(table)) {
      Mat& dt = g.grad(table.id);
      for (int b = 0; b < batch; ++b) dt += dy.middleRows(b * t, t);
    }
  });
}

Var embedding(Var table, const std::vector<int>& ids) {
  Graph& g = *table.graph;
  const Mat& tv = table.value();
  Mat y(static_cast<Eigen::Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.rows()) throw RangeError("token id " + std::to_string(ids[i]) + " out of range");
    y.row(static_cast<Eigen::Index>(i)) = tv.row(ids[i]);
  }
  return g.record(std::move(y), {table}, [table, ids](Graph& g, int self) {
    const Mat& dy = g.grad(self);
    Mat& dt = g.grad(table.id);
    for (std::size_t i = 0; i < ids.size(); ++i) dt.row(ids[i]) += dy.row(static_cast<Eigen::Index>(i));
  });
}

Var cross_entropy(Var logits, const std::vector<int>& targets) {
  check(static_cast<Eigen::Index>(targets.size()) == logits.rows(), "cross_entropy");
  Graph& g = *logits.graph;
  const Mat& lv = logits.value();
  Mat probs(lv.rows(), lv.cols());
  double total = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < lv.rows(); ++i) {
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0) {
      probs.row(i).setZero();
      continue;
    }
    if (t >= lv.cols()) throw RangeError("target id out of range");
    const float mx = lv.row(i).maxCoeff();
    probs.row(i) = (lv.row(i).array() - mx).exp();
    const float z = probs.row(i).sum();
    probs.row(i) /= z;
    total += -(static_cast<double>(lv(i, t)) - mx - std::log(static_cast<double>(z)));
    ++count;
  }
  if (count == 0) throw ConfigError("cross_entropy with no counted targets");
  Mat y(1, 1);
  y(0, 0) = static_cast<float>(total / count);
  return g.record(std::move(y), {logits}, [logits, targets, count, probs = std::move(probs)](Graph& g, int self) {
    const float dl = g.grad(self)(0, 0) / static_cast<float>(count);
    Mat& dx = g.grad(logits.id);
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      const int t = targets[static_cast<std::size_t>(i)];
      if (t < 0) continue;
      dx.row(i) += probs.row(i) * dl;
      dx(i, t) -= dl;
    }
  });
}

}  // namespace megtext::nn
