// SPDX-License-Identifier: Apache-2.0
#include "megtext/nn/graph.hpp"

#include "megtext/error.hpp"

namespace megtext::nn {

const Mat& Var::value() const { return graph->value(id); }

Var Graph::constant(Mat value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::param(Parameter& p) {
  Node n;
  n.external = &p.value;
  n.requires_grad = grad_enabled_ && p.trainable;
  if (n.requires_grad) {
    Parameter* target = &p;
    n.backward = [target](Graph& g, int self) {
      Mat& gself = g.grad(self);
      if (target->grad.size() == 0) target->grad = Mat::Zero(target->value.rows(), target->value.cols());
      target->grad += gself;
    };
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

const Mat& Graph::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.external ? *n.external : n.value;
}

Mat& Graph::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) {
    const Mat& v = n.external ? *n.external : n.value;
    n.grad = Mat::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

Var Graph::record(Mat value, std::initializer_list<Var> parents, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  if (grad_enabled_) {
    for (const Var& p : parents) n.requires_grad = n.requires_grad || requires_grad(p);
    if (n.requires_grad) n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var loss) {
  if (value(loss.id).size() != 1) throw ConfigError("backward() needs a scalar loss");
  if (!requires_grad(loss)) throw ConfigError("loss does not depend on any trainable parameter");
  grad(loss.id)(0, 0) = 1.0f;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, id);
  }
}

}  // namespace megtext::nn
