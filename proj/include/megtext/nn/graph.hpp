// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace megtext::nn {

using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<float, 1, Eigen::Dynamic>;

/// A named weight with its gradient accumulator. Gradients are allocated on the
/// first backward pass that reaches the parameter.
struct Parameter {
  std::string name;
  Mat value;
  Mat grad;
  bool trainable = true;

  Parameter(std::string n, Mat v) : name(std::move(n)), value(std::move(v)) {}
  void zero_grad() {
    if (grad.size() != 0) grad.setZero();
  }
  Eigen::Index size() const { return value.size(); }
};

using ParamPtr = std::shared_ptr<Parameter>;

class Graph;

/// Handle to a node recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Mat& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are appended in evaluation order; backward() walks
/// them in reverse. Only nodes that depend on a trainable parameter carry gradients.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Mat value);
  /// Leaf bound to a parameter; its gradient is added to `p.grad` on backward.
  Var param(Parameter& p);

  const Mat& value(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool requires_grad(Var v) const { return requires_grad(v.id); }
  /// Gradient buffer of a node, zero-initialized on first access.
  Mat& grad(int id);

  Var record(Mat value, std::initializer_list<Var> parents, BackwardFn backward);

  /// Seeds d(loss)/d(loss) = 1 for a 1x1 node and propagates.
  void backward(Var loss);

  bool grad_enabled() const noexcept { return grad_enabled_; }
  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    const Mat* external = nullptr;
    Mat grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
  bool grad_enabled_;
};

}  // namespace megtext::nn
