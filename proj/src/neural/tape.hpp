// ----------------------------------------------------------------------------
// Copyright 2026 The digc Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// ----------------------------------------------------------------------------
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "neural/params.hpp"

namespace digc::nn {

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Records a forward computation so that gradients can be pulled back in one
// reverse sweep. Nodes live in a deque, so references stay valid while the
// tape grows.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& grad)>;

  Var constant(Matrix value);
  // Leaf bound to a parameter; repeated calls with the same parameter return
  // the same node so gradients accumulate once.
  Var param(Parameter& p);
  Var record(Matrix value, bool needs_grad, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  // Adds into the gradient of v (allocating it on first use).
  void accumulate(Var v, const Matrix& g);
  void accumulate(Var v, Matrix&& g);
  Var var(std::size_t id) { return {this, id}; }
  std::size_t size() const { return nodes_.size(); }

  // Hash of every piecewise branch taken so far (ReLU masks, loss clamps).
  // Two evaluations with equal signatures lie on the same smooth piece.
  std::uint64_t branch_signature() const { return branch_signature_; }
  void note_branch(bool taken);

  // Seeds d(loss)/d(loss) = 1 for a 1x1 loss, walks nodes in reverse order of
  // creation, and adds leaf gradients into their parameters.
  void backward(Var loss);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };
  std::deque<Node> nodes_;
  std::unordered_map<Parameter*, std::size_t> param_nodes_;
  std::uint64_t branch_signature_ = 0xcbf29ce484222325ULL;
};

enum class Activation { identity, relu, sigmoid, tanh };

Var matmul(Var a, Var b);
// Constant left factor, e.g. a propagation matrix.
Var matmul(const Matrix& a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
// Adds a 1 x C row vector to every row.
Var add_bias(Var x, Var bias);
Var relu(Var x);
Var sigmoid(Var x);
Var tanh(Var x);
Var activate(Var x, Activation act);
Var concat_cols(std::span<const Var> parts);
Var slice_cols(Var x, Eigen::Index start, Eigen::Index count);
Var slice_rows(Var x, Eigen::Index start, Eigen::Index count);
// Multiplies row r by weights[r].
Var row_scale(Var x, const Eigen::VectorXd& weights);
// Inverted dropout with keep probability; identity when !train.
Var dropout(Var x, double keep_prob, bool train, std::mt19937_64& rng);

// x stacks M blocks of N node rows: row m*N + n. Returns P applied to every
// block, computed as one N x N by N x (M*F) product.
Var propagate(const Matrix& p, Var x);
// (M*N) x F -> M x (N*F): block m becomes row m, column f*N + n.
Var flatten_blocks(Var x, Eigen::Index nodes);

// Mean binary cross-entropy with probabilities clamped to [eps, 1 - eps].
Var bce(Var probs, const Matrix& targets, double eps = 1e-7);
Var mse(Var pred, const Matrix& targets);
Var sum(Var x);

}  // namespace digc::nn
