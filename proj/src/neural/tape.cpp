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
#include "neural/tape.hpp"

#include <cmath>
#include <string>

#include "common.hpp"

namespace digc::nn {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::invalid_argument,
         std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

bool any_grad(std::initializer_list<Var> vs) {
  for (auto v : vs) {
    if (v.tape->needs_grad(v)) return true;
  }
  return false;
}

}  // namespace

const Matrix& Var::value() const { return tape->value(*this); }

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::param(Parameter& p) {
  const auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return {this, it->second};
  Var v = record(p.value, true, nullptr);
  nodes_[v.id].param = &p;
  param_nodes_[&p] = v.id;
  return v;
}

Var Tape::record(Matrix value, bool needs_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {this, nodes_.size() - 1};
}

void Tape::note_branch(bool taken) {
  branch_signature_ = (branch_signature_ ^ (taken ? 0x9eULL : 0x3dULL)) * 0x100000001b3ULL;
}

void Tape::accumulate(Var v, const Matrix& g) {
  auto& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::accumulate(Var v, Matrix&& g) {
  auto& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = std::move(g);
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var loss) {
  auto& root = nodes_[loss.id];
  if (root.value.rows() != 1 || root.value.cols() != 1) {
    fail(ErrorKind::invalid_argument, "backward needs a 1x1 loss, got " + shape(root.value));
  }
  if (!root.needs_grad) return;
  root.grad = Matrix::Ones(1, 1);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, n.grad);
    if (n.param != nullptr) n.param->grad += n.grad;
  }
}

Var matmul(Var a, Var b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    fail(ErrorKind::invalid_argument, "matmul: inner dimensions " + shape(av) + " * " + shape(bv));
  }
  Tape& t = *a.tape;
  return t.record(av * bv, any_grad({a, b}), [a, b](Tape& t, const Matrix& g) {
    if (t.needs_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.needs_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var matmul(const Matrix& a, Var b) {
  if (a.cols() != b.rows()) {
    fail(ErrorKind::invalid_argument, "matmul: inner dimensions " + shape(a) + " * " + shape(b.value()));
  }
  Tape& t = *b.tape;
  return t.record(a * b.value(), t.needs_grad(b),
                  [at = Matrix(a.transpose()), b](Tape& t, const Matrix& g) {
                    t.accumulate(b, at * g);
                  });
}

Var add(Var a, Var b) {
  same_shape(a.value(), b.value(), "add");
  Tape& t = *a.tape;
  return t.record(a.value() + b.value(), any_grad({a, b}), [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  same_shape(a.value(), b.value(), "sub");
  Tape& t = *a.tape;
  return t.record(a.value() - b.value(), any_grad({a, b}), [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    if (t.needs_grad(b)) t.accumulate(b, -g);
  });
}

Var mul(Var a, Var b) {
  same_shape(a.value(), b.value(), "mul");
  Tape& t = *a.tape;
  return t.record(a.value().cwiseProduct(b.value()), any_grad({a, b}),
                  [a, b](Tape& t, const Matrix& g) {
                    if (t.needs_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
                    if (t.needs_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
                  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  return t.record(a.value() * s, t.needs_grad(a),
                  [a, s](Tape& t, const Matrix& g) { t.accumulate(a, g * s); });
}

Var add_bias(Var x, Var bias) {
  const Matrix& xv = x.value();
  const Matrix& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    fail(ErrorKind::invalid_argument, "add_bias: bias " + shape(bv) + " for input " + shape(xv));
  }
  Tape& t = *x.tape;
  Matrix out = xv.rowwise() + bv.row(0);
  return t.record(std::move(out), any_grad({x, bias}), [x, bias](Tape& t, const Matrix& g) {
    t.accumulate(x, g);
    if (t.needs_grad(bias)) t.accumulate(bias, g.colwise().sum());
  });
}

Var relu(Var x) {
  Tape& t = *x.tape;
  const Matrix& xv = x.value();
  for (Eigen::Index i = 0; i < xv.size(); ++i) t.note_branch(xv.data()[i] > 0.0);
  return t.record(x.value().cwiseMax(0.0), t.needs_grad(x), [x](Tape& t, const Matrix& g) {
    t.accumulate(x, (t.value(x).array() > 0.0).select(g, 0.0));
  });
}

Var sigmoid(Var x) {
  Tape& t = *x.tape;
  Matrix y = (1.0 + (-x.value().array()).exp()).inverse().matrix();
  const std::size_t self = t.size();
  return t.record(std::move(y), t.needs_grad(x), [x, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(t.var(self));
    t.accumulate(x, (g.array() * y.array() * (1.0 - y.array())).matrix());
  });
}

Var tanh(Var x) {
  Tape& t = *x.tape;
  Matrix y = x.value().array().tanh().matrix();
  const std::size_t self = t.size();
  return t.record(std::move(y), t.needs_grad(x), [x, self](Tape& t, const Matrix& g) {
    const Matrix& y = t.value(t.var(self));
    t.accumulate(x, (g.array() * (1.0 - y.array().square())).matrix());
  });
}

Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::identity:
      return x;
    case Activation::relu:
      return relu(x);
    case Activation::sigmoid:
      return sigmoid(x);
    case Activation::tanh:
      return tanh(x);
  }
  fail(ErrorKind::invalid_argument, "unknown activation");
}

Var concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols needs at least one input");
  Tape& t = *parts[0].tape;
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool grad = false;
  for (auto p : parts) {
    if (p.rows() != rows) fail(ErrorKind::invalid_argument, "concat_cols: row count mismatch");
    cols += p.cols();
    grad = grad || t.needs_grad(p);
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (auto p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), grad, [inputs](Tape& t, const Matrix& g) {
    Eigen::Index at = 0;
    for (auto p : inputs) {
      const auto c = t.value(p).cols();
      if (t.needs_grad(p)) t.accumulate(p, g.middleCols(at, c));
      at += c;
    }
  });
}

Var slice_cols(Var x, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= x.cols(), "slice_cols out of range");
  Tape& t = *x.tape;
  return t.record(x.value().middleCols(start, count), t.needs_grad(x),
                  [x, start, count](Tape& t, const Matrix& g) {
                    Matrix full = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
                    full.middleCols(start, count) = g;
                    t.accumulate(x, full);
                  });
}

Var slice_rows(Var x, Eigen::Index start, Eigen::Index count) {
  require(start >= 0 && count >= 0 && start + count <= x.rows(), "slice_rows out of range");
  Tape& t = *x.tape;
  return t.record(x.value().middleRows(start, count), t.needs_grad(x),
                  [x, start, count](Tape& t, const Matrix& g) {
                    Matrix full = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
                    full.middleRows(start, count) = g;
                    t.accumulate(x, full);
                  });
}

Var row_scale(Var x, const Eigen::VectorXd& weights) {
  if (weights.size() != x.rows()) fail(ErrorKind::invalid_argument, "row_scale: weight count mismatch");
  Tape& t = *x.tape;
  return t.record(weights.asDiagonal() * x.value(), t.needs_grad(x),
                  [x, weights](Tape& t, const Matrix& g) { t.accumulate(x, weights.asDiagonal() * g); });
}

Var dropout(Var x, double keep_prob, bool train, std::mt19937_64& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    fail(ErrorKind::invalid_argument, "dropout keep probability must lie in (0, 1]");
  }
  if (!train || keep_prob == 1.0) return x;
  Tape& t = *x.tape;
  // Four 16-bit uniform draws per engine call.
  const auto threshold = static_cast<std::uint64_t>(std::llround(keep_prob * 65536.0));
  const double scale = 1.0 / keep_prob;
  Matrix mask(x.rows(), x.cols());
  double* m = mask.data();
  std::uint64_t bits = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (i % 4 == 0) bits = rng();
    m[i] = (bits & 0xFFFF) < threshold ? scale : 0.0;
    bits >>= 16;
  }
  Matrix out = x.value().cwiseProduct(mask);
  return t.record(std::move(out), t.needs_grad(x),
                  [x, mask = std::move(mask)](Tape& t, const Matrix& g) { t.accumulate(x, g.cwiseProduct(mask)); });
}

namespace {

// Views (M*N) x F column-major storage as N x (M*F): column f*M + m holds
// block m of feature f.
Eigen::Map<const Matrix> as_wide(const Matrix& x, Eigen::Index nodes) {
  return {x.data(), nodes, x.size() / nodes};
}

}  // namespace

Var propagate(const Matrix& p, Var x) {
  const Eigen::Index n = p.rows();
  if (p.cols() != n || n == 0 || x.rows() % n != 0) {
    fail(ErrorKind::invalid_argument,
         "propagate: operator " + shape(p) + " does not tile input " + shape(x.value()));
  }
  Tape& t = *x.tape;
  Matrix out(x.rows(), x.cols());
  Eigen::Map<Matrix>(out.data(), n, out.size() / n).noalias() = p * as_wide(x.value(), n);
  return t.record(std::move(out), t.needs_grad(x), [p_t = Matrix(p.transpose()), x](Tape& t, const Matrix& g) {
    const Eigen::Index n = p_t.rows();
    Matrix gx(g.rows(), g.cols());
    Eigen::Map<Matrix>(gx.data(), n, gx.size() / n).noalias() = p_t * as_wide(g, n);
    t.accumulate(x, std::move(gx));
  });
}

Var flatten_blocks(Var x, Eigen::Index nodes) {
  if (nodes <= 0 || x.rows() % nodes != 0) {
    fail(ErrorKind::invalid_argument, "flatten_blocks: " + shape(x.value()) +
                                          " is not a stack of " + std::to_string(nodes) + "-row blocks");
  }
  const Eigen::Index blocks = x.rows() / nodes;
  const Eigen::Index f = x.cols();
  const Matrix& xv = x.value();
  Matrix out(blocks, nodes * f);
  for (Eigen::Index c = 0; c < f; ++c) {
    for (Eigen::Index n = 0; n < nodes; ++n) {
      for (Eigen::Index m = 0; m < blocks; ++m) out(m, c * nodes + n) = xv(m * nodes + n, c);
    }
  }
  Tape& t = *x.tape;
  return t.record(std::move(out), t.needs_grad(x), [x, nodes, blocks, f](Tape& t, const Matrix& g) {
    Matrix gx(blocks * nodes, f);
    for (Eigen::Index c = 0; c < f; ++c) {
      for (Eigen::Index n = 0; n < nodes; ++n) {
        for (Eigen::Index m = 0; m < blocks; ++m) gx(m * nodes + n, c) = g(m, c * nodes + n);
      }
    }
    t.accumulate(x, gx);
  });
}

Var bce(Var probs, const Matrix& targets, double eps) {
  same_shape(probs.value(), targets, "bce");
  require(targets.size() > 0, "bce needs at least one sample");
  const Matrix& p = probs.value();
  const double n = static_cast<double>(p.size());
  Tape& t = *probs.tape;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p.data()[i], eps, 1.0 - eps);
    const double y = targets.data()[i];
    t.note_branch(q == p.data()[i]);
    loss -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  return t.record(Matrix::Constant(1, 1, loss / n), t.needs_grad(probs),
                  [probs, targets, eps, n](Tape& t, const Matrix& g) {
                    const Matrix& p = t.value(probs);
                    Matrix gp(p.rows(), p.cols());
                    for (Eigen::Index i = 0; i < p.size(); ++i) {
                      const double raw = p.data()[i];
                      const double y = targets.data()[i];
                      // The clamp is flat outside [eps, 1 - eps].
                      if (raw < eps || raw > 1.0 - eps) {
                        gp.data()[i] = 0.0;
                      } else {
                        gp.data()[i] = (-y / raw + (1.0 - y) / (1.0 - raw)) / n;
                      }
                    }
                    t.accumulate(probs, gp * g(0, 0));
                  });
}

Var mse(Var pred, const Matrix& targets) {
  same_shape(pred.value(), targets, "mse");
  require(targets.size() > 0, "mse needs at least one sample");
  const double n = static_cast<double>(targets.size());
  Matrix diff = pred.value() - targets;
  const double loss = diff.squaredNorm() / n;
  Tape& t = *pred.tape;
  return t.record(Matrix::Constant(1, 1, loss), t.needs_grad(pred),
                  [pred, diff = std::move(diff), n](Tape& t, const Matrix& g) {
                    t.accumulate(pred, diff * (2.0 * g(0, 0) / n));
                  });
}

Var sum(Var x) {
  Tape& t = *x.tape;
  return t.record(Matrix::Constant(1, 1, x.value().sum()), t.needs_grad(x), [x](Tape& t, const Matrix& g) {
    t.accumulate(x, Matrix::Constant(t.value(x).rows(), t.value(x).cols(), g(0, 0)));
  });
}

}  // namespace digc::nn
