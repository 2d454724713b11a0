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
#include "neural/layers.hpp"

#include <string>

#include "common.hpp"

namespace digc::nn {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_bias(const Matrix& b, Eigen::Index width, const char* op) {
  if (b.rows() != 1 || b.cols() != width) {
    fail(ErrorKind::invalid_argument, std::string(op) + ": bias " + shape(b) + " for width " +
                                          std::to_string(width));
  }
}

Matrix logistic(const Matrix& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

}  // namespace

Matrix apply_activation(const Matrix& x, Activation act) {
  switch (act) {
    case Activation::identity:
      return x;
    case Activation::relu:
      return x.cwiseMax(0.0);
    case Activation::sigmoid:
      return logistic(x);
    case Activation::tanh:
      return x.array().tanh().matrix();
  }
  fail(ErrorKind::invalid_argument, "unknown activation");
}

Matrix dense_forward(const Matrix& x, const Matrix& w, const Matrix& b, Activation act) {
  if (x.cols() != w.rows()) {
    fail(ErrorKind::invalid_argument, "dense_forward: input " + shape(x) + " vs weight " + shape(w));
  }
  check_bias(b, w.cols(), "dense_forward");
  Matrix y = x * w;
  y.rowwise() += b.row(0);
  return apply_activation(y, act);
}

Matrix gcn_layer_forward(const Matrix& l_norm, const Matrix& x, const Matrix& theta, Activation act) {
  if (l_norm.rows() != l_norm.cols() || l_norm.cols() != x.rows() || x.cols() != theta.rows()) {
    fail(ErrorKind::invalid_argument, "gcn_layer_forward: shapes " + shape(l_norm) + ", " +
                                          shape(x) + ", " + shape(theta));
  }
  return apply_activation(l_norm * x * theta, act);
}

std::pair<Matrix, Matrix> lstm_step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                                    const LstmWeights& w) {
  const Eigen::Index h = w.wh.rows();
  if (w.wh.cols() != 4 * h || w.wx.cols() != 4 * h || x.cols() != w.wx.rows() ||
      h_prev.cols() != h || c_prev.cols() != h || h_prev.rows() != x.rows() ||
      c_prev.rows() != x.rows()) {
    fail(ErrorKind::invalid_argument, "lstm_step: inconsistent shapes x " + shape(x) + ", h " +
                                          shape(h_prev) + ", Wx " + shape(w.wx) + ", Wh " + shape(w.wh));
  }
  check_bias(w.b, 4 * h, "lstm_step");
  Matrix z = x * w.wx + h_prev * w.wh;
  z.rowwise() += w.b.row(0);
  const Matrix i = logistic(z.middleCols(0, h));
  const Matrix f = logistic(z.middleCols(h, h));
  const Matrix g = z.middleCols(2 * h, h).array().tanh().matrix();
  const Matrix o = logistic(z.middleCols(3 * h, h));
  Matrix c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  Matrix hn = o.cwiseProduct(Matrix(c.array().tanh()));
  return {std::move(hn), std::move(c)};
}

Matrix rnn_step(const Matrix& x, const Matrix& h_prev, const RnnWeights& w) {
  const Eigen::Index h = w.wh.rows();
  if (w.wh.cols() != h || w.wx.cols() != h || x.cols() != w.wx.rows() || h_prev.cols() != h ||
      h_prev.rows() != x.rows()) {
    fail(ErrorKind::invalid_argument, "rnn_step: inconsistent shapes x " + shape(x) + ", h " +
                                          shape(h_prev) + ", Wx " + shape(w.wx));
  }
  check_bias(w.b, h, "rnn_step");
  Matrix z = x * w.wx + h_prev * w.wh;
  z.rowwise() += w.b.row(0);
  return z.array().tanh().matrix();
}

Matrix dropout(const Matrix& x, double keep_prob, bool train, std::uint64_t seed) {
  Tape tape;
  std::mt19937_64 rng(seed);
  return dropout(tape.constant(x), keep_prob, train, rng).value();
}

void Dense::init(ModelParams& params, std::mt19937_64& rng) const {
  params.add_weight(name + ".W", in, out, rng);
  params.add_zeros(name + ".b", 1, out);
}

Var Dense::forward(Tape& tape, ModelParams& params, Var x, Activation act) const {
  Var w = tape.param(params.at(name + ".W"));
  Var b = tape.param(params.at(name + ".b"));
  return activate(add_bias(matmul(x, w), b), act);
}

void GraphConv::init(ModelParams& params, std::mt19937_64& rng) const {
  params.add_weight(name + ".Theta", in, out, rng);
}

Var GraphConv::forward(Tape& tape, ModelParams& params, const Matrix& propagation, Var x,
                       Activation act) const {
  Var theta = tape.param(params.at(name + ".Theta"));
  if (in < out) return activate(matmul(propagate(propagation, x), theta), act);
  return activate(propagate(propagation, matmul(x, theta)), act);
}

void Lstm::init(ModelParams& params, std::mt19937_64& rng) const {
  params.add_weight(name + ".Wx", in, 4 * hidden, rng);
  params.add_weight(name + ".Wh", hidden, 4 * hidden, rng);
  params.add_zeros(name + ".b", 1, 4 * hidden);
}

namespace {

// One LSTM update from precomputed input projections zx (B x 4H).
std::pair<Var, Var> lstm_cell(Var zx, Var h, Var c, Var wh, Eigen::Index hidden) {
  Var z = add(zx, matmul(h, wh));
  Var i = sigmoid(slice_cols(z, 0, hidden));
  Var f = sigmoid(slice_cols(z, hidden, hidden));
  Var g = tanh(slice_cols(z, 2 * hidden, hidden));
  Var o = sigmoid(slice_cols(z, 3 * hidden, hidden));
  Var c_next = add(mul(f, c), mul(i, g));
  Var h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

}  // namespace

Var Lstm::forward(Tape& tape, ModelParams& params, const std::vector<Var>& steps) const {
  require(!steps.empty(), "LSTM needs at least one step");
  Var wx = tape.param(params.at(name + ".Wx"));
  Var wh = tape.param(params.at(name + ".Wh"));
  Var b = tape.param(params.at(name + ".b"));
  const Eigen::Index batch = steps[0].rows();
  Var h = tape.constant(Matrix::Zero(batch, hidden));
  Var c = tape.constant(Matrix::Zero(batch, hidden));
  for (auto x : steps) {
    std::tie(h, c) = lstm_cell(add_bias(matmul(x, wx), b), h, c, wh, hidden);
  }
  return h;
}

Var Lstm::forward_stacked(Tape& tape, ModelParams& params, Var inputs, Eigen::Index steps) const {
  require(steps > 0 && inputs.rows() % steps == 0, "LSTM stacked input does not split into steps");
  Var wx = tape.param(params.at(name + ".Wx"));
  Var wh = tape.param(params.at(name + ".Wh"));
  Var b = tape.param(params.at(name + ".b"));
  const Eigen::Index batch = inputs.rows() / steps;
  // Project every step at once; only the recurrent product stays sequential.
  Var zx_all = add_bias(matmul(inputs, wx), b);
  Var h = tape.constant(Matrix::Zero(batch, hidden));
  Var c = tape.constant(Matrix::Zero(batch, hidden));
  for (Eigen::Index t = 0; t < steps; ++t) {
    std::tie(h, c) = lstm_cell(slice_rows(zx_all, t * batch, batch), h, c, wh, hidden);
  }
  return h;
}

void Rnn::init(ModelParams& params, std::mt19937_64& rng) const {
  params.add_weight(name + ".Wx", in, hidden, rng);
  params.add_weight(name + ".Wh", hidden, hidden, rng);
  params.add_zeros(name + ".b", 1, hidden);
}

Var Rnn::forward(Tape& tape, ModelParams& params, const std::vector<Var>& steps,
                 const std::vector<Eigen::VectorXd>& masks) const {
  require(steps.size() == masks.size(), "RNN step/mask count mismatch");
  require(!steps.empty(), "RNN needs at least one step");
  Var wx = tape.param(params.at(name + ".Wx"));
  Var wh = tape.param(params.at(name + ".Wh"));
  Var b = tape.param(params.at(name + ".b"));
  const Eigen::Index batch = steps[0].rows();
  Var h = tape.constant(Matrix::Zero(batch, hidden));
  for (std::size_t t = 0; t < steps.size(); ++t) {
    Var next = tanh(add_bias(add(matmul(steps[t], wx), matmul(h, wh)), b));
    const Eigen::VectorXd keep = Eigen::VectorXd::Ones(batch) - masks[t];
    h = add(row_scale(next, masks[t]), row_scale(h, keep));
  }
  return h;
}

LstmWeights lstm_weights(const ModelParams& params, const std::string& name) {
  return {params.at(name + ".Wx").value, params.at(name + ".Wh").value, params.at(name + ".b").value};
}

RnnWeights rnn_weights(const ModelParams& params, const std::string& name) {
  return {params.at(name + ".Wx").value, params.at(name + ".Wh").value, params.at(name + ".b").value};
}

}  // namespace digc::nn
