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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "neural/params.hpp"
#include "neural/tape.hpp"

namespace digc::nn {

// ---- plain forward functions ------------------------------------------------

Matrix apply_activation(const Matrix& x, Activation act);

// act(X W + b); b is 1 x out.
Matrix dense_forward(const Matrix& x, const Matrix& w, const Matrix& b, Activation act);
// act(L X Theta) for one N-node signal.
Matrix gcn_layer_forward(const Matrix& l_norm, const Matrix& x, const Matrix& theta, Activation act);

// Gate blocks along the 4H axis are ordered input, forget, candidate, output.
struct LstmWeights {
  Matrix wx;  // in x 4H
  Matrix wh;  // H x 4H
  Matrix b;   // 1 x 4H
};
std::pair<Matrix, Matrix> lstm_step(const Matrix& x, const Matrix& h_prev, const Matrix& c_prev,
                                    const LstmWeights& w);

struct RnnWeights {
  Matrix wx;  // in x H
  Matrix wh;  // H x H
  Matrix b;   // 1 x H
};
Matrix rnn_step(const Matrix& x, const Matrix& h_prev, const RnnWeights& w);

Matrix dropout(const Matrix& x, double keep_prob, bool train, std::uint64_t seed);

// ---- tape layers --------------------------------------------------------------
// Each layer owns parameters "<name>.W", "<name>.b", ... in a ModelParams.

struct Dense {
  std::string name;
  Eigen::Index in = 0;
  Eigen::Index out = 0;

  void init(ModelParams& params, std::mt19937_64& rng) const;
  Var forward(Tape& tape, ModelParams& params, Var x, Activation act) const;
};

// Graph convolution over a stack of N-node blocks (rows m*N + n).
struct GraphConv {
  std::string name;
  Eigen::Index in = 0;
  Eigen::Index out = 0;

  void init(ModelParams& params, std::mt19937_64& rng) const;
  Var forward(Tape& tape, ModelParams& params, const Matrix& propagation, Var x,
              Activation act) const;
};

struct Lstm {
  std::string name;
  Eigen::Index in = 0;
  Eigen::Index hidden = 0;

  void init(ModelParams& params, std::mt19937_64& rng) const;
  // steps[t] is B x in; returns the final hidden state (B x hidden).
  Var forward(Tape& tape, ModelParams& params, const std::vector<Var>& steps) const;
  // Same recurrence with the inputs stacked as rows t*B + b of one matrix.
  Var forward_stacked(Tape& tape, ModelParams& params, Var inputs, Eigen::Index steps) const;
};

struct Rnn {
  std::string name;
  Eigen::Index in = 0;
  Eigen::Index hidden = 0;

  void init(ModelParams& params, std::mt19937_64& rng) const;
  // masks[t](b) = 1 when step t of sequence b is real, 0 for padding; padded
  // steps carry the previous hidden state through unchanged.
  Var forward(Tape& tape, ModelParams& params, const std::vector<Var>& steps,
              const std::vector<Eigen::VectorXd>& masks) const;
};

LstmWeights lstm_weights(const ModelParams& params, const std::string& name);
RnnWeights rnn_weights(const ModelParams& params, const std::string& name);

}  // namespace digc::nn
