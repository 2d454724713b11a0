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

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace digc::nn {

using Matrix = Eigen::MatrixXd;

struct Parameter {
  Matrix value;
  Matrix grad;
  // Adam moments.
  Matrix m;
  Matrix v;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Named parameters in lexicographic order plus the shared optimizer step.
class ModelParams {
 public:
  // Glorot-uniform weights in +-sqrt(6 / (rows + cols)).
  Parameter& add_weight(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                        std::mt19937_64& rng);
  Parameter& add_zeros(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Parameter& add(const std::string& name, Matrix value);

  bool contains(const std::string& name) const { return params_.contains(name); }
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  std::vector<std::string> names() const;
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  std::map<std::string, Parameter>& entries() { return params_; }
  const std::map<std::string, Parameter>& entries() const { return params_; }

  void zero_grad();
  std::uint64_t step() const { return step_; }

  // Bias-corrected Adam over every parameter's accumulated gradient. A
  // non-finite gradient aborts before anything is modified.
  void adam_step(const AdamConfig& config = {});

  // Meta entries are stored alongside the tensors in checkpoints.
  std::map<std::string, std::string> meta;

 private:
  std::map<std::string, Parameter> params_;
  std::uint64_t step_ = 0;
};

// Versioned JSON checkpoint; tensors are written row-major in name order.
std::string serialize_params(const ModelParams& params);
ModelParams deserialize_params(std::string_view text);
void save_params(const std::filesystem::path& path, const ModelParams& params);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace digc::nn
