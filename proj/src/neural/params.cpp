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
#include "neural/params.hpp"

#include <cmath>

#include "common.hpp"
#include "json.hpp"

namespace digc::nn {

namespace {

constexpr const char* kFormat = "digc-params";
constexpr int kVersion = 1;

}  // namespace

Parameter& ModelParams::add(const std::string& name, Matrix value) {
  if (params_.contains(name)) fail(ErrorKind::invalid_argument, "duplicate parameter " + name);
  Parameter p;
  p.grad = Matrix::Zero(value.rows(), value.cols());
  p.m = Matrix::Zero(value.rows(), value.cols());
  p.v = Matrix::Zero(value.rows(), value.cols());
  p.value = std::move(value);
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ModelParams::add_weight(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                                   std::mt19937_64& rng) {
  require(rows > 0 && cols > 0, "parameter " + name + " needs a positive shape");
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix w(rows, cols);
  // Fill row-major so the draw order does not depend on storage layout.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = dist(rng);
  }
  return add(name, std::move(w));
}

Parameter& ModelParams::add_zeros(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  return add(name, Matrix::Zero(rows, cols));
}

Parameter& ModelParams::at(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::invalid_argument, "unknown parameter " + name);
  return it->second;
}

const Parameter& ModelParams::at(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) fail(ErrorKind::invalid_argument, "unknown parameter " + name);
  return it->second;
}

std::vector<std::string> ModelParams::names() const {
  std::vector<std::string> out;
  for (const auto& [name, p] : params_) out.push_back(name);
  return out;
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ModelParams::zero_grad() {
  for (auto& [name, p] : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

void ModelParams::adam_step(const AdamConfig& c) {
  for (const auto& [name, p] : params_) {
    if (!p.grad.allFinite()) {
      fail(ErrorKind::numeric, "non-finite gradient in parameter " + name);
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (auto& [name, p] : params_) {
    p.m = c.beta1 * p.m + (1.0 - c.beta1) * p.grad;
    p.v = c.beta2 * p.v + (1.0 - c.beta2) * p.grad.cwiseProduct(p.grad);
    const Matrix m_hat = p.m / bc1;
    const Matrix v_hat = p.v / bc2;
    p.value.array() -= c.lr * m_hat.array() / (v_hat.array().sqrt() + c.eps);
  }
}

std::string serialize_params(const ModelParams& params) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["step"] = params.step();
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : params.meta) meta[k] = v;
  j["meta"] = meta;
  nlohmann::ordered_json tensors = nlohmann::ordered_json::object();
  for (const auto& [name, p] : params.entries()) {
    nlohmann::ordered_json t;
    t["rows"] = p.value.rows();
    t["cols"] = p.value.cols();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(p.value.size()));
    for (Eigen::Index r = 0; r < p.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p.value.cols(); ++c) values.push_back(p.value(r, c));
    }
    t["values"] = std::move(values);
    tensors[name] = std::move(t);
  }
  j["tensors"] = std::move(tensors);
  return j.dump(1) + "\n";
}

ModelParams deserialize_params(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      fail(ErrorKind::parse, "not a parameter checkpoint (format field)");
    }
    const int version = j.at("version").get<int>();
    if (version != kVersion) {
      fail(ErrorKind::parse, "unsupported checkpoint version " + std::to_string(version));
    }
    ModelParams params;
    for (const auto& [k, v] : j.at("meta").items()) params.meta[k] = v.get<std::string>();
    for (const auto& [name, t] : j.at("tensors").items()) {
      const auto rows = t.at("rows").get<Eigen::Index>();
      const auto cols = t.at("cols").get<Eigen::Index>();
      const auto values = t.at("values").get<std::vector<double>>();
      if (rows <= 0 || cols <= 0 || values.size() != static_cast<std::size_t>(rows * cols)) {
        fail(ErrorKind::parse, "tensor " + name + " has inconsistent shape");
      }
      Matrix m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
      }
      params.add(name, std::move(m));
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_params(const std::filesystem::path& path, const ModelParams& params) {
  write_file(path, serialize_params(params));
}

ModelParams load_params(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorKind::missing_artifact, "checkpoint not found: " + path.string());
  }
  return deserialize_params(read_file(path));
}

}  // namespace digc::nn
