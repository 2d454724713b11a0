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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "digc_net.hpp"
#include "impact_classifier.hpp"
#include "incident_discovery.hpp"
#include "synthetic_city.hpp"

namespace digc::pipeline {

struct PipelineConfig {
  std::filesystem::path out_dir;
  // Empty means <out_dir>/data, which `generate` fills.
  std::filesystem::path data_dir;
  std::uint64_t seed = 7;
  data::SyntheticScenario scenario;
  discovery::DiscoveryConfig discovery;
  bool write_scores = false;
  std::vector<double> sweep_rho{0.2, 0.4, 0.6, 0.8};
  std::vector<double> sweep_theta{0.0, 0.05, 0.1, 0.15, 0.2};
  classifier::ClassifierConfig classifier;
  net::DigcConfig digc;
  bool plain_lstm_baseline = false;

  std::filesystem::path resolved_data_dir() const;
};

// Settable keys use dotted names ("digc.horizon", "discovery.rho", ...).
// Unknown keys and malformed values raise config errors.
void set_option(PipelineConfig& config, std::string_view key, std::string_view value);
std::vector<std::string> option_keys();

// Reads a JSON object; nested objects map onto dotted keys, arrays onto
// comma-separated lists.
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

// key=value lines for every option, sorted by key. The output directory is
// not part of it, so identical runs in different directories hash alike.
std::string canonical_config(const PipelineConfig& config);
std::string config_hash(const PipelineConfig& config);

const std::vector<std::string>& commands();

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);
  // Runs one stage under the output-directory lock.
  void run(std::string_view command);
  const PipelineConfig& config() const { return config_; }

 private:
  void generate();
  void build_graph();
  void discover();
  void sweep();
  void train_classifier();
  void extract_features();
  void train();
  void predict();
  void evaluate();
  void report();

  PipelineConfig config_;
  std::string hash_;
};

}  // namespace digc::pipeline
