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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "neural/layers.hpp"
#include "neural/params.hpp"
#include "road_graph.hpp"
#include "traffic_data.hpp"

namespace digc::classifier {

using nn::Matrix;

inline const std::array<std::string, 5> kIncidentTypes{"congestion", "collision", "construction",
                                                        "event", "other"};
// type 5 + road status 2 + start hour 24 + end hour 24 + day category 3 + duration 1
inline constexpr Eigen::Index kContextWidth = 59;

struct ClassifierConfig {
  std::size_t window = 12;
  Eigen::Index gcn_hidden = 64;
  Eigen::Index fc_width = 64;
  Eigen::Index lstm_hidden = 64;
  Eigen::Index context_width = 32;
  Eigen::Index latent_width = 16;
  double keep_prob = 0.8;
  double lr = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  double train_fraction = 0.7;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
};

// Dataset-level normalizers shared by every incident.
struct FeatureScales {
  Eigen::VectorXd flow_mean_speed;  // per flow; speeds are divided by it
  double max_duration_min = 0.0;
};
FeatureScales compute_feature_scales(const data::SpeedTable& table,
                                     const std::vector<data::IncidentRecord>& incidents);

struct ClassifierInput {
  std::string incident_id;
  // window*N rows: row t*N + n holds (normalized speed, normalized distance)
  // of flow n at the t-th slot of the window.
  Matrix snapshots;
  Eigen::RowVectorXd context;
};

// First and last slot of the snapshot span around a start slot:
// [s - window/2, s - window/2 + window - 1].
std::pair<std::int64_t, std::int64_t> snapshot_span(std::int64_t start_slot, std::size_t window);

Eigen::RowVectorXd encode_context(const data::IncidentRecord& incident, double max_duration_min);

ClassifierInput build_classifier_input(const data::IncidentRecord& incident,
                                       const data::SpeedTable& table,
                                       const data::RoadGeometry& geometry,
                                       const FeatureScales& scales, const ClassifierConfig& config);

class ImpactClassifier {
 public:
  ImpactClassifier(std::size_t n_flows, Matrix propagation, ClassifierConfig config);
  // Rebuilds a trained model; fails if the checkpoint was trained on another
  // flow count.
  ImpactClassifier(nn::ModelParams params, Matrix propagation);

  struct Output {
    nn::Var probability;  // B x 1
    nn::Var latent;       // B x latent_width
  };
  Output forward(nn::Tape& tape, std::span<const ClassifierInput* const> batch, bool train,
                 std::uint64_t dropout_seed);

  double predict(const ClassifierInput& input);
  Eigen::RowVectorXd latent_features(const ClassifierInput& input);

  nn::ModelParams& params() { return params_; }
  const nn::ModelParams& params() const { return params_; }
  const ClassifierConfig& config() const { return config_; }
  std::size_t flow_count() const { return n_; }

 private:
  void declare_layers();

  std::size_t n_;
  Matrix propagation_;
  ClassifierConfig config_;
  nn::ModelParams params_;
  nn::GraphConv gcn1_, gcn2_;
  nn::Dense fc_, context_fc_, latent_fc_, out_fc_;
  nn::Lstm lstm_;
};

struct ClassifierMetrics {
  double bce = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_test = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  std::vector<double> train_loss;       // eval-mode loss on the training split
  std::vector<double> validation_loss;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};
// Shuffled split: train_fraction of all samples form the training pool, the
// rest the test set; validation_fraction of the pool is held out.
SplitIndices split_samples(std::size_t n, double train_fraction, double validation_fraction,
                           std::uint64_t seed);

double mean_bce(ImpactClassifier& model, const std::vector<ClassifierInput>& inputs,
                const std::vector<int>& labels, const std::vector<std::size_t>& subset);

// BCE and F1 at threshold 0.5 over a subset.
ClassifierMetrics evaluate_classifier(ImpactClassifier& model,
                                      const std::vector<ClassifierInput>& inputs,
                                      const std::vector<int>& labels,
                                      const std::vector<std::size_t>& subset);

struct TrainedClassifier {
  ImpactClassifier model;
  ClassifierMetrics metrics;
  SplitIndices split;
};

TrainedClassifier train_classifier(const std::vector<ClassifierInput>& inputs,
                                   const std::vector<int>& labels, std::size_t n_flows,
                                   const Matrix& propagation, const ClassifierConfig& config);

std::string format_features(const std::vector<std::string>& ids,
                            const std::vector<Eigen::RowVectorXd>& features);
struct FeatureTable {
  std::vector<std::string> ids;
  std::vector<Eigen::RowVectorXd> features;
};
FeatureTable parse_features(std::string_view text);

// Scales and model hyperparameters are kept in checkpoint metadata.
void store_scales(nn::ModelParams& params, const FeatureScales& scales);
FeatureScales load_scales(const nn::ModelParams& params);

}  // namespace digc::classifier
