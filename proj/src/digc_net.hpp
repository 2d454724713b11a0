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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "neural/layers.hpp"
#include "neural/params.hpp"
#include "traffic_data.hpp"

namespace digc::net {

using nn::Matrix;

// Which learning components feed the fusion layers.
enum class Variant { spatio_temporal, st_periodic, full };
std::string to_string(Variant v);
Variant parse_variant(std::string_view text);

// clear, cloudy, rain, fog, other + temperature/40 + sunrise/1440
inline constexpr Eigen::Index kWeatherWidth = 7;
Eigen::RowVectorXd encode_weather(const data::WeatherRecord& w);

struct DigcConfig {
  std::size_t history = 48;
  std::size_t horizon = 1;  // k future slots
  std::size_t periodic_days = 5;
  // Incidents with start slot in [t - incident_lookback, t - 1].
  std::size_t incident_lookback = 25;
  Eigen::Index gcn_hidden = 64;
  Eigen::Index st_fc = 64;
  Eigen::Index lstm_hidden = 64;
  Eigen::Index rnn_hidden = 128;
  Eigen::Index periodic_fc = 64;
  Eigen::Index fusion = 256;
  double keep_prob = 0.5;
  double lr = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  std::size_t patience = 10;
  double validation_fraction = 0.1;
  // Use every stride-th eligible training target (1 = all).
  std::size_t train_stride = 1;
  Variant variant = Variant::full;
  std::uint64_t seed = 1;

  void validate() const;
};

struct IncidentEvent {
  std::size_t slot = 0;
  std::string id;
  TimePoint start_time{};
  Eigen::RowVectorXd features;
};

// Floor applied before taking logs, in km/h.
inline constexpr double kMinSpeed = 1.0;

// Normalized series shared by every window of one city.
struct SeriesContext {
  // Per-flow mean and standard deviation of log speed over the training range.
  Eigen::VectorXd flow_mean;
  Eigen::VectorXd flow_std;
  Matrix speeds;      // slots x N, raw km/h
  Matrix normalized;  // (log(max(speed, kMinSpeed)) - flow_mean) / flow_std
  Matrix weather;             // slots x kWeatherWidth
  std::vector<IncidentEvent> events;  // ordered by start time, then id
  std::size_t latent_width = 16;

  std::size_t slot_count() const { return static_cast<std::size_t>(speeds.rows()); }
  std::size_t flow_count() const { return static_cast<std::size_t>(speeds.cols()); }
};

// Incidents without a latent vector are left out of the event list.
SeriesContext make_context(const data::CityData& city,
                           const std::map<std::string, Eigen::RowVectorXd>& latent,
                           std::size_t train_end_slot, std::size_t latent_width = 16);

struct PredictionWindow {
  std::size_t target_slot = 0;
  Matrix history;    // history x N (normalized)
  Matrix weather;    // history x kWeatherWidth
  Matrix periodic;   // periodic_days x (k*N), row d-1 is d days back
  Matrix incidents;  // m x latent width, in event order
  std::vector<std::string> incident_ids;
  Matrix target;     // k x N (normalized)
};

bool window_eligible(const SeriesContext& ctx, const DigcConfig& config, std::size_t t);
// Events whose start slot lies in [t - lookback, t - 1], in event order.
std::vector<std::size_t> incidents_for_target(const SeriesContext& ctx, const DigcConfig& config,
                                              std::size_t t);
PredictionWindow materialize_window(const SeriesContext& ctx, const DigcConfig& config,
                                    std::size_t t);

struct WindowSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::size_t boundary_slot = 0;
  std::size_t skipped = 0;  // slots with insufficient history or lookahead
};

// 21 train days when the data spans at least 28 days, else the first 75% of
// slots. Training targets (all k steps) end before the boundary; test targets
// start at or after it. Validation is the latest validation_fraction of the
// training targets.
std::size_t train_boundary(std::size_t slot_count);
WindowSplit assemble_training_windows(const SeriesContext& ctx, const DigcConfig& config);

// Common interface for the predictor and the learned baseline.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  // B x (k*N) normalized predictions; column s*N + n is step s of flow n.
  virtual nn::Var forward(nn::Tape& tape, std::span<const PredictionWindow* const> batch,
                          bool train, std::uint64_t dropout_seed) = 0;
  virtual nn::ModelParams& params() = 0;
  virtual const DigcConfig& config() const = 0;
};

class DigcModel : public SequenceModel {
 public:
  DigcModel(std::size_t n_flows, Matrix propagation, DigcConfig config,
            std::size_t latent_width = 16);
  DigcModel(nn::ModelParams params, Matrix propagation);

  nn::Var forward(nn::Tape& tape, std::span<const PredictionWindow* const> batch, bool train,
                  std::uint64_t dropout_seed) override;
  nn::ModelParams& params() override { return params_; }
  const DigcConfig& config() const override { return config_; }

 private:
  void declare_layers();

  std::size_t n_;
  std::size_t latent_width_;
  Matrix propagation_;
  DigcConfig config_;
  nn::ModelParams params_;
  nn::GraphConv gcn1_, gcn2_;
  nn::Dense st_fc_, head_, periodic_fc_, fusion_fc_, out_fc_;
  nn::Lstm lstm_;
  nn::Rnn rnn_;
};

// LSTM over raw (normalized) speed vectors with an affine k*N head.
class PlainLstm : public SequenceModel {
 public:
  PlainLstm(std::size_t n_flows, DigcConfig config);

  nn::Var forward(nn::Tape& tape, std::span<const PredictionWindow* const> batch, bool train,
                  std::uint64_t dropout_seed) override;
  nn::ModelParams& params() override { return params_; }
  const DigcConfig& config() const override { return config_; }

 private:
  std::size_t n_;
  DigcConfig config_;
  nn::ModelParams params_;
  nn::Lstm lstm_;
  nn::Dense head_;
};

struct TrainingLog {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
};

// Adam on normalized MSE with early stopping on validation loss; the best
// parameters are restored at the end.
TrainingLog train_sequence_model(SequenceModel& model, const SeriesContext& ctx,
                                 const WindowSplit& split);

// Eval-mode normalized predictions, one (k x N) matrix per target.
std::vector<Matrix> predict_normalized(SequenceModel& model, const SeriesContext& ctx,
                                       const std::vector<std::size_t>& targets);
// Denormalized km/h; the log-space inverse keeps speeds positive.
std::vector<Matrix> predict_multistep(SequenceModel& model, const SeriesContext& ctx,
                                      const std::vector<std::size_t>& targets);

struct MapeReport {
  double overall = 0.0;
  std::vector<double> per_step;
  std::size_t targets = 0;
  std::size_t excluded = 0;
};
// predictions[i] is k x N speeds for targets[i].
MapeReport evaluate_predictions(const SeriesContext& ctx, const std::vector<std::size_t>& targets,
                                const std::vector<Matrix>& predictions);

// ---- baselines --------------------------------------------------------------

std::vector<Matrix> persistence_predictions(const SeriesContext& ctx, std::size_t horizon,
                                            const std::vector<std::size_t>& targets);
// Mean of the same slot-of-day over whole days before the boundary.
std::vector<Matrix> historical_average_predictions(const SeriesContext& ctx, std::size_t horizon,
                                                   std::size_t boundary_slot,
                                                   const std::vector<std::size_t>& targets);

std::string format_predictions(const std::vector<std::size_t>& targets,
                               const std::vector<Matrix>& predictions);

}  // namespace digc::net
