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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "traffic_data.hpp"

namespace digc::discovery {

struct DiscoveryConfig {
  double delta = 0.5;   // similarity threshold for the historically-similar set
  double rho = 0.6;     // weight of the anomalous degree in the effect score
  double theta = 0.15;  // criticality threshold on the effect score
  double radius_m = 500.0;
  std::size_t similarity_window = 12;
  std::size_t rsv_window = 10;
  std::size_t norm_half_window = 144;
  std::size_t influence_window = 12;
  std::size_t clusters = 1;

  void validate() const;
};

// Pearson correlation; zero-variance input gives 0.
double pearson_similarity(std::span<const double> x, std::span<const double> y);

// Flow labels for the local algorithm; an empty span means "one global group".
using Labels = std::span<const int>;

// N x N similarity of speed windows [t - T + 1, t]. Pairs with different
// labels are 0; the diagonal is 1.
Eigen::MatrixXd similarity_matrix(const data::SpeedTable& table, std::size_t t,
                                  const DiscoveryConfig& config, Labels labels = {});

Eigen::MatrixXd similarity_decrease(const Eigen::MatrixXd& s_prev, const Eigen::MatrixXd& s_curr);

double anomalous_degree(std::size_t flow, const Eigen::MatrixXd& s_prev,
                        const Eigen::MatrixXd& s_curr, const Eigen::MatrixXd& sd,
                        double delta, Labels labels = {});

// Max speed of one flow over [t - half, t + half] clamped to the table.
double normalization_max(const data::SpeedTable& table, std::size_t flow, std::size_t t,
                         std::size_t half_window);

double relative_speed_variation(const data::SpeedTable& table, std::size_t flow, std::size_t t,
                                std::size_t rsv_window, std::size_t half_window);

double incident_effect_score(double ad, double rsv, double rho);

// Per-slot scores for slots [first_slot, first_slot + rows). Row r is slot
// first_slot + r, column i is flow i.
struct FlowScoreSeries {
  std::size_t first_slot = 0;
  double rho = 0.0;
  Eigen::MatrixXd ad;
  Eigen::MatrixXd rsv;
  Eigen::MatrixXd ies;

  std::size_t slot_count() const { return static_cast<std::size_t>(ad.rows()); }
  std::size_t last_slot() const { return first_slot + slot_count() - 1; }
  bool covers(std::size_t slot) const { return slot >= first_slot && slot <= last_slot(); }
  // Recombines AD and RSV with a different weight.
  Eigen::MatrixXd ies_for(double rho) const;
};

// Anomalous degree for every flow at slots [first_slot, last_slot]. With
// labels, similarities are only computed inside each label group.
Eigen::MatrixXd anomalous_degree_series(const data::SpeedTable& table, const DiscoveryConfig& config,
                                        std::size_t first_slot, std::size_t last_slot,
                                        Labels labels = {});

Eigen::MatrixXd rsv_series(const data::SpeedTable& table, const DiscoveryConfig& config,
                           std::size_t first_slot, std::size_t last_slot);

// Full score series; the first valid slot is the similarity window length.
FlowScoreSeries compute_scores(const data::SpeedTable& table, const DiscoveryConfig& config,
                               Labels labels = {});
FlowScoreSeries compute_scores(const data::SpeedTable& table, const DiscoveryConfig& config,
                               std::size_t first_slot, std::size_t last_slot, Labels labels = {});

std::vector<std::size_t> candidate_flows(const data::IncidentRecord& incident,
                                         const data::RoadGeometry& geometry, double radius_m);

struct AffectedFlow {
  std::size_t flow = 0;
  double max_ies = 0.0;
};

struct CriticalityLabel {
  std::string incident_id;
  bool is_critical = false;
  double max_ies = 0.0;  // over all candidate flows and the influence window
  std::vector<AffectedFlow> affected;
};

// Influence window [s - T/2, s + T/2] (integer halves) around the start slot.
std::pair<std::int64_t, std::int64_t> influence_window(std::int64_t start_slot,
                                                       std::size_t window);

CriticalityLabel label_critical(const data::IncidentRecord& incident,
                                const std::vector<std::size_t>& candidates,
                                const data::SpeedTable& table, const Eigen::MatrixXd& ies,
                                std::size_t first_slot, const DiscoveryConfig& config);
CriticalityLabel label_critical(const data::IncidentRecord& incident,
                                const std::vector<std::size_t>& candidates,
                                const data::SpeedTable& table, const FlowScoreSeries& scores,
                                const DiscoveryConfig& config);

struct DiscoveryResult {
  std::vector<CriticalityLabel> labels;
  // Incidents whose influence window falls outside the scored range.
  std::vector<std::string> skipped;
};

DiscoveryResult discover_incidents(const data::CityData& city, const FlowScoreSeries& scores,
                                   const DiscoveryConfig& config);

// ---- RSV candidates ---------------------------------------------------------

enum class RsvVariant { slope_recent_historical = 1, recent_historical = 2, historical = 3 };

// Candidate RSV formulas, each divided by the normalization max. Slopes are
// absolute speed changes per slot, also normalized.
double rsv_variant_value(RsvVariant variant, const data::SpeedTable& table, std::size_t flow,
                         std::size_t t, const DiscoveryConfig& config, double p = 0.5,
                         double q = 0.5);

struct RsvValidation {
  std::array<double, 3> correlations{};
  RsvVariant selected = RsvVariant::historical;
  std::size_t incidents_used = 0;
  std::size_t samples = 0;
};

// Index of the most negative correlation (ties keep the earlier variant).
RsvVariant select_rsv_variant(const std::array<double, 3>& correlations);

// Pools AD and each candidate RSV over [s - T, s + T] for every candidate
// flow of every incident whose window is scored, then correlates.
RsvValidation rsv_variant_validation(const data::CityData& city, const FlowScoreSeries& scores,
                                     const DiscoveryConfig& config);

// ---- sweeps and reports -----------------------------------------------------

struct SweepPoint {
  double rho = 0.0;
  double theta = 0.0;
  std::size_t critical_count = 0;
};

std::vector<SweepPoint> sweep_thresholds(const data::CityData& city, const FlowScoreSeries& scores,
                                         const DiscoveryConfig& config,
                                         const std::vector<double>& rhos,
                                         const std::vector<double>& thetas);

std::string format_labels(const std::vector<CriticalityLabel>& labels);
std::vector<CriticalityLabel> parse_labels(std::string_view text);
std::string format_scores(const FlowScoreSeries& scores);
std::string format_sweep(const std::vector<SweepPoint>& sweep);
// Critical / non-critical counts by start hour and day category.
std::string format_temporal(const data::CityData& city, const std::vector<CriticalityLabel>& labels);

}  // namespace digc::discovery
