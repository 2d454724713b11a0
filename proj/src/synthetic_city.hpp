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
#include <string>
#include <vector>

#include "traffic_data.hpp"

namespace digc::data {

// An incident placed explicitly by the caller, centered on a flow centroid.
struct InjectedIncident {
  std::size_t start_slot = 0;
  std::size_t duration_slots = 12;
  double factor = 0.5;
  double radius_m = 350.0;
  std::size_t at_flow = 0;
  std::string type = "collision";
  bool road_closed = false;
};

struct SyntheticScenario {
  std::uint64_t seed = 7;
  std::size_t n_flows = 24;
  std::size_t days = 7;
  // Disconnected grid districts; n_flows must divide evenly among them.
  std::size_t districts = 1;
  double spacing_m = 300.0;
  double district_gap_m = 3000.0;
  LatLng origin{37.75, -122.45};
  TimePoint start_time = parse_iso8601("2019-04-04T00:00:00Z");

  double base_speed_min = 30.0;
  double base_speed_max = 60.0;
  double rush_depth = 0.2;
  // Stationary standard deviations of the multiplicative noise terms.
  double white_noise = 0.03;
  double flow_ar_noise = 0.03;
  double district_ar_noise = 0.04;
  double ar_phi = 0.8;
  double rain_slowdown = 0.05;

  double incidents_per_day = 8.0;
  double high_impact_share = 0.45;
  double zero_impact_share = 0.35;
  double high_factor_min = 0.3;
  double high_factor_max = 0.5;
  double moderate_factor_min = 0.6;
  double moderate_factor_max = 0.85;
  double impact_radius_m = 350.0;
  std::size_t min_duration_slots = 3;
  std::size_t max_duration_slots = 18;
  // Two random incidents closer than min_separation_m must be at least
  // min_gap_slots apart (end of one to start of the other).
  std::size_t min_gap_slots = 12;
  double min_separation_m = 1000.0;

  std::vector<InjectedIncident> injected;
};

struct IncidentTruth {
  std::string incident_id;
  double factor = 1.0;
  double radius_m = 0.0;
  std::size_t start_slot = 0;
  std::size_t end_slot = 0;  // inclusive
  std::vector<std::size_t> affected_flows;
  bool operator==(const IncidentTruth&) const = default;
};

struct SyntheticCity {
  CityData data;
  std::vector<IncidentTruth> truth;  // parallel to data.incidents
};

// Grid-like geometry for n_flows split over `districts` disconnected grids.
RoadGeometry grid_geometry(std::size_t n_flows, std::size_t districts, double spacing_m,
                           double district_gap_m, LatLng origin);

SyntheticCity generate_synthetic_city(const SyntheticScenario& scenario);

std::string format_ground_truth(const std::vector<IncidentTruth>& truth);
std::vector<IncidentTruth> parse_ground_truth(std::string_view text);

}  // namespace digc::data
