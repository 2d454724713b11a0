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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"

namespace digc::data {

inline constexpr int kSlotMinutes = 5;
inline constexpr std::int64_t kSlotSeconds = 60 * kSlotMinutes;
inline constexpr std::size_t kSlotsPerDay = 24 * 60 / kSlotMinutes;

// Reference scale of the two cities the pipeline was designed against. Used
// only to size synthetic scenarios.
inline constexpr std::size_t kReferenceFlowsSmallCity = 2416;
inline constexpr std::size_t kReferenceEdgesSmallCity = 19334;
inline constexpr std::size_t kReferenceFlowsLargeCity = 13028;
inline constexpr std::size_t kReferenceEdgesLargeCity = 92470;

/// Dense index of a flow (one road segment). Valid values are 0..N-1.
struct FlowId {
  std::size_t index = 0;
  friend auto operator<=>(const FlowId&, const FlowId&) = default;
};

struct LatLng {
  double lat = 0.0;
  double lng = 0.0;
  bool operator==(const LatLng&) const = default;
};

struct BoundingBox {
  LatLng min;
  LatLng max;
  bool contains(LatLng p) const {
    return p.lat >= min.lat && p.lat <= max.lat && p.lng >= min.lng &&
           p.lng <= max.lng;
  }
  LatLng center() const {
    return {(min.lat + max.lat) / 2.0, (min.lng + max.lng) / 2.0};
  }
};

struct FlowSegment {
  LatLng start;
  LatLng end;
  // Midpoint of the two endpoints.
  LatLng center() const {
    return {(start.lat + end.lat) / 2.0, (start.lng + end.lng) / 2.0};
  }
  bool operator==(const FlowSegment&) const = default;
};

struct RoadGeometry {
  std::vector<FlowSegment> flows;

  std::size_t size() const { return flows.size(); }
  // Box around every endpoint, widened by margin_deg on each side.
  BoundingBox bounds(double margin_deg = 0.01) const;
  bool operator==(const RoadGeometry&) const = default;
};

/// Speeds in km/h on a strict 5-minute grid. Rows are slots, columns flows.
struct SpeedTable {
  Eigen::MatrixXd speeds;
  TimePoint start_time{};

  std::size_t slot_count() const { return static_cast<std::size_t>(speeds.rows()); }
  std::size_t flow_count() const { return static_cast<std::size_t>(speeds.cols()); }
  double speed(std::size_t slot, FlowId flow) const {
    return speeds(static_cast<Eigen::Index>(slot),
                  static_cast<Eigen::Index>(flow.index));
  }
  TimePoint slot_time(std::size_t slot) const {
    return start_time + std::chrono::seconds(kSlotSeconds * static_cast<std::int64_t>(slot));
  }
  // Floor division; negative when t precedes the table.
  std::int64_t slot_of(TimePoint t) const;
};

enum class DayCategory { weekday, saturday, sunday };
std::string to_string(DayCategory c);
DayCategory parse_day_category(std::string_view text);
DayCategory day_category_of(TimePoint t);

struct IncidentRecord {
  std::string id;
  std::string type;  // open enum: congestion, collision, construction, event, ...
  LatLng center;
  TimePoint start_time{};
  TimePoint end_time{};  // anticipated end
  bool road_closed = false;
  DayCategory day_category = DayCategory::weekday;

  double duration_minutes() const {
    return static_cast<double>((end_time - start_time).count()) / 60.0;
  }
  bool operator==(const IncidentRecord&) const = default;
};

struct WeatherRecord {
  std::size_t slot = 0;
  std::string weather_type;
  double temperature_c = 0.0;
  double sunrise_offset_min = 0.0;
  bool operator==(const WeatherRecord&) const = default;
};

// ---- speeds.csv -------------------------------------------------------------

SpeedTable parse_speed_table(std::string_view text, TimePoint start_time = {},
                             const std::string& label = "speeds.csv");
SpeedTable load_speed_table(const std::filesystem::path& path,
                            TimePoint start_time = {});
std::string format_speed_table(const SpeedTable& table);
void save_speed_table(const std::filesystem::path& path, const SpeedTable& table);

// ---- incidents.json ---------------------------------------------------------

std::vector<IncidentRecord> parse_incidents(std::string_view text,
                                            const std::string& label = "incidents.json");
std::vector<IncidentRecord> load_incidents(const std::filesystem::path& path);
std::string format_incidents(const std::vector<IncidentRecord>& incidents);
void save_incidents(const std::filesystem::path& path,
                    const std::vector<IncidentRecord>& incidents);

// ---- weather.csv ------------------------------------------------------------

// Records are forward-filled onto every slot in [0, slot_count). When
// slot_count is absent the grid ends at the last record.
std::vector<WeatherRecord> parse_weather(std::string_view text,
                                         std::optional<std::size_t> slot_count = {},
                                         const std::string& label = "weather.csv");
std::vector<WeatherRecord> load_weather(const std::filesystem::path& path,
                                        std::optional<std::size_t> slot_count = {});
std::string format_weather(const std::vector<WeatherRecord>& weather);
void save_weather(const std::filesystem::path& path,
                  const std::vector<WeatherRecord>& weather);

// ---- geometry.csv -----------------------------------------------------------

RoadGeometry parse_geometry(std::string_view text,
                            const std::string& label = "geometry.csv");
RoadGeometry load_geometry(const std::filesystem::path& path);
std::string format_geometry(const RoadGeometry& geometry);
void save_geometry(const std::filesystem::path& path, const RoadGeometry& geometry);

// ---- a city data directory --------------------------------------------------

// Everything the pipeline reads about one city: speeds.csv, incidents.json,
// weather.csv and geometry.csv plus city.json, which carries the start time
// of slot 0 (speeds.csv only stores slot indices).
struct CityData {
  RoadGeometry geometry;
  SpeedTable speeds;
  std::vector<IncidentRecord> incidents;
  std::vector<WeatherRecord> weather;  // dense, one record per slot
};

CityData load_city(const std::filesystem::path& dir);
void save_city(const std::filesystem::path& dir, const CityData& city);

}  // namespace digc::data
