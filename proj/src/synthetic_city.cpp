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
#include "synthetic_city.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "geo.hpp"

namespace digc::data {
namespace {

double bump(double hour, double center, double width) {
  const double z = (hour - center) / width;
  return std::exp(-0.5 * z * z);
}

// Multiplicative daily profile; 1.0 is free flow.
double daily_profile(double hour, DayCategory day, double depth) {
  if (day == DayCategory::weekday) {
    return 1.0 - depth * bump(hour, 8.0, 1.3) - depth * bump(hour, 17.5, 1.5);
  }
  return 1.0 - 0.5 * depth * bump(hour, 14.0, 2.5);
}

constexpr std::array<const char*, 4> kIncidentTypes = {"congestion", "collision",
                                                       "construction", "event"};
constexpr std::array<const char*, 4> kWeatherTypes = {"clear", "cloudy", "rain", "fog"};

}  // namespace

RoadGeometry grid_geometry(std::size_t n_flows, std::size_t districts, double spacing_m,
                           double district_gap_m, LatLng origin) {
  if (districts == 0 || n_flows < 2 * districts || n_flows % districts != 0) {
    fail(ErrorKind::invalid_argument,
         "infeasible geometry: " + std::to_string(n_flows) + " flows cannot be laid out as " +
             std::to_string(districts) + " equal grid districts of >= 2 flows");
  }
  require(spacing_m > 0.0, "grid spacing must be positive");
  const std::size_t per_district = n_flows / districts;
  std::size_t cols = 2;
  while (2 * cols * (cols - 1) < per_district) ++cols;

  const geo::Projection proj{origin};
  RoadGeometry g;
  g.flows.reserve(n_flows);
  const double district_width = static_cast<double>(cols - 1) * spacing_m + district_gap_m;
  for (std::size_t d = 0; d < districts; ++d) {
    const double x0 = static_cast<double>(d) * district_width;
    auto node = [&](std::size_t r, std::size_t c) {
      return proj.from_xy(x0 + static_cast<double>(c) * spacing_m,
                          static_cast<double>(r) * spacing_m);
    };
    // Row by row: the horizontal segments of a row, then the verticals down
    // to the next row. Every prefix of this order is a connected graph.
    std::size_t emitted = 0;
    for (std::size_t r = 0; emitted < per_district; ++r) {
      for (std::size_t c = 0; c + 1 < cols && emitted < per_district; ++c, ++emitted) {
        g.flows.push_back({node(r, c), node(r, c + 1)});
      }
      for (std::size_t c = 0; c < cols && emitted < per_district; ++c, ++emitted) {
        g.flows.push_back({node(r, c), node(r + 1, c)});
      }
    }
  }
  return g;
}

SyntheticCity generate_synthetic_city(const SyntheticScenario& sc) {
  if (sc.n_flows < 2) fail(ErrorKind::invalid_argument, "synthetic city needs N >= 2 flows");
  if (sc.days < 2) fail(ErrorKind::invalid_argument, "synthetic city needs >= 2 days");
  require(sc.base_speed_min > 0.0 && sc.base_speed_max >= sc.base_speed_min,
          "invalid base speed range");
  require(sc.ar_phi >= 0.0 && sc.ar_phi < 1.0, "ar_phi must be in [0, 1)");

  SyntheticCity city;
  auto& data = city.data;
  data.geometry = grid_geometry(sc.n_flows, sc.districts, sc.spacing_m, sc.district_gap_m,
                                sc.origin);
  const std::size_t n = sc.n_flows;
  const std::size_t per_district = n / sc.districts;
  const std::size_t slots = sc.days * kSlotsPerDay;
  const geo::Projection proj{sc.origin};

  std::vector<LatLng> centers(n);
  for (std::size_t i = 0; i < n; ++i) centers[i] = data.geometry.flows[i].center();

  // Per-flow character.
  std::mt19937_64 flow_rng(derive_seed(sc.seed, "synthetic.flows"));
  std::uniform_real_distribution<double> base_dist(sc.base_speed_min, sc.base_speed_max);
  std::uniform_real_distribution<double> depth_dist(0.7, 1.3);
  std::vector<double> base(n), depth(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = base_dist(flow_rng);
    depth[i] = depth_dist(flow_rng) * sc.rush_depth;
  }

  // Weather: hourly Markov chain, recorded on every slot.
  std::mt19937_64 weather_rng(derive_seed(sc.seed, "synthetic.weather"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  data.weather.reserve(slots);
  std::size_t state = 0;
  double day_temp_offset = 0.0;
  for (std::size_t s = 0; s < slots; ++s) {
    const std::size_t day = s / kSlotsPerDay;
    const double hour = static_cast<double>(s % kSlotsPerDay) / 12.0;
    if (s % kSlotsPerDay == 0) day_temp_offset = 2.0 * gauss(weather_rng);
    if (s % 12 == 0 && s > 0 && unit(weather_rng) > 0.85) {
      const double u = unit(weather_rng);
      state = u < 0.5 ? 0 : (u < 0.75 ? 1 : (u < 0.92 ? 2 : 3));
    }
    const double temp = 14.0 + day_temp_offset +
                        5.0 * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0);
    const double sunrise = 385.0 - 1.2 * static_cast<double>(day);
    data.weather.push_back({s, kWeatherTypes[state], std::round(temp * 10.0) / 10.0, sunrise});
  }

  // Baseline speeds: profile x weather x (1 + district AR + flow AR + white).
  std::mt19937_64 noise_rng(derive_seed(sc.seed, "synthetic.noise"));
  const double innov = std::sqrt(1.0 - sc.ar_phi * sc.ar_phi);
  std::vector<double> district_ar(sc.districts, 0.0), flow_ar(n, 0.0);
  data.speeds.start_time = sc.start_time;
  data.speeds.speeds.resize(static_cast<Eigen::Index>(slots), static_cast<Eigen::Index>(n));
  for (std::size_t s = 0; s < slots; ++s) {
    const TimePoint t = data.speeds.slot_time(s);
    const double hour = hour_of_day(t);
    const DayCategory day = day_category_of(t);
    const auto& w = data.weather[s].weather_type;
    const double weather_factor =
        w == "rain" ? 1.0 - sc.rain_slowdown : (w == "fog" ? 1.0 - 0.6 * sc.rain_slowdown : 1.0);
    for (auto& d : district_ar) {
      d = sc.ar_phi * d + innov * sc.district_ar_noise * gauss(noise_rng);
    }
    for (std::size_t i = 0; i < n; ++i) {
      flow_ar[i] = sc.ar_phi * flow_ar[i] + innov * sc.flow_ar_noise * gauss(noise_rng);
      const double white = sc.white_noise * gauss(noise_rng);
      const double mult = 1.0 + district_ar[i / per_district] + flow_ar[i] + white;
      const double v = base[i] * daily_profile(hour, day, depth[i]) * weather_factor * mult;
      data.speeds.speeds(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(i)) =
          std::max(v, 0.5);
    }
  }

  // Incidents. Drawn from their own stream so that adding or removing an
  // incident never perturbs the baseline speeds.
  struct Placed {
    IncidentRecord rec;
    IncidentTruth truth;
  };
  std::vector<Placed> placed;
  auto affected_within = [&](LatLng center, double radius) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
      if (proj.distance(centers[i], center) <= radius) out.push_back(i);
    }
    return out;
  };
  auto make_record = [&](std::size_t start_slot, std::size_t duration, LatLng center,
                         std::string type, bool closed, std::int64_t offset_s) {
    IncidentRecord r;
    r.type = std::move(type);
    r.center = center;
    r.start_time = data.speeds.slot_time(start_slot) + std::chrono::seconds(offset_s);
    r.end_time = r.start_time + std::chrono::seconds(kSlotSeconds * static_cast<std::int64_t>(duration));
    r.road_closed = closed;
    r.day_category = day_category_of(r.start_time);
    return r;
  };

  std::mt19937_64 inc_rng(derive_seed(sc.seed, "synthetic.incidents"));
  const auto target = static_cast<std::size_t>(std::llround(sc.incidents_per_day *
                                                            static_cast<double>(sc.days)));
  const std::size_t margin = 36;
  if (target > 0 && slots > 2 * margin + sc.max_duration_slots) {
    require(sc.min_duration_slots >= 1 && sc.max_duration_slots >= sc.min_duration_slots,
            "invalid incident duration range");
    std::uniform_int_distribution<std::size_t> slot_dist(margin,
                                                         slots - margin - sc.max_duration_slots);
    std::uniform_int_distribution<std::size_t> flow_dist(0, n - 1);
    std::uniform_int_distribution<std::size_t> dur_dist(sc.min_duration_slots,
                                                        sc.max_duration_slots);
    std::uniform_int_distribution<std::int64_t> offset_dist(0, 4);
    std::uniform_int_distribution<std::size_t> type_dist(0, kIncidentTypes.size() - 1);
    std::size_t attempts = 0;
    std::size_t accepted = 0;
    while (accepted < target && attempts < 200 * target) {
      ++attempts;
      const std::size_t start = slot_dist(inc_rng);
      const double hour = static_cast<double>(start % kSlotsPerDay) / 12.0;
      const bool weekday = day_category_of(data.speeds.slot_time(start)) == DayCategory::weekday;
      const double weight = 1.0 + (weekday ? bump(hour, 8.0, 1.0) + bump(hour, 17.5, 1.2) : 0.0);
      const double accept_u = unit(inc_rng);
      const std::size_t flow = flow_dist(inc_rng);
      const std::size_t duration = dur_dist(inc_rng);
      const double jitter_x = 30.0 * (2.0 * unit(inc_rng) - 1.0);
      const double jitter_y = 30.0 * (2.0 * unit(inc_rng) - 1.0);
      const double class_u = unit(inc_rng);
      const double factor_u = unit(inc_rng);
      const std::size_t type_idx = type_dist(inc_rng);
      const double closed_u = unit(inc_rng);
      const std::int64_t offset_min = offset_dist(inc_rng);
      if (accept_u * 2.0 > weight) continue;

      const auto [cx, cy] = proj.to_xy(centers[flow]);
      const LatLng center = proj.from_xy(cx + jitter_x, cy + jitter_y);
      bool clash = false;
      for (const auto& p : placed) {
        const bool near = proj.distance(p.rec.center, center) < sc.min_separation_m;
        const bool overlaps = start <= p.truth.end_slot + sc.min_gap_slots &&
                              p.truth.start_slot <= start + duration + sc.min_gap_slots;
        if (near && overlaps) {
          clash = true;
          break;
        }
      }
      if (clash) continue;

      double factor = 1.0;
      if (class_u < sc.high_impact_share) {
        factor = sc.high_factor_min + factor_u * (sc.high_factor_max - sc.high_factor_min);
      } else if (class_u >= sc.high_impact_share + sc.zero_impact_share) {
        factor = sc.moderate_factor_min +
                 factor_u * (sc.moderate_factor_max - sc.moderate_factor_min);
      }
      const bool closed = closed_u < (factor <= sc.high_factor_max ? 0.4 : 0.1);
      Placed p{make_record(start, duration, center, kIncidentTypes[type_idx], closed,
                           offset_min * 60),
               {}};
      p.truth.factor = factor;
      p.truth.radius_m = sc.impact_radius_m;
      p.truth.start_slot = start;
      p.truth.end_slot = start + duration - 1;
      p.truth.affected_flows = affected_within(center, sc.impact_radius_m);
      placed.push_back(std::move(p));
      ++accepted;
    }
  }
  for (const auto& inj : sc.injected) {
    require(inj.at_flow < n, "injected incident flow out of range");
    require(inj.start_slot + inj.duration_slots < slots, "injected incident beyond table end");
    require(inj.factor > 0.0, "injected incident factor must be positive");
    require(inj.duration_slots >= 1, "injected incident needs a duration");
    const LatLng center = centers[inj.at_flow];
    Placed p{make_record(inj.start_slot, inj.duration_slots, center, inj.type, inj.road_closed, 0),
             {}};
    p.truth.factor = inj.factor;
    p.truth.radius_m = inj.radius_m;
    p.truth.start_slot = inj.start_slot;
    p.truth.end_slot = inj.start_slot + inj.duration_slots - 1;
    p.truth.affected_flows = affected_within(center, inj.radius_m);
    placed.push_back(std::move(p));
  }

  std::stable_sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) {
    return a.rec.start_time < b.rec.start_time;
  });
  for (std::size_t k = 0; k < placed.size(); ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "inc-%05zu", k + 1);
    placed[k].rec.id = id;
    placed[k].truth.incident_id = id;
    for (std::size_t flow : placed[k].truth.affected_flows) {
      for (std::size_t s = placed[k].truth.start_slot; s <= placed[k].truth.end_slot; ++s) {
        data.speeds.speeds(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(flow)) *=
            placed[k].truth.factor;
      }
    }
    data.incidents.push_back(placed[k].rec);
    city.truth.push_back(placed[k].truth);
  }
  return city;
}

std::string format_ground_truth(const std::vector<IncidentTruth>& truth) {
  std::string out = "incident_id,factor,radius_m,start_slot,end_slot,affected_flows\n";
  for (const auto& t : truth) {
    std::string flows;
    for (std::size_t k = 0; k < t.affected_flows.size(); ++k) {
      if (k) flows += ';';
      flows += std::to_string(t.affected_flows[k]);
    }
    out += t.incident_id + "," + format_double(t.factor) + "," + format_double(t.radius_m) + "," +
           std::to_string(t.start_slot) + "," + std::to_string(t.end_slot) + "," + flows + "\n";
  }
  return out;
}

std::vector<IncidentTruth> parse_ground_truth(std::string_view text) {
  const auto rows = parse_csv(
      text, "incident_id,factor,radius_m,start_slot,end_slot,affected_flows", "ground_truth.csv");
  std::vector<IncidentTruth> out;
  for (const auto& row : rows) {
    const std::string ctx = "ground_truth.csv row " + std::to_string(row.line);
    IncidentTruth t;
    t.incident_id = std::string(row.fields[0]);
    t.factor = parse_double(row.fields[1], ctx);
    t.radius_m = parse_double(row.fields[2], ctx);
    t.start_slot = static_cast<std::size_t>(parse_int(row.fields[3], ctx));
    t.end_slot = static_cast<std::size_t>(parse_int(row.fields[4], ctx));
    if (!row.fields[5].empty()) {
      for (auto f : split(row.fields[5], ';')) {
        t.affected_flows.push_back(static_cast<std::size_t>(parse_int(f, ctx)));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace digc::data
