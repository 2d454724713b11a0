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
#include "traffic_data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace digc::data {

using nlohmann::json;

BoundingBox RoadGeometry::bounds(double margin_deg) const {
  require(!flows.empty(), "bounds of empty geometry");
  BoundingBox box{flows[0].start, flows[0].start};
  for (const auto& f : flows) {
    for (const auto& p : {f.start, f.end}) {
      box.min.lat = std::min(box.min.lat, p.lat);
      box.min.lng = std::min(box.min.lng, p.lng);
      box.max.lat = std::max(box.max.lat, p.lat);
      box.max.lng = std::max(box.max.lng, p.lng);
    }
  }
  box.min.lat -= margin_deg;
  box.min.lng -= margin_deg;
  box.max.lat += margin_deg;
  box.max.lng += margin_deg;
  return box;
}

std::int64_t SpeedTable::slot_of(TimePoint t) const {
  const auto delta = (t - start_time).count();
  auto q = delta / kSlotSeconds;
  if (delta % kSlotSeconds != 0 && delta < 0) --q;
  return q;
}

std::string to_string(DayCategory c) {
  switch (c) {
    case DayCategory::weekday: return "weekday";
    case DayCategory::saturday: return "saturday";
    case DayCategory::sunday: return "sunday";
  }
  return "weekday";
}

DayCategory parse_day_category(std::string_view text) {
  if (text == "weekday") return DayCategory::weekday;
  if (text == "saturday") return DayCategory::saturday;
  if (text == "sunday") return DayCategory::sunday;
  fail(ErrorKind::parse, "unknown day_category '" + std::string(text) + "'");
}

DayCategory day_category_of(TimePoint t) {
  switch (weekday_index(t)) {
    case 5: return DayCategory::saturday;
    case 6: return DayCategory::sunday;
    default: return DayCategory::weekday;
  }
}

// ---- speeds -----------------------------------------------------------------

SpeedTable parse_speed_table(std::string_view text, TimePoint start_time,
                             const std::string& label) {
  const auto rows = parse_csv(text, "slot,flow_id,speed_kmh", label);
  if (rows.empty()) fail(ErrorKind::parse, label + ": no data rows");

  struct Cell {
    long long slot;
    long long flow;
    double speed;
    std::size_t line;
  };
  std::vector<Cell> cells;
  cells.reserve(rows.size());
  long long max_slot = -1, max_flow = -1;
  for (const auto& row : rows) {
    const std::string ctx = label + " row " + std::to_string(row.line);
    Cell c{parse_int(row.fields[0], ctx), parse_int(row.fields[1], ctx),
           parse_double(row.fields[2], ctx), row.line};
    if (c.slot < 0 || c.flow < 0) {
      fail(ErrorKind::parse, ctx + ": negative slot or flow_id");
    }
    if (!std::isfinite(c.speed) || c.speed < 0.0) {
      fail(ErrorKind::parse, ctx + ": speed must be finite and >= 0");
    }
    max_slot = std::max(max_slot, c.slot);
    max_flow = std::max(max_flow, c.flow);
    cells.push_back(c);
  }

  const auto n_slots = static_cast<Eigen::Index>(max_slot + 1);
  const auto n_flows = static_cast<Eigen::Index>(max_flow + 1);
  SpeedTable table;
  table.start_time = start_time;
  table.speeds = Eigen::MatrixXd::Constant(n_slots, n_flows, std::nan(""));
  std::vector<std::size_t> seen_line(static_cast<std::size_t>(n_slots * n_flows), 0);
  for (const auto& c : cells) {
    auto& seen = seen_line[static_cast<std::size_t>(c.slot * n_flows + c.flow)];
    if (seen != 0) {
      fail(ErrorKind::parse, label + " row " + std::to_string(c.line) +
                                 ": duplicate (slot " + std::to_string(c.slot) +
                                 ", flow " + std::to_string(c.flow) +
                                 "), first seen at row " + std::to_string(seen));
    }
    seen = c.line;
    table.speeds(c.slot, c.flow) = c.speed;
  }
  for (Eigen::Index f = 0; f < n_flows; ++f) {
    for (Eigen::Index s = 0; s < n_slots; ++s) {
      if (seen_line[static_cast<std::size_t>(s * n_flows + f)] == 0) {
        fail(ErrorKind::parse, label + ": missing slot " + std::to_string(s) +
                                   " for flow " + std::to_string(f));
      }
    }
  }
  return table;
}

SpeedTable load_speed_table(const std::filesystem::path& path, TimePoint start_time) {
  return parse_speed_table(read_file(path), start_time, path.filename().string());
}

std::string format_speed_table(const SpeedTable& table) {
  std::string out = "slot,flow_id,speed_kmh\n";
  out.reserve(out.size() + table.slot_count() * table.flow_count() * 16);
  for (Eigen::Index s = 0; s < table.speeds.rows(); ++s) {
    for (Eigen::Index f = 0; f < table.speeds.cols(); ++f) {
      out += std::to_string(s);
      out += ',';
      out += std::to_string(f);
      out += ',';
      out += format_double(table.speeds(s, f));
      out += '\n';
    }
  }
  return out;
}

void save_speed_table(const std::filesystem::path& path, const SpeedTable& table) {
  write_file(path, format_speed_table(table));
}

// ---- incidents --------------------------------------------------------------

std::vector<IncidentRecord> parse_incidents(std::string_view text,
                                            const std::string& label) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, label + ": " + e.what());
  }
  if (!doc.is_array()) fail(ErrorKind::parse, label + ": expected a JSON array");

  std::vector<IncidentRecord> out;
  out.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    const std::string ctx = label + " record " + std::to_string(i);
    try {
      IncidentRecord r;
      r.id = rec.at("id").is_string() ? rec.at("id").get<std::string>()
                                      : rec.at("id").dump();
      r.type = rec.at("type").get<std::string>();
      r.center = {rec.at("lat").get<double>(), rec.at("lng").get<double>()};
      r.start_time = parse_iso8601(rec.at("start_time").get<std::string>());
      r.end_time = parse_iso8601(rec.at("end_time").get<std::string>());
      r.road_closed = rec.at("road_closed").get<bool>();
      r.day_category = rec.contains("day_category")
                           ? parse_day_category(rec["day_category"].get<std::string>())
                           : day_category_of(r.start_time);
      if (r.end_time < r.start_time) {
        fail(ErrorKind::parse, ctx + " (id " + r.id + "): end_time precedes start_time");
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorKind::parse, ctx + ": " + e.what());
    } catch (const Error& e) {
      if (std::string_view(e.what()).starts_with(label)) throw;
      fail(ErrorKind::parse, ctx + ": " + e.what());
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.start_time != b.start_time) return a.start_time < b.start_time;
    return a.id < b.id;
  });
  return out;
}

std::vector<IncidentRecord> load_incidents(const std::filesystem::path& path) {
  return parse_incidents(read_file(path), path.filename().string());
}

std::string format_incidents(const std::vector<IncidentRecord>& incidents) {
  json doc = json::array();
  for (const auto& r : incidents) {
    json rec;
    rec["id"] = r.id;
    rec["type"] = r.type;
    rec["lat"] = r.center.lat;
    rec["lng"] = r.center.lng;
    rec["start_time"] = format_iso8601(r.start_time);
    rec["end_time"] = format_iso8601(r.end_time);
    rec["road_closed"] = r.road_closed;
    rec["day_category"] = to_string(r.day_category);
    doc.push_back(std::move(rec));
  }
  return doc.dump(2) + "\n";
}

void save_incidents(const std::filesystem::path& path,
                    const std::vector<IncidentRecord>& incidents) {
  write_file(path, format_incidents(incidents));
}

// ---- weather ----------------------------------------------------------------

std::vector<WeatherRecord> parse_weather(std::string_view text,
                                         std::optional<std::size_t> slot_count,
                                         const std::string& label) {
  const auto rows = parse_csv(text, "slot,weather_type,temperature_c,sunrise_offset_min", label);
  std::vector<WeatherRecord> sparse;
  sparse.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string ctx = label + " row " + std::to_string(row.line);
    const auto slot = parse_int(row.fields[0], ctx);
    if (slot < 0) fail(ErrorKind::parse, ctx + ": negative slot");
    if (!sparse.empty() && static_cast<std::size_t>(slot) <= sparse.back().slot) {
      fail(ErrorKind::parse, ctx + ": slots must be strictly increasing");
    }
    if (row.fields[1].empty()) fail(ErrorKind::parse, ctx + ": empty weather_type");
    sparse.push_back({static_cast<std::size_t>(slot), std::string(row.fields[1]),
                      parse_double(row.fields[2], ctx),
                      parse_double(row.fields[3], ctx)});
  }
  if (sparse.empty()) {
    if (slot_count && *slot_count > 0) {
      fail(ErrorKind::parse, label + ": no records to fill the slot grid");
    }
    return {};
  }
  if (sparse.front().slot != 0) {
    fail(ErrorKind::parse, label + ": first record must be slot 0 (nothing to forward-fill from)");
  }
  const std::size_t n = slot_count.value_or(sparse.back().slot + 1);
  std::vector<WeatherRecord> dense;
  dense.reserve(n);
  std::size_t next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    while (next < sparse.size() && sparse[next].slot <= s) ++next;
    WeatherRecord r = sparse[next - 1];
    r.slot = s;
    dense.push_back(std::move(r));
  }
  return dense;
}

std::vector<WeatherRecord> load_weather(const std::filesystem::path& path,
                                        std::optional<std::size_t> slot_count) {
  return parse_weather(read_file(path), slot_count, path.filename().string());
}

std::string format_weather(const std::vector<WeatherRecord>& weather) {
  std::string out = "slot,weather_type,temperature_c,sunrise_offset_min\n";
  for (const auto& w : weather) {
    out += std::to_string(w.slot) + "," + w.weather_type + "," +
           format_double(w.temperature_c) + "," + format_double(w.sunrise_offset_min) + "\n";
  }
  return out;
}

void save_weather(const std::filesystem::path& path,
                  const std::vector<WeatherRecord>& weather) {
  write_file(path, format_weather(weather));
}

// ---- geometry ---------------------------------------------------------------

RoadGeometry parse_geometry(std::string_view text, const std::string& label) {
  const auto rows = parse_csv(text, "flow_id,lat1,lng1,lat2,lng2", label);
  if (rows.empty()) fail(ErrorKind::parse, label + ": zero flows");
  std::vector<std::optional<FlowSegment>> slots(rows.size());
  for (const auto& row : rows) {
    const std::string ctx = label + " row " + std::to_string(row.line);
    const auto id = parse_int(row.fields[0], ctx);
    if (id < 0 || static_cast<std::size_t>(id) >= rows.size()) {
      fail(ErrorKind::parse, ctx + ": flow_id out of dense range 0.." +
                                 std::to_string(rows.size() - 1));
    }
    auto& dst = slots[static_cast<std::size_t>(id)];
    if (dst) fail(ErrorKind::parse, ctx + ": duplicate flow_id " + std::to_string(id));
    dst = FlowSegment{{parse_double(row.fields[1], ctx), parse_double(row.fields[2], ctx)},
                      {parse_double(row.fields[3], ctx), parse_double(row.fields[4], ctx)}};
  }
  RoadGeometry g;
  g.flows.reserve(slots.size());
  for (auto& s : slots) g.flows.push_back(*s);
  return g;
}

RoadGeometry load_geometry(const std::filesystem::path& path) {
  return parse_geometry(read_file(path), path.filename().string());
}

std::string format_geometry(const RoadGeometry& geometry) {
  std::string out = "flow_id,lat1,lng1,lat2,lng2\n";
  for (std::size_t i = 0; i < geometry.flows.size(); ++i) {
    const auto& f = geometry.flows[i];
    out += std::to_string(i) + "," + format_double(f.start.lat) + "," +
           format_double(f.start.lng) + "," + format_double(f.end.lat) + "," +
           format_double(f.end.lng) + "\n";
  }
  return out;
}

void save_geometry(const std::filesystem::path& path, const RoadGeometry& geometry) {
  write_file(path, format_geometry(geometry));
}

}  // namespace digc::data

namespace digc::data {

CityData load_city(const std::filesystem::path& dir) {
  const auto meta_path = dir / "city.json";
  if (!std::filesystem::exists(meta_path)) {
    fail(ErrorKind::missing_artifact, "missing artifact " + meta_path.string());
  }
  for (const char* name : {"speeds.csv", "incidents.json", "weather.csv", "geometry.csv"}) {
    if (!std::filesystem::exists(dir / name)) {
      fail(ErrorKind::missing_artifact, "missing artifact " + (dir / name).string());
    }
  }
  json meta;
  try {
    meta = json::parse(read_file(meta_path));
  } catch (const json::exception& e) {
    fail(ErrorKind::parse, "city.json: " + std::string(e.what()));
  }
  CityData city;
  city.geometry = load_geometry(dir / "geometry.csv");
  city.speeds = load_speed_table(dir / "speeds.csv",
                                 parse_iso8601(meta.at("start_time").get<std::string>()));
  if (city.speeds.flow_count() != city.geometry.size()) {
    fail(ErrorKind::parse, "speeds.csv has " + std::to_string(city.speeds.flow_count()) +
                               " flows but geometry.csv has " +
                               std::to_string(city.geometry.size()));
  }
  city.incidents = load_incidents(dir / "incidents.json");
  city.weather = load_weather(dir / "weather.csv", city.speeds.slot_count());
  return city;
}

void save_city(const std::filesystem::path& dir, const CityData& city) {
  std::filesystem::create_directories(dir);
  save_geometry(dir / "geometry.csv", city.geometry);
  save_speed_table(dir / "speeds.csv", city.speeds);
  save_incidents(dir / "incidents.json", city.incidents);
  save_weather(dir / "weather.csv", city.weather);
  json meta;
  meta["start_time"] = format_iso8601(city.speeds.start_time);
  meta["slot_minutes"] = kSlotMinutes;
  meta["n_flows"] = city.speeds.flow_count();
  meta["n_slots"] = city.speeds.slot_count();
  write_file(dir / "city.json", meta.dump(2) + "\n");
}

}  // namespace digc::data
