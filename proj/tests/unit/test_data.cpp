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
#include <doctest.h>

#include <cmath>
#include <limits>

#include "common.hpp"
#include "synthetic_city.hpp"
#include "traffic_data.hpp"

using namespace digc;

TEST_CASE("fnv1a64 published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("derived seeds are stable and label-dependent") {
  CHECK(derive_seed(7, "generate") == derive_seed(7, "generate"));
  CHECK(derive_seed(7, "generate") != derive_seed(7, "classifier"));
  CHECK(derive_seed(7, "generate") != derive_seed(8, "generate"));
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 12345.678, 0.0, 1e300}) {
    CHECK(parse_double(format_double(v), "test") == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK_THROWS_AS(parse_double("1.5x", "test"), Error);
  CHECK_THROWS_AS(parse_int("", "test"), Error);
}

TEST_CASE("iso8601 parsing and weekdays") {
  const auto t = parse_iso8601("2019-04-04T13:25:00Z");
  CHECK(format_iso8601(t) == "2019-04-04T13:25:00Z");
  CHECK(weekday_index(t) == 3);  // Thursday
  CHECK(hour_of_day(t) == doctest::Approx(13.0 + 25.0 / 60.0));
  CHECK(parse_iso8601("2019-04-04T13:25") == t);
  CHECK(data::day_category_of(parse_iso8601("2019-04-06T10:00")) == data::DayCategory::saturday);
  CHECK(data::day_category_of(parse_iso8601("2019-04-07T10:00")) == data::DayCategory::sunday);
  CHECK(data::day_category_of(parse_iso8601("2019-04-08T10:00")) == data::DayCategory::weekday);
  CHECK_THROWS_AS(parse_iso8601("2019-13-04T00:00"), Error);
}

TEST_CASE("csv header must match exactly") {
  const auto rows = parse_csv("a,b\n1,2\n\n3,4\n", "a,b", "t.csv");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].line == 4);
  CHECK(rows[1].fields[1] == "4");
  CHECK_THROWS_AS(parse_csv("a,c\n1,2\n", "a,b", "t.csv"), Error);
}

TEST_CASE("slot arithmetic uses floor division") {
  data::SpeedTable t;
  t.start_time = parse_iso8601("2019-04-04T00:00:00Z");
  t.speeds = Eigen::MatrixXd::Zero(10, 1);
  CHECK(t.slot_of(t.start_time) == 0);
  CHECK(t.slot_of(t.start_time + std::chrono::seconds(299)) == 0);
  CHECK(t.slot_of(t.start_time + std::chrono::seconds(300)) == 1);
  CHECK(t.slot_of(t.start_time - std::chrono::seconds(1)) == -1);
  CHECK(t.slot_time(3) == t.start_time + std::chrono::minutes(15));
}

TEST_CASE("city files round-trip") {
  data::SyntheticScenario sc;
  sc.n_flows = 8;
  sc.days = 2;
  sc.seed = 3;
  const auto city = data::generate_synthetic_city(sc);
  const auto& d = city.data;

  const auto table = data::parse_speed_table(data::format_speed_table(d.speeds), d.speeds.start_time);
  CHECK(table.speeds == d.speeds.speeds);
  CHECK(data::parse_incidents(data::format_incidents(d.incidents)) == d.incidents);
  CHECK(data::parse_weather(data::format_weather(d.weather), d.weather.size()) == d.weather);
  CHECK(data::parse_geometry(data::format_geometry(d.geometry)) == d.geometry);
  const auto truth = data::parse_ground_truth(data::format_ground_truth(city.truth));
  REQUIRE(truth.size() == city.truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(truth[i].incident_id == city.truth[i].incident_id);
    CHECK(truth[i].affected_flows == city.truth[i].affected_flows);
  }
}

TEST_CASE("weather is forward-filled onto every slot") {
  const auto w = data::parse_weather(
      "slot,weather_type,temperature_c,sunrise_offset_min\n0,clear,10,400\n3,rain,8,400\n", 5);
  REQUIRE(w.size() == 5);
  CHECK(w[2].weather_type == "clear");
  CHECK(w[3].weather_type == "rain");
  CHECK(w[4].temperature_c == 8.0);
  CHECK(w[4].slot == 4);
}

TEST_CASE("malformed speed tables are rejected with a line number") {
  CHECK_THROWS_AS(data::parse_speed_table("slot,flow_id,speed_kmh\n0,0,abc\n"), Error);
  try {
    data::parse_speed_table("slot,flow_id,speed_kmh\n0,0,10\n0,0,11\n");
    FAIL("duplicate entry accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("synthetic generator is deterministic in its seed") {
  data::SyntheticScenario sc;
  sc.n_flows = 12;
  sc.days = 2;
  sc.seed = 11;
  const auto a = data::generate_synthetic_city(sc);
  const auto b = data::generate_synthetic_city(sc);
  CHECK(a.data.speeds.speeds == b.data.speeds.speeds);
  CHECK(a.data.incidents == b.data.incidents);
  sc.seed = 12;
  CHECK(data::generate_synthetic_city(sc).data.speeds.speeds != a.data.speeds.speeds);
}

TEST_CASE("an injected incident slows exactly its affected flows") {
  data::SyntheticScenario sc;
  sc.n_flows = 16;
  sc.days = 2;
  sc.incidents_per_day = 0;
  sc.seed = 5;
  const auto base = data::generate_synthetic_city(sc);
  sc.injected.push_back({100, 12, 0.4, 350.0, 5, "collision", false});
  const auto hit = data::generate_synthetic_city(sc);
  REQUIRE(hit.truth.size() == 1);
  const auto& t = hit.truth[0];
  CHECK(t.start_slot == 100);
  CHECK(t.end_slot == 111);
  CHECK_FALSE(t.affected_flows.empty());
  for (std::size_t f = 0; f < 16; ++f) {
    const bool affected =
        std::find(t.affected_flows.begin(), t.affected_flows.end(), f) != t.affected_flows.end();
    const double before = base.data.speeds.speeds(105, static_cast<Eigen::Index>(f));
    const double after = hit.data.speeds.speeds(105, static_cast<Eigen::Index>(f));
    if (affected) {
      CHECK(after < before);
    } else {
      CHECK(after == before);
    }
  }
}
