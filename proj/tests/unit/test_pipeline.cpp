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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "pipeline.hpp"

using namespace digc;
using namespace digc::pipeline;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("digc_unit_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

PipelineConfig tiny(const fs::path& out) {
  PipelineConfig c;
  c.out_dir = out;
  set_option(c, "scenario.n_flows", "8");
  set_option(c, "scenario.days", "2");
  set_option(c, "scenario.incidents_per_day", "6");
  return c;
}

}  // namespace

TEST_CASE("options parse and reject bad input") {
  PipelineConfig c;
  set_option(c, "digc.horizon", "3");
  set_option(c, "discovery.rho", "0.25");
  set_option(c, "digc.variant", "st_periodic");
  set_option(c, "sweep.theta", "0.1,0.3");
  CHECK(c.digc.horizon == 3);
  CHECK(c.discovery.rho == 0.25);
  CHECK(c.digc.variant == net::Variant::st_periodic);
  CHECK(c.sweep_theta == std::vector<double>{0.1, 0.3});
  for (const auto& [k, v] : std::vector<std::pair<std::string, std::string>>{
           {"digc.nothing", "1"}, {"digc.horizon", "two"}, {"digc.variant", "bogus"}, {"seed", "-1"}}) {
    try {
      set_option(c, k, v);
      FAIL("accepted " << k << "=" << v);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::config);
    }
  }
  const auto keys = option_keys();
  CHECK(std::is_sorted(keys.begin(), keys.end()));
}

TEST_CASE("canonical config covers every key and ignores the output directory") {
  PipelineConfig a, b;
  a.out_dir = "/tmp/one";
  b.out_dir = "/tmp/two";
  CHECK(canonical_config(a) == canonical_config(b));
  CHECK(config_hash(a) == config_hash(b));
  const auto text = canonical_config(a);
  for (const auto& key : option_keys()) CHECK(text.find(key + "=") != std::string::npos);
  set_option(b, "discovery.theta", "0.2");
  CHECK(config_hash(a) != config_hash(b));
  CHECK(config_hash(a).size() == 16);
}

TEST_CASE("config files map nested objects onto dotted keys") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream out(dir / "c.json");
    out << R"({"seed": 3, "digc": {"horizon": 2, "variant": "full"}, "sweep": {"rho": [0.5, 0.7]}})";
  }
  PipelineConfig from_file;
  apply_config_file(from_file, dir / "c.json");
  PipelineConfig from_set;
  set_option(from_set, "seed", "3");
  set_option(from_set, "digc.horizon", "2");
  set_option(from_set, "sweep.rho", "0.5,0.7");
  CHECK(canonical_config(from_file) == canonical_config(from_set));
  {
    std::ofstream out(dir / "bad.json");
    out << "{ not json";
  }
  CHECK_THROWS_AS(apply_config_file(from_file, dir / "bad.json"), Error);
  try {
    apply_config_file(from_file, dir / "absent.json");
    FAIL("missing config accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("stages are deterministic and refuse missing inputs") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  for (const auto& dir : {a, b}) {
    Pipeline p(tiny(dir));
    p.run("generate");
    p.run("build-graph");
    p.run("discover");
    p.run("sweep");
  }
  for (const char* rel : {"data/speeds.csv", "data/incidents.json", "graph/edges.csv",
                          "discovery/labels.csv", "sweep/sweep.csv", "discovery/summary.json"}) {
    INFO(rel);
    CHECK(slurp(a / rel) == slurp(b / rel));
  }
  CHECK(fs::exists(a / "discovery" / "manifest.json"));
  CHECK_FALSE(fs::exists(a / ".digc.lock"));

  const auto empty = fresh_dir("missing");
  Pipeline p(tiny(empty));
  try {
    p.run("train");
    FAIL("train ran without inputs");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::missing_artifact);
  }
  try {
    p.run("fly");
    FAIL("unknown command accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
  }
}

TEST_CASE("a held lock blocks the run") {
  const auto dir = fresh_dir("lock");
  { std::ofstream(dir / ".digc.lock") << "1"; }
  Pipeline p(tiny(dir));
  CHECK_THROWS_AS(p.run("generate"), Error);
  CHECK(fs::exists(dir / ".digc.lock"));
}
