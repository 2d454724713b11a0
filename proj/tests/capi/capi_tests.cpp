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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "digc/digc.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("digc_capi_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::string(digc_status_string(DIGC_OK)) == "ok");
  CHECK(std::string(digc_status_string(DIGC_MISSING_ARTIFACT)) == "missing artifact");
  CHECK(std::string(digc_version()).size() > 0);
}

TEST_CASE("create requires an output directory") {
  digc_pipeline* p = nullptr;
  CHECK(digc_pipeline_create(nullptr, nullptr, &p) == DIGC_CONFIG_ERROR);
  CHECK(p == nullptr);
  CHECK(std::string(digc_last_create_error()).find("output directory") != std::string::npos);
}

TEST_CASE("missing config file is a config error") {
  digc_pipeline* p = nullptr;
  CHECK(digc_pipeline_create("/nonexistent/config.json", "/tmp/x", &p) == DIGC_CONFIG_ERROR);
}

TEST_CASE("unknown option and unknown command are config errors") {
  digc_pipeline* p = nullptr;
  REQUIRE(digc_pipeline_create(nullptr, scratch("opts").c_str(), &p) == DIGC_OK);
  CHECK(digc_pipeline_set(p, "no.such.key", "1") == DIGC_CONFIG_ERROR);
  CHECK(std::string(digc_pipeline_last_error(p)).find("no.such.key") != std::string::npos);
  CHECK(digc_pipeline_set(p, "digc.horizon", "abc") == DIGC_CONFIG_ERROR);
  CHECK(digc_pipeline_set(p, "digc.horizon", "2") == DIGC_OK);
  CHECK(std::string(digc_pipeline_last_error(p)).empty());
  CHECK(digc_pipeline_run(p, "fly") == DIGC_CONFIG_ERROR);
  digc_pipeline_destroy(p);
}

TEST_CASE("config hash follows options, not the output directory") {
  digc_pipeline* a = nullptr;
  digc_pipeline* b = nullptr;
  REQUIRE(digc_pipeline_create(nullptr, "/tmp/a", &a) == DIGC_OK);
  REQUIRE(digc_pipeline_create(nullptr, "/tmp/b", &b) == DIGC_OK);
  const std::string ha = digc_pipeline_config_hash(a);
  CHECK(ha.size() == 16);
  CHECK(ha == digc_pipeline_config_hash(b));
  REQUIRE(digc_pipeline_set(b, "seed", "8") == DIGC_OK);
  CHECK(ha != digc_pipeline_config_hash(b));
  digc_pipeline_destroy(a);
  digc_pipeline_destroy(b);
}

TEST_CASE("config file values feed the pipeline") {
  const auto dir = scratch("file");
  fs::create_directories(dir);
  const auto cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"seed": 3, "digc": {"horizon": 2}, "sweep": {"theta": [0, 0.1]}})";
  digc_pipeline* a = nullptr;
  digc_pipeline* b = nullptr;
  REQUIRE(digc_pipeline_create(cfg.c_str(), dir.c_str(), &a) == DIGC_OK);
  REQUIRE(digc_pipeline_create(nullptr, dir.c_str(), &b) == DIGC_OK);
  REQUIRE(digc_pipeline_set(b, "seed", "3") == DIGC_OK);
  REQUIRE(digc_pipeline_set(b, "digc.horizon", "2") == DIGC_OK);
  REQUIRE(digc_pipeline_set(b, "sweep.theta", "0,0.1") == DIGC_OK);
  CHECK(std::string(digc_pipeline_config_hash(a)) == digc_pipeline_config_hash(b));
  digc_pipeline_destroy(a);
  digc_pipeline_destroy(b);
}

TEST_CASE("stages without upstream artifacts report missing artifacts") {
  digc_pipeline* p = nullptr;
  REQUIRE(digc_pipeline_create(nullptr, scratch("missing").c_str(), &p) == DIGC_OK);
  CHECK(digc_pipeline_run(p, "evaluate") == DIGC_MISSING_ARTIFACT);
  CHECK(std::string(digc_pipeline_last_error(p)).find("missing artifact") != std::string::npos);
  CHECK(digc_pipeline_run(p, "discover") == DIGC_MISSING_ARTIFACT);
  CHECK(digc_pipeline_run(p, "report") == DIGC_MISSING_ARTIFACT);
  digc_pipeline_destroy(p);
}

TEST_CASE("a held lock blocks a second run") {
  const auto dir = scratch("lock");
  fs::create_directories(dir);
  std::ofstream(dir / ".digc.lock") << "1\n";
  digc_pipeline* p = nullptr;
  REQUIRE(digc_pipeline_create(nullptr, dir.c_str(), &p) == DIGC_OK);
  CHECK(digc_pipeline_run(p, "generate") == DIGC_ERROR);
  CHECK(std::string(digc_pipeline_last_error(p)).find("in use") != std::string::npos);
  fs::remove(dir / ".digc.lock");
  REQUIRE(digc_pipeline_set(p, "scenario.days", "2") == DIGC_OK);
  REQUIRE(digc_pipeline_set(p, "scenario.n_flows", "8") == DIGC_OK);
  CHECK(digc_pipeline_run(p, "generate") == DIGC_OK);
  CHECK(fs::exists(dir / "data" / "manifest.json"));
  CHECK_FALSE(fs::exists(dir / ".digc.lock"));
  digc_pipeline_destroy(p);
}
