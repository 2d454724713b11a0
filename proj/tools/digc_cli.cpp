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
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "digc/digc.h"

namespace {

int report(digc_status status, const std::string& message) {
  if (status != DIGC_OK) std::fprintf(stderr, "digc: %s: %s\n", digc_status_string(status), message.c_str());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Incident-aware traffic speed prediction pipeline.\n\n"
      "Commands: generate, build-graph, discover, sweep, train-classifier,\n"
      "extract-features, train, predict, evaluate, report.\n\n"
      "Settings are applied in order: --config file, then --set, then --seed/--out."};
  app.set_version_flag("--version", std::string(digc_version()));
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string seed;
  app.add_option("command", command, "Pipeline stage to run")->required();
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("-o,--out", out_dir, "Output directory (required)");
  app.add_option("-s,--set", overrides, "Override an option: key=value (repeatable)");
  app.add_option("--seed", seed, "Root seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : DIGC_CONFIG_ERROR;
  }
  if (out_dir.empty()) return report(DIGC_CONFIG_ERROR, "--out DIR is required");

  digc_pipeline* pipeline = nullptr;
  digc_status status = digc_pipeline_create(config_path.empty() ? nullptr : config_path.c_str(),
                                            out_dir.c_str(), &pipeline);
  if (status != DIGC_OK) return report(status, digc_last_create_error());

  auto set = [&](const std::string& key, const std::string& value) {
    if (status == DIGC_OK) status = digc_pipeline_set(pipeline, key.c_str(), value.c_str());
  };
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      digc_pipeline_destroy(pipeline);
      return report(DIGC_CONFIG_ERROR, "--set expects key=value, got '" + item + "'");
    }
    set(item.substr(0, eq), item.substr(eq + 1));
  }
  if (!seed.empty()) set("seed", seed);
  if (status == DIGC_OK) status = digc_pipeline_run(pipeline, command.c_str());

  const int code = report(status, digc_pipeline_last_error(pipeline));
  if (status == DIGC_OK) {
    std::printf("%s: ok (config %s)\n", command.c_str(), digc_pipeline_config_hash(pipeline));
  }
  digc_pipeline_destroy(pipeline);
  return code;
}
