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
#include "digc/digc.h"

#include <exception>
#include <new>
#include <optional>
#include <string>

#include "pipeline.hpp"

struct digc_pipeline {
  digc::pipeline::PipelineConfig config;
  std::string error;
  std::string hash;
};

namespace {

thread_local std::string create_error;

digc_status status_of(digc::ErrorKind kind) {
  switch (kind) {
    case digc::ErrorKind::config:
      return DIGC_CONFIG_ERROR;
    case digc::ErrorKind::missing_artifact:
      return DIGC_MISSING_ARTIFACT;
    case digc::ErrorKind::numeric:
      return DIGC_NUMERIC_ERROR;
    default:
      return DIGC_ERROR;
  }
}

template <class F>
digc_status guarded(std::string& error, F&& body) {
  try {
    body();
    error.clear();
    return DIGC_OK;
  } catch (const digc::Error& e) {
    error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    error = "out of memory";
  } catch (const std::exception& e) {
    error = e.what();
  } catch (...) {
    error = "unknown failure";
  }
  return DIGC_ERROR;
}

}  // namespace

extern "C" {

digc_status digc_pipeline_create(const char* config_path, const char* out_dir, digc_pipeline** out) {
  if (out == nullptr) {
    create_error = "output handle pointer is null";
    return DIGC_ERROR;
  }
  *out = nullptr;
  digc::pipeline::PipelineConfig config;
  const auto status = guarded(create_error, [&] {
    if (out_dir == nullptr || *out_dir == '\0') digc::fail(digc::ErrorKind::config, "an output directory is required");
    config.out_dir = out_dir;
    if (config_path != nullptr && *config_path != '\0') digc::pipeline::apply_config_file(config, config_path);
  });
  if (status != DIGC_OK) return status;
  *out = new (std::nothrow) digc_pipeline{std::move(config), {}, {}};
  if (*out == nullptr) {
    create_error = "out of memory";
    return DIGC_ERROR;
  }
  return DIGC_OK;
}

digc_status digc_pipeline_set(digc_pipeline* pipeline, const char* key, const char* value) {
  if (pipeline == nullptr) return DIGC_ERROR;
  return guarded(pipeline->error, [&] {
    if (key == nullptr || value == nullptr) digc::fail(digc::ErrorKind::config, "option key and value are required");
    const std::string k = key;
    if (k == "out") {
      pipeline->config.out_dir = value;
    } else {
      digc::pipeline::set_option(pipeline->config, k, value);
    }
  });
}

digc_status digc_pipeline_run(digc_pipeline* pipeline, const char* command) {
  if (pipeline == nullptr) return DIGC_ERROR;
  return guarded(pipeline->error, [&] {
    if (command == nullptr) digc::fail(digc::ErrorKind::config, "no command given");
    digc::pipeline::Pipeline(pipeline->config).run(command);
  });
}

const char* digc_pipeline_last_error(const digc_pipeline* pipeline) {
  return pipeline == nullptr ? "null pipeline handle" : pipeline->error.c_str();
}

const char* digc_pipeline_config_hash(digc_pipeline* pipeline) {
  if (pipeline == nullptr) return "";
  pipeline->hash = digc::pipeline::config_hash(pipeline->config);
  return pipeline->hash.c_str();
}

void digc_pipeline_destroy(digc_pipeline* pipeline) { delete pipeline; }

const char* digc_last_create_error(void) { return create_error.c_str(); }

const char* digc_status_string(digc_status status) {
  switch (status) {
    case DIGC_OK:
      return "ok";
    case DIGC_CONFIG_ERROR:
      return "configuration error";
    case DIGC_MISSING_ARTIFACT:
      return "missing artifact";
    case DIGC_NUMERIC_ERROR:
      return "numeric failure";
    case DIGC_ERROR:
      break;
  }
  return "error";
}

const char* digc_version(void) { return "0.1.0"; }

}  // extern "C"
