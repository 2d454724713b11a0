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
#ifndef DIGC_DIGC_H
#define DIGC_DIGC_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define DIGC_API __attribute__((visibility("default")))
#else
#define DIGC_API
#endif

typedef enum digc_status {
  DIGC_OK = 0,
  DIGC_ERROR = 1,
  DIGC_CONFIG_ERROR = 2,
  DIGC_MISSING_ARTIFACT = 3,
  DIGC_NUMERIC_ERROR = 4
} digc_status;

typedef struct digc_pipeline digc_pipeline;

/* config_path may be NULL; out_dir is required. */
DIGC_API digc_status digc_pipeline_create(const char* config_path, const char* out_dir,
                                          digc_pipeline** out);
/* Overrides one option; applies to later runs. */
DIGC_API digc_status digc_pipeline_set(digc_pipeline* pipeline, const char* key, const char* value);
DIGC_API digc_status digc_pipeline_run(digc_pipeline* pipeline, const char* command);
/* Message of the last failed call on this handle, or "" after a success. */
DIGC_API const char* digc_pipeline_last_error(const digc_pipeline* pipeline);
/* Hash of the effective configuration, 16 hex digits. */
DIGC_API const char* digc_pipeline_config_hash(digc_pipeline* pipeline);
DIGC_API void digc_pipeline_destroy(digc_pipeline* pipeline);

/* Message for errors raised before a handle exists. */
DIGC_API const char* digc_last_create_error(void);
DIGC_API const char* digc_status_string(digc_status status);
DIGC_API const char* digc_version(void);

#ifdef __cplusplus
}
#endif

#endif
