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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace digc {

enum class ErrorKind {
  invalid_argument,
  parse,
  config,
  missing_artifact,
  numeric,
  io,
};

// Every failure inside the core is raised as an Error; the C API maps the
// kind onto a status code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::invalid_argument, message);
}

// ---- hashing and seeds ------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);
// Stable per-stage seed: the same (root, label) pair always yields the same
// stream seed, and distinct labels give unrelated streams.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);
std::string hex64(std::uint64_t value);

// ---- number formatting ------------------------------------------------------

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

// ---- time -------------------------------------------------------------------

using TimePoint = std::chrono::sys_seconds;

// Accepts "YYYY-MM-DDTHH:MM[:SS]" with an optional trailing 'Z'. All times
// share one fixed offset; no zone arithmetic is performed.
TimePoint parse_iso8601(std::string_view text);
std::string format_iso8601(TimePoint t);
// 0 = Monday ... 6 = Sunday.
int weekday_index(TimePoint t);
double hour_of_day(TimePoint t);

// ---- files and CSV ----------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Reads a CSV with a required exact header. Returns data rows (split into
// fields) paired with their 1-based line numbers.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string_view> fields;
};
std::vector<CsvRow> parse_csv(std::string_view text,
                              std::string_view expected_header,
                              const std::string& file_label);

}  // namespace digc
