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
#include "common.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace digc {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return splitmix64(root ^ fnv1a64(label));
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0 as well
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, const std::string& context) {
  text = trim(text);
  double value = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size()) {
    fail(ErrorKind::parse,
         context + ": non-numeric value '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text, const std::string& context) {
  text = trim(text);
  long long value = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() ||
      res.ptr != text.data() + text.size()) {
    fail(ErrorKind::parse,
         context + ": expected integer, got '" + std::string(text) + "'");
  }
  return value;
}

TimePoint parse_iso8601(std::string_view text) {
  using namespace std::chrono;
  text = trim(text);
  if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);
  auto bad = [&]() -> TimePoint {
    fail(ErrorKind::parse, "invalid ISO-8601 time '" + std::string(text) + "'");
  };
  if (text.size() != 16 && text.size() != 19) return bad();
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
      text[13] != ':' || (text.size() == 19 && text[16] != ':')) {
    return bad();
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    auto res = std::from_chars(text.data() + pos, text.data() + pos + len, v);
    if (res.ec != std::errc() || res.ptr != text.data() + pos + len) bad();
    return v;
  };
  const int y = num(0, 4), mo = num(5, 2), d = num(8, 2);
  const int hh = num(11, 2), mm = num(14, 2);
  const int ss = text.size() == 19 ? num(17, 2) : 0;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) return bad();
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_iso8601(TimePoint t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const auto rem = t - day_point;
  const auto h = duration_cast<hours>(rem);
  const auto m = duration_cast<minutes>(rem - h);
  const auto s = rem - h - m;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()));
  return buf;
}

int weekday_index(TimePoint t) {
  using namespace std::chrono;
  const weekday wd{floor<days>(t)};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

double hour_of_day(TimePoint t) {
  using namespace std::chrono;
  const auto rem = t - floor<days>(t);
  return static_cast<double>(rem.count()) / 3600.0;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<CsvRow> parse_csv(std::string_view text,
                              std::string_view expected_header,
                              const std::string& file_label) {
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  const auto expected_cols = split(expected_header, ',').size();
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != expected_header) {
        fail(ErrorKind::parse, file_label + " line " + std::to_string(line_no) +
                                   ": expected header '" +
                                   std::string(expected_header) + "'");
      }
      header_seen = true;
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != expected_cols) {
      fail(ErrorKind::parse, file_label + " row " + std::to_string(line_no) +
                                 ": expected " + std::to_string(expected_cols) +
                                 " fields, got " + std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    rows.push_back({line_no, std::move(fields)});
    if (end == text.size()) break;
  }
  if (!header_seen) {
    fail(ErrorKind::parse, file_label + ": missing header '" +
                               std::string(expected_header) + "'");
  }
  return rows;
}

}  // namespace digc
