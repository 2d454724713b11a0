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
#include "neural/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"

namespace digc::nn {

namespace {

void check_pair(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorKind::invalid_argument, std::string(what) + ": length mismatch (" +
                                          std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) fail(ErrorKind::invalid_argument, std::string(what) + ": empty input");
}

}  // namespace

double bce_loss(std::span<const double> probs, std::span<const double> targets, double eps) {
  check_pair(probs.size(), targets.size(), "bce_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double q = std::clamp(probs[i], eps, 1.0 - eps);
    total -= targets[i] * std::log(q) + (1.0 - targets[i]) * std::log(1.0 - q);
  }
  return total / static_cast<double>(probs.size());
}

double mse_loss(std::span<const double> pred, std::span<const double> targets) {
  check_pair(pred.size(), targets.size(), "mse_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - targets[i];
    total += d * d;
  }
  return total / static_cast<double>(pred.size());
}

MapeResult mape(std::span<const double> pred, std::span<const double> targets) {
  check_pair(pred.size(), targets.size(), "mape");
  std::vector<double> terms;
  terms.reserve(pred.size());
  MapeResult r;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(targets[i] >= kMapeMinTarget)) {
      ++r.excluded;
      continue;
    }
    terms.push_back(std::abs(pred[i] - targets[i]) / targets[i]);
  }
  r.used = terms.size();
  if (terms.empty()) fail(ErrorKind::invalid_argument, "mape: every target is below 1 km/h");
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  r.percent = 100.0 * total / static_cast<double>(terms.size());
  return r;
}

F1Result f1_score(std::span<const int> predicted, std::span<const int> actual) {
  check_pair(predicted.size(), actual.size(), "f1_score");
  F1Result r;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool a = actual[i] != 0;
    if (p && a) ++r.tp;
    else if (p) ++r.fp;
    else if (a) ++r.fn;
    else ++r.tn;
  }
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

}  // namespace digc::nn
