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

#include <cstddef>
#include <span>

namespace digc::nn {

inline constexpr double kBceEps = 1e-7;
// Targets below this speed are left out of MAPE.
inline constexpr double kMapeMinTarget = 1.0;

double bce_loss(std::span<const double> probs, std::span<const double> targets,
                double eps = kBceEps);
double mse_loss(std::span<const double> pred, std::span<const double> targets);

struct MapeResult {
  double percent = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
};
// Order-independent: contributions are summed in sorted order.
MapeResult mape(std::span<const double> pred, std::span<const double> targets);

struct F1Result {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};
F1Result f1_score(std::span<const int> predicted, std::span<const int> actual);

}  // namespace digc::nn
