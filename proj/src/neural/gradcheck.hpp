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

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "neural/params.hpp"
#include "neural/tape.hpp"

namespace digc::nn {

// Builds a scalar loss on the given tape. Must be a pure function of the
// parameter values (fixed inputs, fixed dropout seed).
using LossBuilder = std::function<Var(Tape&, ModelParams&)>;
using GradientMap = std::map<std::string, Matrix>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor so that entries whose true gradient is ~0 are judged
  // on absolute error instead.
  double floor = 1e-6;
  // 0 checks every entry; otherwise a seeded sample of this many per tensor.
  std::size_t max_entries_per_param = 0;
  std::uint64_t sample_seed = 0;
};

struct ParamCheck {
  std::string name;
  std::size_t checked = 0;
  // Entries whose stencil crosses a ReLU kink or loss clamp; not compared.
  std::size_t skipped = 0;
  double max_relative_error = 0.0;
  Eigen::Index worst_row = 0;
  Eigen::Index worst_col = 0;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

double relative_error(double analytic, double numeric, double floor);

GradientMap analytic_gradients(ModelParams& params, const LossBuilder& loss);
struct LossSample {
  double value = 0.0;
  std::uint64_t branches = 0;
};
LossSample evaluate_loss(ModelParams& params, const LossBuilder& loss);

using EntryList = std::vector<std::pair<Eigen::Index, Eigen::Index>>;
struct EntrySelection {
  EntryList compared;
  EntryList skipped;
};

// Central differences. Only entries in `selection.compared` are meaningful;
// entries whose +h and -h evaluations take different branches than the
// unperturbed point are moved to `skipped`.
GradientMap numeric_gradients(ModelParams& params, const LossBuilder& loss,
                              const GradCheckOptions& options,
                              std::map<std::string, EntrySelection>* selection = nullptr);
GradCheckReport compare_gradients(const GradientMap& analytic, const GradientMap& numeric,
                                  const std::map<std::string, EntrySelection>& selection,
                                  const GradCheckOptions& options);

GradCheckReport gradient_check(ModelParams& params, const LossBuilder& loss,
                               const GradCheckOptions& options = {});

}  // namespace digc::nn
