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
#include "neural/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "common.hpp"

namespace digc::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradientMap analytic_gradients(ModelParams& params, const LossBuilder& loss) {
  params.zero_grad();
  Tape tape;
  tape.backward(loss(tape, params));
  GradientMap out;
  for (const auto& [name, p] : params.entries()) out[name] = p.grad;
  return out;
}

LossSample evaluate_loss(ModelParams& params, const LossBuilder& loss) {
  Tape tape;
  const Var l = loss(tape, params);
  if (l.rows() != 1 || l.cols() != 1) fail(ErrorKind::invalid_argument, "loss must be 1x1");
  return {l.value()(0, 0), tape.branch_signature()};
}

namespace {

EntryList select_entries(const Matrix& m, const GradCheckOptions& options, std::mt19937_64& rng) {
  EntryList all;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) all.emplace_back(r, c);
  }
  if (options.max_entries_per_param == 0 || all.size() <= options.max_entries_per_param) return all;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(options.max_entries_per_param);
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

GradientMap numeric_gradients(ModelParams& params, const LossBuilder& loss,
                              const GradCheckOptions& options,
                              std::map<std::string, EntrySelection>* selection) {
  std::mt19937_64 rng(options.sample_seed);
  const std::uint64_t base = evaluate_loss(params, loss).branches;
  GradientMap out;
  for (auto& [name, p] : params.entries()) {
    Matrix g = Matrix::Zero(p.value.rows(), p.value.cols());
    EntrySelection sel;
    for (const auto& [r, c] : select_entries(p.value, options, rng)) {
      const double saved = p.value(r, c);
      p.value(r, c) = saved + options.step;
      const LossSample up = evaluate_loss(params, loss);
      p.value(r, c) = saved - options.step;
      const LossSample down = evaluate_loss(params, loss);
      p.value(r, c) = saved;
      g(r, c) = (up.value - down.value) / (2.0 * options.step);
      if (up.branches == base && down.branches == base) {
        sel.compared.emplace_back(r, c);
      } else {
        sel.skipped.emplace_back(r, c);
      }
    }
    out[name] = std::move(g);
    if (selection != nullptr) (*selection)[name] = std::move(sel);
  }
  return out;
}

GradCheckReport compare_gradients(const GradientMap& analytic, const GradientMap& numeric,
                                  const std::map<std::string, EntrySelection>& selection,
                                  const GradCheckOptions& options) {
  GradCheckReport report;
  for (const auto& [name, sel] : selection) {
    const auto a = analytic.find(name);
    const auto n = numeric.find(name);
    if (a == analytic.end() || n == numeric.end()) {
      fail(ErrorKind::invalid_argument, "gradient for " + name + " is missing");
    }
    ParamCheck pc;
    pc.name = name;
    pc.skipped = sel.skipped.size();
    for (const auto& [r, c] : sel.compared) {
      const double e = relative_error(a->second(r, c), n->second(r, c), options.floor);
      ++pc.checked;
      if (e > pc.max_relative_error || std::isnan(e)) {
        pc.max_relative_error = std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
        pc.worst_row = r;
        pc.worst_col = c;
      }
    }
    report.max_relative_error = std::max(report.max_relative_error, pc.max_relative_error);
    report.checked += pc.checked;
    report.skipped += pc.skipped;
    report.params.push_back(std::move(pc));
  }
  report.passed = report.checked > 0 && report.max_relative_error < options.tolerance;
  return report;
}

GradCheckReport gradient_check(ModelParams& params, const LossBuilder& loss,
                               const GradCheckOptions& options) {
  const GradientMap analytic = analytic_gradients(params, loss);
  std::map<std::string, EntrySelection> selection;
  const GradientMap numeric = numeric_gradients(params, loss, options, &selection);
  return compare_gradients(analytic, numeric, selection, options);
}

}  // namespace digc::nn
