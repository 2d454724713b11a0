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
#include "digc_net.hpp"

namespace digc::net {

namespace {
using Index = Eigen::Index;
Index idx(std::size_t v) { return static_cast<Index>(v); }
}  // namespace

std::vector<Matrix> persistence_predictions(const SeriesContext& ctx, std::size_t horizon,
                                            const std::vector<std::size_t>& targets) {
  require(horizon >= 1, "horizon must be >= 1");
  std::vector<Matrix> out;
  out.reserve(targets.size());
  for (const auto t : targets) {
    require(t >= 1 && t < ctx.slot_count(), "persistence target out of range");
    out.push_back(ctx.speeds.row(idx(t - 1)).replicate(idx(horizon), 1));
  }
  return out;
}

std::vector<Matrix> historical_average_predictions(const SeriesContext& ctx, std::size_t horizon,
                                                   std::size_t boundary_slot,
                                                   const std::vector<std::size_t>& targets) {
  require(horizon >= 1, "horizon must be >= 1");
  const std::size_t days = std::min(boundary_slot, ctx.slot_count()) / data::kSlotsPerDay;
  if (days == 0) fail(ErrorKind::invalid_argument, "historical average needs one whole training day");
  Matrix profile = Matrix::Zero(idx(data::kSlotsPerDay), ctx.speeds.cols());
  for (std::size_t d = 0; d < days; ++d) {
    profile += ctx.speeds.middleRows(idx(d * data::kSlotsPerDay), idx(data::kSlotsPerDay));
  }
  profile /= static_cast<double>(days);
  std::vector<Matrix> out;
  out.reserve(targets.size());
  for (const auto t : targets) {
    Matrix m(idx(horizon), ctx.speeds.cols());
    for (std::size_t s = 0; s < horizon; ++s) m.row(idx(s)) = profile.row(idx((t + s) % data::kSlotsPerDay));
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace digc::net
