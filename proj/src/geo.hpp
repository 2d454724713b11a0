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

#include <cmath>
#include <numbers>
#include <utility>

#include "traffic_data.hpp"

namespace digc::geo {

inline constexpr double kEarthRadiusM = 6371008.8;

// Equirectangular projection around a reference latitude. Good enough at
// city scale and monotone in true geodesic distance.
struct Projection {
  data::LatLng origin;

  double meters_per_deg_lat() const { return kEarthRadiusM * std::numbers::pi / 180.0; }
  double meters_per_deg_lng() const {
    return meters_per_deg_lat() * std::cos(origin.lat * std::numbers::pi / 180.0);
  }
  // (x east, y north) in meters relative to origin.
  std::pair<double, double> to_xy(data::LatLng p) const {
    return {(p.lng - origin.lng) * meters_per_deg_lng(),
            (p.lat - origin.lat) * meters_per_deg_lat()};
  }
  data::LatLng from_xy(double x, double y) const {
    return {origin.lat + y / meters_per_deg_lat(), origin.lng + x / meters_per_deg_lng()};
  }
  double distance(data::LatLng a, data::LatLng b) const {
    const double dx = (a.lng - b.lng) * meters_per_deg_lng();
    const double dy = (a.lat - b.lat) * meters_per_deg_lat();
    return std::hypot(dx, dy);
  }
};

}  // namespace digc::geo
