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
#include "incident_discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "geo.hpp"

namespace digc::discovery {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t v) { return static_cast<Index>(v); }

// Groups of flow indices that share a label, each sorted ascending.
std::vector<std::vector<std::size_t>> label_groups(std::size_t n, Labels labels) {
  if (labels.empty()) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return {std::move(all)};
  }
  require(labels.size() == n, "label count " + std::to_string(labels.size()) +
                                  " does not match flow count " + std::to_string(n));
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < n; ++i) by_label[labels[i]].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [label, members] : by_label) out.push_back(std::move(members));
  return out;
}

// Centered window of one flow plus its sum of squares; constant windows are
// flagged so that tiny rounding residue never produces a spurious correlation.
struct Centered {
  std::vector<double> values;
  double ss = 0.0;
  bool flat = true;
};

Centered center_window(const double* x, std::size_t n) {
  Centered c;
  c.values.resize(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sum += x[k];
    if (x[k] != x[0]) c.flat = false;
  }
  const double mean = sum / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    c.values[k] = x[k] - mean;
    c.ss += c.values[k] * c.values[k];
  }
  return c;
}

double correlate(const Centered& a, const Centered& b) {
  if (a.flat || b.flat || a.ss <= 0.0 || b.ss <= 0.0) return 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) sxy += a.values[k] * b.values[k];
  return std::clamp(sxy / std::sqrt(a.ss * b.ss), -1.0, 1.0);
}

void check_window(const data::SpeedTable& table, std::size_t t, std::size_t window) {
  require(window >= 1, "similarity window must be at least 1 slot");
  if (t + 1 < window || t >= table.slot_count()) {
    fail(ErrorKind::invalid_argument,
         "similarity window [" + std::to_string(static_cast<long long>(t) - static_cast<long long>(window) + 1) +
             ", " + std::to_string(t) + "] is outside the table (0.." +
             std::to_string(table.slot_count()) + ")");
  }
}

// Similarity among `members` at slot t, as a dense |members|^2 block.
Eigen::MatrixXd group_similarity(const data::SpeedTable& table, std::size_t t, std::size_t window,
                                 const std::vector<std::size_t>& members) {
  const std::size_t m = members.size();
  const std::size_t begin = t + 1 - window;
  std::vector<Centered> centered;
  centered.reserve(m);
  for (auto f : members) centered.push_back(center_window(&table.speeds(idx(begin), idx(f)), window));
  Eigen::MatrixXd s(idx(m), idx(m));
  for (std::size_t a = 0; a < m; ++a) {
    s(idx(a), idx(a)) = 1.0;
    for (std::size_t b = a + 1; b < m; ++b) {
      const double v = correlate(centered[a], centered[b]);
      s(idx(a), idx(b)) = v;
      s(idx(b), idx(a)) = v;
    }
  }
  return s;
}

// AD of row a inside one group block.
double group_ad(std::size_t a, const Eigen::MatrixXd& s_prev, const Eigen::MatrixXd& s_curr,
                double delta) {
  double num = 0.0;
  double den = 0.0;
  for (Index b = 0; b < s_curr.cols(); ++b) {
    if (b == idx(a) || s_curr(idx(a), b) < delta) continue;
    const double w = s_prev(idx(a), b);
    num += w * std::max(0.0, w - s_curr(idx(a), b));
    den += w;
  }
  if (den <= 0.0) return 0.0;
  return std::max(0.0, num / den);
}

double window_mean(const data::SpeedTable& table, std::size_t flow, std::size_t t,
                   std::size_t rsv_window) {
  const std::size_t begin = t + 1 >= rsv_window ? t + 1 - rsv_window : 0;
  double sum = 0.0;
  for (std::size_t k = begin; k <= t; ++k) sum += table.speeds(idx(k), idx(flow));
  return sum / static_cast<double>(t - begin + 1);
}

double rsv_from(double mean, double v, double max) {
  return max > 0.0 ? std::abs(mean - v) / max : 0.0;
}

void check_range(const data::SpeedTable& table, const DiscoveryConfig& config,
                 std::size_t first_slot, std::size_t last_slot) {
  require(table.slot_count() > 0 && table.flow_count() > 0, "empty speed table");
  if (first_slot < config.similarity_window || last_slot >= table.slot_count() ||
      first_slot > last_slot) {
    fail(ErrorKind::invalid_argument,
         "score range [" + std::to_string(first_slot) + ", " + std::to_string(last_slot) +
             "] needs similarity_window (" + std::to_string(config.similarity_window) +
             ") <= first <= last < " + std::to_string(table.slot_count()));
  }
}

std::int64_t incident_slot(const data::SpeedTable& table, const data::IncidentRecord& incident) {
  return table.slot_of(incident.start_time);
}

}  // namespace

void DiscoveryConfig::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) fail(ErrorKind::config, "rho must lie in [0, 1]");
  if (!(theta >= 0.0)) fail(ErrorKind::config, "theta must be >= 0");
  if (!(radius_m > 0.0)) fail(ErrorKind::config, "radius must be > 0");
  if (similarity_window < 2 || rsv_window < 1 || norm_half_window < 1 || influence_window < 1) {
    fail(ErrorKind::config, "window lengths must be >= 1 (similarity window >= 2)");
  }
  if (clusters < 1) fail(ErrorKind::config, "cluster count must be >= 1");
}

double pearson_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(ErrorKind::invalid_argument, "pearson_similarity length mismatch (" +
                                          std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
  }
  require(x.size() >= 2, "pearson_similarity needs at least 2 samples");
  return correlate(center_window(x.data(), x.size()), center_window(y.data(), y.size()));
}

Eigen::MatrixXd similarity_matrix(const data::SpeedTable& table, std::size_t t,
                                  const DiscoveryConfig& config, Labels labels) {
  check_window(table, t, config.similarity_window);
  const std::size_t n = table.flow_count();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(idx(n), idx(n));
  for (const auto& members : label_groups(n, labels)) {
    const auto block = group_similarity(table, t, config.similarity_window, members);
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = 0; b < members.size(); ++b) {
        s(idx(members[a]), idx(members[b])) = block(idx(a), idx(b));
      }
    }
  }
  return s;
}

Eigen::MatrixXd similarity_decrease(const Eigen::MatrixXd& s_prev, const Eigen::MatrixXd& s_curr) {
  if (s_prev.rows() != s_curr.rows() || s_prev.cols() != s_curr.cols()) {
    fail(ErrorKind::invalid_argument, "similarity_decrease shape mismatch");
  }
  return (s_prev - s_curr).cwiseMax(0.0);
}

double anomalous_degree(std::size_t flow, const Eigen::MatrixXd& s_prev,
                        const Eigen::MatrixXd& s_curr, const Eigen::MatrixXd& sd, double delta,
                        Labels labels) {
  const Index n = s_curr.rows();
  require(s_curr.cols() == n && s_prev.rows() == n && s_prev.cols() == n && sd.rows() == n &&
              sd.cols() == n,
          "anomalous_degree: matrices must be square and the same size");
  require(flow < static_cast<std::size_t>(n), "anomalous_degree: flow out of range");
  require(labels.empty() || labels.size() == static_cast<std::size_t>(n),
          "anomalous_degree: label count mismatch");
  double num = 0.0;
  double den = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (j == idx(flow) || s_curr(idx(flow), j) < delta) continue;
    if (!labels.empty() && labels[static_cast<std::size_t>(j)] != labels[flow]) continue;
    num += s_prev(idx(flow), j) * sd(idx(flow), j);
    den += s_prev(idx(flow), j);
  }
  if (den <= 0.0) return 0.0;
  return std::max(0.0, num / den);
}

double normalization_max(const data::SpeedTable& table, std::size_t flow, std::size_t t,
                         std::size_t half_window) {
  require(flow < table.flow_count() && t < table.slot_count(), "normalization_max out of range");
  const std::size_t begin = t >= half_window ? t - half_window : 0;
  const std::size_t end = std::min(table.slot_count() - 1, t + half_window);
  return table.speeds.col(idx(flow)).segment(idx(begin), idx(end - begin + 1)).maxCoeff();
}

double relative_speed_variation(const data::SpeedTable& table, std::size_t flow, std::size_t t,
                                std::size_t rsv_window, std::size_t half_window) {
  require(rsv_window >= 1, "RSV window must be at least 1 slot");
  require(flow < table.flow_count() && t < table.slot_count(), "RSV slot/flow out of range");
  return rsv_from(window_mean(table, flow, t, rsv_window), table.speeds(idx(t), idx(flow)),
                  normalization_max(table, flow, t, half_window));
}

double incident_effect_score(double ad, double rsv, double rho) {
  require(rho >= 0.0 && rho <= 1.0, "rho must lie in [0, 1]");
  return rho * ad + (1.0 - rho) * rsv;
}

Eigen::MatrixXd FlowScoreSeries::ies_for(double r) const {
  require(r >= 0.0 && r <= 1.0, "rho must lie in [0, 1]");
  return r * ad + (1.0 - r) * rsv;
}

Eigen::MatrixXd anomalous_degree_series(const data::SpeedTable& table, const DiscoveryConfig& config,
                                        std::size_t first_slot, std::size_t last_slot,
                                        Labels labels) {
  check_range(table, config, first_slot, last_slot);
  const std::size_t n = table.flow_count();
  Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(idx(last_slot - first_slot + 1), idx(n));
  for (const auto& members : label_groups(n, labels)) {
    Eigen::MatrixXd prev = group_similarity(table, first_slot - 1, config.similarity_window, members);
    for (std::size_t t = first_slot; t <= last_slot; ++t) {
      Eigen::MatrixXd curr = group_similarity(table, t, config.similarity_window, members);
      for (std::size_t a = 0; a < members.size(); ++a) {
        ad(idx(t - first_slot), idx(members[a])) = group_ad(a, prev, curr, config.delta);
      }
      prev = std::move(curr);
    }
  }
  return ad;
}

Eigen::MatrixXd rsv_series(const data::SpeedTable& table, const DiscoveryConfig& config,
                           std::size_t first_slot, std::size_t last_slot) {
  require(first_slot <= last_slot && last_slot < table.slot_count(), "RSV range out of table");
  const std::size_t n = table.flow_count();
  const std::size_t slots = table.slot_count();
  const std::size_t h = config.norm_half_window;
  Eigen::MatrixXd out(idx(last_slot - first_slot + 1), idx(n));
  for (std::size_t f = 0; f < n; ++f) {
    const auto col = table.speeds.col(idx(f));
    // Sliding max over [t - h, t + h] with a monotone deque of slot indices.
    std::deque<std::size_t> dq;
    std::size_t pushed = first_slot >= h ? first_slot - h : 0;
    for (std::size_t t = first_slot; t <= last_slot; ++t) {
      const std::size_t hi = std::min(slots - 1, t + h);
      for (; pushed <= hi; ++pushed) {
        while (!dq.empty() && col(idx(dq.back())) <= col(idx(pushed))) dq.pop_back();
        dq.push_back(pushed);
      }
      const std::size_t lo = t >= h ? t - h : 0;
      while (dq.front() < lo) dq.pop_front();
      out(idx(t - first_slot), idx(f)) =
          rsv_from(window_mean(table, f, t, config.rsv_window), col(idx(t)), col(idx(dq.front())));
    }
  }
  return out;
}

FlowScoreSeries compute_scores(const data::SpeedTable& table, const DiscoveryConfig& config,
                               Labels labels) {
  return compute_scores(table, config, config.similarity_window, table.slot_count() - 1, labels);
}

FlowScoreSeries compute_scores(const data::SpeedTable& table, const DiscoveryConfig& config,
                               std::size_t first_slot, std::size_t last_slot, Labels labels) {
  config.validate();
  FlowScoreSeries s;
  s.first_slot = first_slot;
  s.rho = config.rho;
  s.ad = anomalous_degree_series(table, config, first_slot, last_slot, labels);
  s.rsv = rsv_series(table, config, first_slot, last_slot);
  s.ies = s.ies_for(config.rho);
  return s;
}

std::vector<std::size_t> candidate_flows(const data::IncidentRecord& incident,
                                         const data::RoadGeometry& geometry, double radius_m) {
  const geo::Projection proj{incident.center};
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    if (proj.distance(geometry.flows[i].center(), incident.center) <= radius_m) out.push_back(i);
  }
  return out;
}

std::pair<std::int64_t, std::int64_t> influence_window(std::int64_t start_slot,
                                                       std::size_t window) {
  const auto half = static_cast<std::int64_t>(window / 2);
  return {start_slot - half, start_slot + half};
}

CriticalityLabel label_critical(const data::IncidentRecord& incident,
                                const std::vector<std::size_t>& candidates,
                                const data::SpeedTable& table, const Eigen::MatrixXd& ies,
                                std::size_t first_slot, const DiscoveryConfig& config) {
  const auto [lo, hi] = influence_window(incident_slot(table, incident), config.influence_window);
  const auto first = static_cast<std::int64_t>(first_slot);
  const auto last = first + static_cast<std::int64_t>(ies.rows()) - 1;
  if (lo < first || hi > last) {
    fail(ErrorKind::invalid_argument,
         "influence window [" + std::to_string(lo) + ", " + std::to_string(hi) + "] of incident " +
             incident.id + " is outside the scored slots [" + std::to_string(first) + ", " +
             std::to_string(last) + "]");
  }
  CriticalityLabel label;
  label.incident_id = incident.id;
  for (auto f : candidates) {
    require(f < static_cast<std::size_t>(ies.cols()), "candidate flow out of range");
    const double m = ies.col(idx(f)).segment(lo - first, hi - lo + 1).maxCoeff();
    label.max_ies = std::max(label.max_ies, m);
    if (m >= config.theta) label.affected.push_back({f, m});
  }
  label.is_critical = !label.affected.empty();
  return label;
}

CriticalityLabel label_critical(const data::IncidentRecord& incident,
                                const std::vector<std::size_t>& candidates,
                                const data::SpeedTable& table, const FlowScoreSeries& scores,
                                const DiscoveryConfig& config) {
  return label_critical(incident, candidates, table, scores.ies, scores.first_slot, config);
}

namespace {

bool window_scored(const data::SpeedTable& table, const data::IncidentRecord& incident,
                   const FlowScoreSeries& scores, std::size_t window) {
  const auto [lo, hi] = influence_window(incident_slot(table, incident), window);
  return lo >= static_cast<std::int64_t>(scores.first_slot) &&
         hi <= static_cast<std::int64_t>(scores.last_slot());
}

}  // namespace

DiscoveryResult discover_incidents(const data::CityData& city, const FlowScoreSeries& scores,
                                   const DiscoveryConfig& config) {
  DiscoveryResult out;
  for (const auto& inc : city.incidents) {
    if (!window_scored(city.speeds, inc, scores, config.influence_window)) {
      out.skipped.push_back(inc.id);
      continue;
    }
    out.labels.push_back(label_critical(inc, candidate_flows(inc, city.geometry, config.radius_m),
                                        city.speeds, scores, config));
  }
  return out;
}

double rsv_variant_value(RsvVariant variant, const data::SpeedTable& table, std::size_t flow,
                         std::size_t t, const DiscoveryConfig& config, double p, double q) {
  require(flow < table.flow_count() && t < table.slot_count(), "RSV slot/flow out of range");
  const auto col = table.speeds.col(idx(flow));
  const double m = normalization_max(table, flow, t, config.norm_half_window);
  if (m <= 0.0) return 0.0;
  const double v = col(idx(t));
  const double mean = window_mean(table, flow, t, config.rsv_window);
  const double prev = t > 0 ? col(idx(t - 1)) : v;
  const double hist = std::abs(mean - v) / m;
  const double recent = std::abs(prev - v) / m;
  switch (variant) {
    case RsvVariant::historical:
      return hist;
    case RsvVariant::recent_historical:
      return hist * p + recent * q;
    case RsvVariant::slope_recent_historical: {
      const std::size_t begin = t + 1 >= config.rsv_window ? t + 1 - config.rsv_window : 0;
      double slope_sum = 0.0;
      std::size_t count = 0;
      for (std::size_t k = std::max<std::size_t>(begin, 1); k <= t; ++k) {
        slope_sum += std::abs(col(idx(k)) - col(idx(k - 1))) / m;
        ++count;
      }
      const double mean_slope = count > 0 ? slope_sum / static_cast<double>(count) : 0.0;
      return hist * mean_slope * p + recent * recent * q;
    }
  }
  fail(ErrorKind::invalid_argument, "unknown RSV variant");
}

RsvVariant select_rsv_variant(const std::array<double, 3>& correlations) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < 3; ++i) {
    if (correlations[i] < correlations[best]) best = i;
  }
  return static_cast<RsvVariant>(best + 1);
}

RsvValidation rsv_variant_validation(const data::CityData& city, const FlowScoreSeries& scores,
                                     const DiscoveryConfig& config) {
  RsvValidation out;
  std::vector<double> ad;
  std::array<std::vector<double>, 3> variants;
  const auto span = static_cast<std::int64_t>(config.influence_window);
  for (const auto& inc : city.incidents) {
    const auto s = incident_slot(city.speeds, inc);
    const auto lo = s - span;
    const auto hi = s + span;
    if (lo < static_cast<std::int64_t>(scores.first_slot) ||
        hi > static_cast<std::int64_t>(scores.last_slot())) {
      continue;
    }
    const auto flows = candidate_flows(inc, city.geometry, config.radius_m);
    if (flows.empty()) continue;
    ++out.incidents_used;
    for (auto f : flows) {
      for (auto t = lo; t <= hi; ++t) {
        const auto slot = static_cast<std::size_t>(t);
        ad.push_back(scores.ad(idx(slot - scores.first_slot), idx(f)));
        for (int v = 0; v < 3; ++v) {
          variants[static_cast<std::size_t>(v)].push_back(
              rsv_variant_value(static_cast<RsvVariant>(v + 1), city.speeds, f, slot, config));
        }
      }
    }
  }
  if (out.incidents_used < 2) {
    fail(ErrorKind::invalid_argument,
         "RSV validation needs at least 2 incidents with a fully scored window and candidate flows (found " +
             std::to_string(out.incidents_used) + ")");
  }
  out.samples = ad.size();
  for (std::size_t v = 0; v < 3; ++v) out.correlations[v] = pearson_similarity(ad, variants[v]);
  out.selected = select_rsv_variant(out.correlations);
  return out;
}

std::vector<SweepPoint> sweep_thresholds(const data::CityData& city, const FlowScoreSeries& scores,
                                         const DiscoveryConfig& config,
                                         const std::vector<double>& rhos,
                                         const std::vector<double>& thetas) {
  std::vector<const data::IncidentRecord*> usable;
  std::vector<std::vector<std::size_t>> candidates;
  for (const auto& inc : city.incidents) {
    if (!window_scored(city.speeds, inc, scores, config.influence_window)) continue;
    usable.push_back(&inc);
    candidates.push_back(candidate_flows(inc, city.geometry, config.radius_m));
  }
  std::vector<SweepPoint> out;
  for (double rho : rhos) {
    const Eigen::MatrixXd ies = scores.ies_for(rho);
    std::vector<double> peaks;
    for (std::size_t i = 0; i < usable.size(); ++i) {
      DiscoveryConfig c = config;
      c.theta = 0.0;
      const auto label = label_critical(*usable[i], candidates[i], city.speeds, ies,
                                        scores.first_slot, c);
      peaks.push_back(label.affected.empty() ? -1.0 : label.max_ies);
    }
    for (double theta : thetas) {
      require(theta >= 0.0, "theta must be >= 0");
      SweepPoint p{rho, theta, 0};
      for (double peak : peaks) {
        if (peak >= theta) ++p.critical_count;
      }
      out.push_back(p);
    }
  }
  return out;
}

std::string format_labels(const std::vector<CriticalityLabel>& labels) {
  std::string out = "incident_id,is_critical,max_ies,n_affected_flows\n";
  for (const auto& l : labels) {
    out += l.incident_id + "," + (l.is_critical ? "1" : "0") + "," + format_double(l.max_ies) +
           "," + std::to_string(l.affected.size()) + "\n";
  }
  return out;
}

std::vector<CriticalityLabel> parse_labels(std::string_view text) {
  std::vector<CriticalityLabel> out;
  for (const auto& row : parse_csv(text, "incident_id,is_critical,max_ies,n_affected_flows",
                                   "labels.csv")) {
    const std::string ctx = "labels.csv row " + std::to_string(row.line);
    CriticalityLabel l;
    l.incident_id = std::string(row.fields[0]);
    const auto crit = parse_int(row.fields[1], ctx);
    if (crit != 0 && crit != 1) fail(ErrorKind::parse, ctx + ": is_critical must be 0 or 1");
    l.is_critical = crit == 1;
    l.max_ies = parse_double(row.fields[2], ctx);
    const auto n = parse_int(row.fields[3], ctx);
    if (n < 0) fail(ErrorKind::parse, ctx + ": negative affected-flow count");
    if ((n > 0) != l.is_critical) {
      fail(ErrorKind::parse, ctx + ": is_critical disagrees with n_affected_flows");
    }
    l.affected.resize(static_cast<std::size_t>(n));
    out.push_back(std::move(l));
  }
  return out;
}

std::string format_scores(const FlowScoreSeries& scores) {
  std::string out = "flow_id,slot,ad,rsv,ies\n";
  for (Index f = 0; f < scores.ad.cols(); ++f) {
    for (Index r = 0; r < scores.ad.rows(); ++r) {
      out += std::to_string(f) + "," + std::to_string(scores.first_slot + static_cast<std::size_t>(r)) +
             "," + format_double(scores.ad(r, f)) + "," + format_double(scores.rsv(r, f)) + "," +
             format_double(scores.ies(r, f)) + "\n";
    }
  }
  return out;
}

std::string format_sweep(const std::vector<SweepPoint>& sweep) {
  std::string out = "rho,theta,critical_count\n";
  for (const auto& p : sweep) {
    out += format_double(p.rho) + "," + format_double(p.theta) + "," +
           std::to_string(p.critical_count) + "\n";
  }
  return out;
}

std::string format_temporal(const data::CityData& city, const std::vector<CriticalityLabel>& labels) {
  std::map<std::string, const data::IncidentRecord*> by_id;
  for (const auto& inc : city.incidents) by_id[inc.id] = &inc;
  // [hour][category][critical?]
  std::array<std::array<std::array<std::size_t, 2>, 3>, 24> counts{};
  for (const auto& l : labels) {
    const auto it = by_id.find(l.incident_id);
    if (it == by_id.end()) fail(ErrorKind::invalid_argument, "unknown incident " + l.incident_id);
    const auto hour = static_cast<std::size_t>(hour_of_day(it->second->start_time));
    const auto cat = static_cast<std::size_t>(it->second->day_category);
    ++counts[hour][cat][l.is_critical ? 1 : 0];
  }
  std::string out = "hour,day_category,critical_count,noncritical_count\n";
  for (std::size_t h = 0; h < 24; ++h) {
    for (std::size_t c = 0; c < 3; ++c) {
      out += std::to_string(h) + "," + data::to_string(static_cast<data::DayCategory>(c)) + "," +
             std::to_string(counts[h][c][1]) + "," + std::to_string(counts[h][c][0]) + "\n";
    }
  }
  return out;
}

}  // namespace digc::discovery
