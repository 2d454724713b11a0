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
// Acceptance checks. Each run evaluates one criterion and prints one line:
//   AC<n> PASS|FAIL <summary>
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "digc_net.hpp"
#include "impact_classifier.hpp"
#include "incident_discovery.hpp"
#include "neural/gradcheck.hpp"
#include "neural/layers.hpp"
#include "neural/metrics.hpp"
#include "neural/params.hpp"
#include "road_graph.hpp"
#include "synthetic_city.hpp"

namespace fs = std::filesystem;
using namespace digc;
using nn::Matrix;
using json = nlohmann::json;

namespace {

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// ---- 1: local vs global anomalous degree --------------------------------------

Outcome criterion1() {
  const double t0 = cpu_seconds();
  discovery::DiscoveryConfig cfg;

  data::SyntheticScenario one;
  one.seed = 101;
  one.n_flows = 50;
  one.days = 2;
  const auto city = data::generate_synthetic_city(one);
  const auto& table = city.data.speeds;
  const std::size_t first = cfg.similarity_window;
  const std::size_t last = table.slot_count() - 1;
  const auto g = graph::build_flow_graph(city.data.geometry);
  const auto single = graph::spectral_clusters(g, 1, 1).labels;
  const auto global = discovery::anomalous_degree_series(table, cfg, first, last);
  const auto local1 = discovery::anomalous_degree_series(table, cfg, first, last, single);
  const bool bitwise = global.rows() == local1.rows() && global.cols() == local1.cols() &&
                       std::equal(global.data(), global.data() + global.size(), local1.data());

  // Four disconnected districts; 52 flows so that they split evenly.
  data::SyntheticScenario four = one;
  four.n_flows = 52;
  four.districts = 4;
  const auto city4 = data::generate_synthetic_city(four);
  const auto& table4 = city4.data.speeds;
  const auto g4 = graph::build_flow_graph(city4.data.geometry);
  const auto clusters = graph::spectral_clusters(g4, 4, 2).labels;
  const auto components = g4.components();
  // Clusters must coincide with components up to renaming.
  std::map<int, std::set<int>> mapping;
  for (std::size_t i = 0; i < clusters.size(); ++i) mapping[clusters[i]].insert(components[i]);
  bool partition_ok = mapping.size() == 4;
  for (const auto& [c, comps] : mapping) partition_ok = partition_ok && comps.size() == 1;

  const auto last4 = table4.slot_count() - 1;
  const auto local4 = discovery::anomalous_degree_series(table4, cfg, first, last4, clusters);
  // Oracle: global AD on each component's own sub-table.
  double max_diff = 0.0;
  for (int comp = 0; comp < 4; ++comp) {
    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < components.size(); ++i)
      if (components[i] == comp) members.push_back(static_cast<Eigen::Index>(i));
    data::SpeedTable sub;
    sub.start_time = table4.start_time;
    sub.speeds.resize(table4.speeds.rows(), static_cast<Eigen::Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) sub.speeds.col(static_cast<Eigen::Index>(j)) = table4.speeds.col(members[j]);
    const auto sub_ad = discovery::anomalous_degree_series(sub, cfg, first, last4);
    for (std::size_t j = 0; j < members.size(); ++j) {
      max_diff = std::max(max_diff, (sub_ad.col(static_cast<Eigen::Index>(j)) - local4.col(members[j])).cwiseAbs().maxCoeff());
    }
  }
  const double elapsed = cpu_seconds() - t0;
  Outcome o;
  o.pass = bitwise && partition_ok && max_diff <= 1e-12 && elapsed < 60.0;
  o.summary = std::string("k=1 bitwise=") + (bitwise ? "yes" : "no") + ", k=4 clusters match components=" +
              (partition_ok ? "yes" : "no") + ", max |local - component oracle|=" + sci(max_diff) +
              ", cpu " + fmt(elapsed, 1) + "s (limit 60s)";
  return o;
}

// ---- 2: ground-truth criticality recovery -------------------------------------

Outcome criterion2() {
  data::SyntheticScenario sc;
  sc.seed = 202;
  sc.n_flows = 24;
  sc.days = 14;
  sc.incidents_per_day = 8;
  const auto city = data::generate_synthetic_city(sc);
  // Calibrated for this scenario: RSV-weighted, since the city-wide AD also
  // rises for flows near an impact-free incident whenever another incident
  // elsewhere in the city breaks their similarities.
  discovery::DiscoveryConfig cfg;
  cfg.rho = 0.2;
  cfg.theta = 0.2;
  const auto scores = discovery::compute_scores(city.data.speeds, cfg);
  const auto result = discovery::discover_incidents(city.data, scores, cfg);
  std::map<std::string, bool> critical;
  for (const auto& l : result.labels) critical[l.incident_id] = l.is_critical;

  std::size_t high = 0, high_hit = 0, zero = 0, zero_hit = 0;
  for (const auto& t : city.truth) {
    const auto it = critical.find(t.incident_id);
    if (it == critical.end()) continue;
    if (t.factor <= 0.5 && t.affected_flows.size() >= 3) {
      ++high;
      high_hit += it->second ? 1 : 0;
    } else if (t.factor == 1.0) {
      ++zero;
      zero_hit += it->second ? 0 : 1;
    }
  }
  const std::vector<double> rhos{0.2, 0.4, 0.6, 0.8};
  const std::vector<double> thetas{0.0, 0.05, 0.1, 0.15, 0.2};
  const auto sweep = discovery::sweep_thresholds(city.data, scores, cfg, rhos, thetas);
  bool monotone = true;
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (sweep[i].rho == sweep[i - 1].rho && sweep[i].theta > sweep[i - 1].theta &&
        sweep[i].critical_count > sweep[i - 1].critical_count)
      monotone = false;
  }
  const double high_rate = high ? static_cast<double>(high_hit) / static_cast<double>(high) : 0.0;
  const double zero_rate = zero ? static_cast<double>(zero_hit) / static_cast<double>(zero) : 0.0;
  Outcome o;
  o.pass = high > 0 && zero > 0 && high_rate >= 0.9 && zero_rate >= 0.9 && monotone;
  o.summary = "rho " + fmt(cfg.rho, 2) + " theta " + fmt(cfg.theta, 2) + ": high-impact critical " + std::to_string(high_hit) + "/" + std::to_string(high) + " (" +
              fmt(100 * high_rate, 1) + "%), zero-impact non-critical " + std::to_string(zero_hit) + "/" +
              std::to_string(zero) + " (" + fmt(100 * zero_rate, 1) + "%), theta sweep monotone=" +
              (monotone ? "yes" : "no") + ", skipped " + std::to_string(result.skipped.size());
  return o;
}

// ---- 3: gradient checks --------------------------------------------------------

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

nn::GradCheckReport layer_check(const std::string& kind, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  nn::ModelParams params;
  const Matrix x = random_matrix(8, 3, rng);
  const Matrix target = random_matrix(2, 4, rng);
  Matrix p = random_matrix(4, 4, rng, 0.5);
  p = (p + p.transpose()).eval();
  nn::Dense dense{"dense", 3, 4};
  nn::GraphConv gcn{"gcn", 3, 4};
  nn::Lstm lstm{"lstm", 3, 4};
  nn::Rnn rnn{"rnn", 3, 4};
  if (kind == "dense") dense.init(params, rng);
  if (kind == "gcn") gcn.init(params, rng);
  if (kind == "lstm") lstm.init(params, rng);
  if (kind == "rnn") rnn.init(params, rng);
  for (auto& [name, prm] : params.entries()) prm.value = random_matrix(prm.value.rows(), prm.value.cols(), rng, 0.8);
  nn::LossBuilder loss = [&](nn::Tape& t, nn::ModelParams& ps) -> nn::Var {
    nn::Var in = t.constant(x);
    if (kind == "dense") return nn::mse(nn::slice_rows(dense.forward(t, ps, in, nn::Activation::tanh), 0, 2), target);
    if (kind == "gcn")
      return nn::mse(nn::slice_rows(gcn.forward(t, ps, p, in, nn::Activation::sigmoid), 0, 2), target);
    std::vector<nn::Var> steps;
    for (Eigen::Index s = 0; s < 4; ++s) steps.push_back(nn::slice_rows(in, 2 * s, 2));
    if (kind == "lstm") return nn::mse(lstm.forward(t, ps, steps), target);
    Eigen::VectorXd full = Eigen::VectorXd::Ones(2), half(2);
    half << 1.0, 0.0;
    return nn::mse(rnn.forward(t, ps, steps, {full, full, half, half}), target);
  };
  return nn::gradient_check(params, loss);
}

nn::GradCheckReport classifier_check(std::uint64_t seed) {
  data::SyntheticScenario s;
  s.seed = 300 + seed;
  s.n_flows = 6;
  s.days = 2;
  s.incidents_per_day = 6;
  const auto city = data::generate_synthetic_city(s);
  const auto p = graph::build_flow_graph(city.data.geometry).propagation_matrix();
  const auto scales = classifier::compute_feature_scales(city.data.speeds, city.data.incidents);
  classifier::ClassifierConfig cfg;
  cfg.window = 4;
  cfg.gcn_hidden = 3;
  cfg.fc_width = 4;
  cfg.lstm_hidden = 3;
  cfg.context_width = 3;
  cfg.latent_width = 2;
  cfg.keep_prob = 1.0;
  cfg.seed = seed;
  classifier::ImpactClassifier model(6, p, cfg);
  std::vector<classifier::ClassifierInput> inputs;
  for (const auto& inc : city.data.incidents) {
    if (inputs.size() == 2) break;
    inputs.push_back(classifier::build_classifier_input(inc, city.data.speeds, city.data.geometry, scales, cfg));
  }
  const std::vector<const classifier::ClassifierInput*> batch{&inputs[0], &inputs[1]};
  Matrix labels(2, 1);
  labels << 1.0, 0.0;
  nn::LossBuilder loss = [&](nn::Tape& t, nn::ModelParams&) {
    return nn::bce(model.forward(t, batch, false, 0).probability, labels);
  };
  return nn::gradient_check(model.params(), loss);
}

nn::GradCheckReport predictor_check(std::uint64_t seed) {
  data::SyntheticScenario s;
  s.seed = 400 + seed;
  s.n_flows = 6;
  s.days = 6;
  s.incidents_per_day = 12;
  const auto city = data::generate_synthetic_city(s);
  const auto p = graph::build_flow_graph(city.data.geometry).propagation_matrix();
  std::mt19937_64 rng(seed);
  std::map<std::string, Eigen::RowVectorXd> latent;
  for (const auto& inc : city.data.incidents) latent[inc.id] = random_matrix(1, 4, rng).row(0);
  const auto ctx = net::make_context(city.data, latent, 5 * data::kSlotsPerDay, 4);
  net::DigcConfig cfg;
  cfg.history = 6;
  cfg.horizon = 1;
  cfg.gcn_hidden = 3;
  cfg.st_fc = 4;
  cfg.lstm_hidden = 3;
  cfg.rnn_hidden = 3;
  cfg.periodic_fc = 3;
  cfg.fusion = 5;
  cfg.keep_prob = 1.0;
  cfg.seed = seed;
  net::DigcModel model(6, p, cfg, 4);
  std::size_t t = 5 * data::kSlotsPerDay;
  while (t + 1 < ctx.slot_count() && net::incidents_for_target(ctx, cfg, t).empty()) ++t;
  const auto a = net::materialize_window(ctx, cfg, t);
  const auto b = net::materialize_window(ctx, cfg, 5 * data::kSlotsPerDay + 150);
  const std::vector<const net::PredictionWindow*> batch{&a, &b};
  Matrix target(2, 6);
  target.row(0) = a.target.row(0);
  target.row(1) = b.target.row(0);
  nn::LossBuilder loss = [&](nn::Tape& tape, nn::ModelParams&) {
    return nn::mse(model.forward(tape, batch, false, 0), target);
  };
  return nn::gradient_check(model.params(), loss);
}

Outcome criterion3() {
  const double t0 = cpu_seconds();
  std::map<std::string, double> worst;
  std::size_t failures = 0, checked = 0, skipped = 0;
  const std::vector<std::string> kinds{"dense", "gcn", "lstm", "rnn", "classifier", "predictor"};
  for (const auto& kind : kinds) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      nn::GradCheckReport r;
      if (kind == "classifier") r = classifier_check(seed);
      else if (kind == "predictor") r = predictor_check(seed);
      else r = layer_check(kind, seed);
      worst[kind] = std::max(worst[kind], r.max_relative_error);
      checked += r.checked;
      skipped += r.skipped;
      if (!r.passed || r.checked == 0) ++failures;
    }
  }
  const double elapsed = cpu_seconds() - t0;
  Outcome o;
  o.pass = failures == 0 && elapsed < 120.0;
  o.summary = "max relative error";
  for (const auto& kind : kinds) o.summary += " " + kind + "=" + sci(worst[kind]);
  o.summary += " (limit 1e-4, 10 seeds each, " + std::to_string(checked) + " entries, " +
               std::to_string(skipped) + " kink-skipped), cpu " + fmt(elapsed, 1) + "s (limit 120s)";
  return o;
}

// ---- 4: classifier separability -----------------------------------------------

Outcome criterion4() {
  const double t0 = cpu_seconds();
  // 440 incidents, 58% impactful (the 1061 : 771 proportion), one every 24 slots.
  const std::size_t count = 440;
  const auto positives = static_cast<std::size_t>(std::llround(count * 1061.0 / 1832.0));
  data::SyntheticScenario sc;
  sc.seed = 404;
  sc.n_flows = 12;
  sc.days = (count * 24 + 96) / data::kSlotsPerDay + 1;
  sc.incidents_per_day = 0;
  std::mt19937_64 rng(derive_seed(404, "fixture"));
  std::vector<int> impactful(count, 0);
  std::fill(impactful.begin(), impactful.begin() + static_cast<std::ptrdiff_t>(positives), 1);
  std::shuffle(impactful.begin(), impactful.end(), rng);
  std::uniform_int_distribution<std::size_t> flow(0, sc.n_flows - 1), dur(6, 18), type(0, 3);
  std::uniform_real_distribution<double> factor(0.3, 0.5);
  std::bernoulli_distribution closed(0.3);
  for (std::size_t i = 0; i < count; ++i) {
    data::InjectedIncident inj;
    inj.start_slot = 48 + 24 * i;
    inj.duration_slots = dur(rng);
    inj.factor = impactful[i] ? factor(rng) : 1.0;
    inj.at_flow = flow(rng);
    inj.type = classifier::kIncidentTypes[type(rng)];
    inj.road_closed = closed(rng);
    sc.injected.push_back(inj);
  }
  const auto city = data::generate_synthetic_city(sc);
  std::map<std::string, int> truth;
  for (const auto& t : city.truth) truth[t.incident_id] = t.factor < 1.0 ? 1 : 0;

  const auto p = graph::build_flow_graph(city.data.geometry).propagation_matrix();
  classifier::ClassifierConfig cfg;
  cfg.seed = derive_seed(404, "classifier");
  cfg.max_epochs = 30;
  const auto scales = classifier::compute_feature_scales(city.data.speeds, city.data.incidents);
  std::vector<classifier::ClassifierInput> inputs;
  std::vector<int> labels, flipped;
  for (const auto& inc : city.data.incidents) {
    inputs.push_back(classifier::build_classifier_input(inc, city.data.speeds, city.data.geometry, scales, cfg));
    labels.push_back(truth.at(inc.id));
    flipped.push_back(1 - labels.back());
  }
  auto trained = classifier::train_classifier(inputs, labels, sc.n_flows, p, cfg);
  auto control = classifier::train_classifier(inputs, flipped, sc.n_flows, p, cfg);
  // The control model is scored against the true labels.
  const auto control_metrics = classifier::evaluate_classifier(control.model, inputs, labels, control.split.test);
  const double elapsed = cpu_seconds() - t0;
  Outcome o;
  o.pass = trained.metrics.f1 >= 0.95 && control_metrics.f1 <= 0.05 && elapsed < 300.0;
  o.summary = std::to_string(count) + " incidents (" + std::to_string(positives) + " impactful), test F1 " +
              fmt(trained.metrics.f1) + " (>= 0.95) on " + std::to_string(trained.metrics.n_test) +
              ", label-flip control F1 " + fmt(control_metrics.f1) + " (<= 0.05), cpu " + fmt(elapsed, 1) +
              "s (limit 300s)";
  return o;
}

// ---- 5 and 6: predictor on a synthetic month ----------------------------------

struct Month {
  data::SyntheticCity city;
  Matrix propagation;
  net::SeriesContext ctx;
  double classifier_f1 = 0.0;
};

// Incident-rich month with probe-style measurement noise.
data::SyntheticScenario month_scenario() {
  data::SyntheticScenario sc;
  sc.seed = 505;
  sc.n_flows = 12;
  sc.days = 30;
  sc.incidents_per_day = 12;
  sc.white_noise = 0.06;
  sc.flow_ar_noise = 0.02;
  sc.district_ar_noise = 0.03;
  return sc;
}

constexpr std::size_t kMonthStride = 2;
constexpr std::size_t kMonthEpochs = 12;

Month build_month() {
  Month m;
  const auto sc = month_scenario();
  m.city = data::generate_synthetic_city(sc);
  const auto& city = m.city.data;
  m.propagation = graph::build_flow_graph(city.geometry).propagation_matrix();
  discovery::DiscoveryConfig dc;
  const auto scores = discovery::compute_scores(city.speeds, dc);
  const auto found = discovery::discover_incidents(city, scores, dc);
  std::map<std::string, int> label;
  for (const auto& l : found.labels) label[l.incident_id] = l.is_critical ? 1 : 0;

  classifier::ClassifierConfig cc;
  cc.seed = derive_seed(sc.seed, "classifier");
  cc.max_epochs = 25;
  const auto scales = classifier::compute_feature_scales(city.speeds, city.incidents);
  std::vector<classifier::ClassifierInput> inputs, all;
  std::vector<int> targets;
  for (const auto& inc : city.incidents) {
    try {
      all.push_back(classifier::build_classifier_input(inc, city.speeds, city.geometry, scales, cc));
    } catch (const Error&) {
      continue;
    }
    const auto it = label.find(inc.id);
    if (it == label.end()) continue;
    inputs.push_back(all.back());
    targets.push_back(it->second);
  }
  auto trained = classifier::train_classifier(inputs, targets, sc.n_flows, m.propagation, cc);
  m.classifier_f1 = trained.metrics.f1;
  std::map<std::string, Eigen::RowVectorXd> latent;
  for (const auto& in : all) latent[in.incident_id] = trained.model.latent_features(in);
  m.ctx = net::make_context(city, latent, net::train_boundary(city.speeds.slot_count()));
  return m;
}

net::MapeReport run_predictor(const Month& m, net::Variant variant, std::size_t horizon, std::size_t* epochs = nullptr) {
  net::DigcConfig cfg;
  cfg.variant = variant;
  cfg.horizon = horizon;
  cfg.train_stride = kMonthStride;
  cfg.max_epochs = kMonthEpochs;
  cfg.seed = derive_seed(month_scenario().seed, "digc");
  const auto split = net::assemble_training_windows(m.ctx, cfg);
  net::DigcModel model(m.ctx.flow_count(), m.propagation, cfg, m.ctx.latent_width);
  const auto log = net::train_sequence_model(model, m.ctx, split);
  if (epochs) *epochs = log.epochs;
  return net::evaluate_predictions(m.ctx, split.test, net::predict_multistep(model, m.ctx, split.test));
}

Outcome criterion5() {
  const double t0 = cpu_seconds();
  const auto m = build_month();
  const auto full = run_predictor(m, net::Variant::full, 1).overall;
  const auto stp = run_predictor(m, net::Variant::st_periodic, 1).overall;
  const auto st = run_predictor(m, net::Variant::spatio_temporal, 1).overall;
  net::DigcConfig probe;
  probe.horizon = 1;
  const auto split = net::assemble_training_windows(m.ctx, probe);
  const auto persistence =
      net::evaluate_predictions(m.ctx, split.test, net::persistence_predictions(m.ctx, 1, split.test)).overall;
  const auto ha = net::evaluate_predictions(
                      m.ctx, split.test,
                      net::historical_average_predictions(m.ctx, 1, split.boundary_slot, split.test))
                      .overall;
  const double elapsed = cpu_seconds() - t0;
  const bool chain = full < stp && stp < st + 0.5;
  const bool baselines = full < persistence && full < ha;
  Outcome o;
  o.pass = chain && baselines && elapsed < 1200.0;
  o.summary = "MAPE full " + fmt(full, 3) + "%, st+periodic " + fmt(stp, 3) + "%, st " + fmt(st, 3) +
              "%, persistence " + fmt(persistence, 3) + "%, historical average " + fmt(ha, 3) +
              "%; chain " + (chain ? "holds" : "broken") + ", beats baselines " + (baselines ? "yes" : "no") +
              " (classifier F1 " + fmt(m.classifier_f1, 3) + "), cpu " + fmt(elapsed, 1) + "s (limit 1200s)";
  return o;
}

Outcome criterion6() {
  const double t0 = cpu_seconds();
  const auto m = build_month();
  std::vector<double> mape;
  for (std::size_t k = 1; k <= 3; ++k) mape.push_back(run_predictor(m, net::Variant::full, k).overall);
  const double elapsed = cpu_seconds() - t0;
  const bool monotone = mape[0] <= mape[1] && mape[1] <= mape[2];
  const bool mild = mape[1] <= 1.25 * mape[0] && mape[2] <= 1.25 * mape[0];
  Outcome o;
  o.pass = monotone && mild;
  o.summary = "MAPE k=1 " + fmt(mape[0], 3) + "%, k=2 " + fmt(mape[1], 3) + "%, k=3 " + fmt(mape[2], 3) +
              "%; monotone " + (monotone ? "yes" : "no") + ", within 25% of k=1 " + (mild ? "yes" : "no") +
              ", cpu " + fmt(elapsed, 1) + "s";
  return o;
}

// ---- 7: end-to-end determinism through the CLI -----------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Manifests record wall time, which is the one field allowed to differ.
std::string comparable(const fs::path& p) {
  auto text = slurp(p);
  if (p.filename() != "manifest.json") return text;
  auto j = json::parse(text);
  j.erase("wall_time_s");
  return j.dump();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    out[fs::relative(e.path(), root).generic_string()] = comparable(e.path());
  }
  return out;
}

Outcome criterion7(const fs::path& work, const std::string& cli) {
  const std::vector<std::string> stages{"generate", "build-graph", "discover", "sweep", "train-classifier",
                                        "extract-features", "train", "predict", "evaluate", "report"};
  const auto config = work / "config.json";
  {
    std::ofstream out(config);
    out << R"({
  "seed": 77,
  "scenario": {"n_flows": 12, "days": 8, "incidents_per_day": 10},
  "discovery": {"write_scores": true},
  "classifier": {"max_epochs": 3},
  "digc": {"max_epochs": 2, "train_stride": 16, "horizon": 2},
  "evaluate": {"plain_lstm": true}
})";
  }
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run_a", "run_b"}) {
    const auto dir = work / name;
    fs::remove_all(dir);
    for (const auto& stage : stages) {
      const std::string cmd = "\"" + cli + "\" " + stage + " -c \"" + config.string() + "\" -o \"" + dir.string() +
                              "\" > \"" + (work / "cli.log").string() + "\" 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        return {false, std::string(name) + ": stage " + stage + " failed, see " + (work / "cli.log").string()};
      }
    }
    runs.push_back(snapshot(dir));
  }
  std::vector<std::string> differing;
  std::set<std::string> names;
  for (const auto& r : runs)
    for (const auto& [k, v] : r) names.insert(k);
  for (const auto& n : names) {
    const auto a = runs[0].find(n), b = runs[1].find(n);
    if (a == runs[0].end() || b == runs[1].end() || a->second != b->second) differing.push_back(n);
  }
  Outcome o;
  o.pass = differing.empty() && runs[0].size() > stages.size();
  o.summary = std::to_string(stages.size()) + " stages run twice with seed 77, " + std::to_string(names.size()) +
              " files compared, " + std::to_string(differing.size()) + " differ";
  if (!differing.empty()) o.summary += " (first: " + differing.front() + ")";
  return o;
}

// ---- 8: metric and optimizer oracles ---------------------------------------------

Outcome criterion8() {
  std::vector<std::pair<std::string, double>> errors;
  const auto record = [&](const std::string& name, double got, double want) {
    errors.emplace_back(name, std::abs(got - want));
  };
  // x = 1,2,3,4 and y = 2,4,5,9: centered cross sum 11, squares 5 and 26.
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 5, 9};
  record("pearson", discovery::pearson_similarity(x, y), 11.0 / std::sqrt(130.0));
  const std::vector<double> yneg{4, 3, 2, 1};
  record("pearson_neg", discovery::pearson_similarity(x, yneg), -1.0);

  record("bce", nn::bce_loss(std::vector<double>{0.8, 0.3}, std::vector<double>{1.0, 0.0}),
         -(std::log(0.8) + std::log(0.7)) / 2.0);
  record("bce_half", nn::bce_loss(std::vector<double>{0.5}, std::vector<double>{0.0}), std::log(2.0));
  // Errors 0.5, -1, 2: squares 0.25 + 1 + 4.
  record("mse", nn::mse_loss(std::vector<double>{1.5, 1.0, 5.0}, std::vector<double>{1.0, 2.0, 3.0}), 5.25 / 3.0);
  // |44-40|/40 = 0.1, |15-20|/20 = 0.25, 0.5 km/h excluded.
  record("mape", nn::mape(std::vector<double>{44.0, 15.0, 9.0}, std::vector<double>{40.0, 20.0, 0.5}).percent, 17.5);
  // tp 2, fp 1, fn 1.
  record("f1", nn::f1_score(std::vector<int>{1, 1, 1, 0, 0}, std::vector<int>{1, 1, 0, 1, 0}).f1, 2.0 / 3.0);

  // Adam, lr 1e-3, betas 0.9 / 0.999, eps 1e-8, gradients 1 then -0.5.
  nn::ModelParams params;
  params.add("w", Matrix::Constant(1, 1, 1.0));
  params.zero_grad();
  params.at("w").grad(0, 0) = 1.0;
  params.adam_step();
  const double w1 = 1.0 - 1e-3 * 1.0 / (1.0 + 1e-8);
  record("adam_step1", params.at("w").value(0, 0), w1);
  params.zero_grad();
  params.at("w").grad(0, 0) = -0.5;
  params.adam_step();
  // m = 0.09 - 0.05 = 0.04, v = 0.000999 + 0.00025 = 0.001249.
  const double m_hat = 0.04 / (1.0 - 0.81);
  const double v_hat = 0.001249 / (1.0 - 0.998001);
  record("adam_step2", params.at("w").value(0, 0), w1 - 1e-3 * m_hat / (std::sqrt(v_hat) + 1e-8));

  double worst = 0.0;
  std::string worst_name;
  for (const auto& [n, e] : errors) {
    if (e > worst || worst_name.empty()) {
      worst = e;
      worst_name = n;
    }
  }
  Outcome o;
  o.pass = worst <= 1e-10;
  o.summary = std::to_string(errors.size()) + " hand oracles (pearson, bce, mse, mape, f1, adam), max error " +
              sci(worst) + " at " + worst_name + " (limit 1e-10)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"digc acceptance checks"};
  int criterion = 0;
  std::string work = "acceptance_work";
  std::string cli;
  app.add_option("--criterion", criterion, "criterion number (1-8)")->required()->check(CLI::Range(1, 8));
  app.add_option("--work", work, "scratch directory");
  app.add_option("--cli", cli, "path to the digc executable (criterion 7)");
  CLI11_PARSE(app, argc, argv);

  Outcome o;
  const auto wall0 = std::chrono::steady_clock::now();
  try {
    fs::create_directories(work);
    switch (criterion) {
      case 1: o = criterion1(); break;
      case 2: o = criterion2(); break;
      case 3: o = criterion3(); break;
      case 4: o = criterion4(); break;
      case 5: o = criterion5(); break;
      case 6: o = criterion6(); break;
      case 7:
        if (cli.empty()) {
          o = {false, "--cli is required"};
        } else {
          o = criterion7(work, cli);
        }
        break;
    }
    if (criterion == 8) o = criterion8();
  } catch (const std::exception& e) {
    o = {false, std::string("error: ") + e.what()};
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  std::cout << "AC" << criterion << (o.pass ? " PASS " : " FAIL ") << o.summary << " [wall " << fmt(wall, 1)
            << "s]" << std::endl;
  return o.pass ? 0 : 1;
}
