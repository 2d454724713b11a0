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
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "common.hpp"
#include "impact_classifier.hpp"
#include "neural/gradcheck.hpp"
#include "road_graph.hpp"
#include "synthetic_city.hpp"

using namespace digc;
using namespace digc::classifier;

namespace {

data::SyntheticCity small_city() {
  data::SyntheticScenario s;
  s.seed = 21;
  s.n_flows = 6;
  s.days = 2;
  s.incidents_per_day = 6;
  return data::generate_synthetic_city(s);
}

ClassifierConfig micro_config() {
  ClassifierConfig c;
  c.window = 4;
  c.gcn_hidden = 3;
  c.fc_width = 4;
  c.lstm_hidden = 3;
  c.context_width = 3;
  c.latent_width = 2;
  c.keep_prob = 1.0;
  return c;
}

data::IncidentRecord incident_at(const data::SpeedTable& table, std::size_t slot, double minutes) {
  data::IncidentRecord r;
  r.id = "x";
  r.type = "construction";
  r.start_time = table.slot_time(slot);
  r.end_time = r.start_time + std::chrono::seconds(static_cast<std::int64_t>(minutes * 60));
  return r;
}

}  // namespace

TEST_CASE("snapshot span is centered on the start slot") {
  CHECK(snapshot_span(100, 12) == std::pair<std::int64_t, std::int64_t>{94, 105});
  CHECK(snapshot_span(3, 1) == std::pair<std::int64_t, std::int64_t>{3, 3});
  CHECK(snapshot_span(2, 12).first == -4);
}

TEST_CASE("context encoding layout") {
  const auto city = small_city();
  auto inc = incident_at(city.data.speeds, 30, 60.0);
  const auto c = encode_context(inc, 120.0);
  REQUIRE(c.size() == kContextWidth);
  CHECK(c.sum() == doctest::Approx(5.5));
  CHECK(c(2) == 1.0);  // construction
  CHECK(c(5) == 1.0);  // road open
  CHECK(c(6) == 0.0);
  CHECK(c(58) == doctest::Approx(0.5));
  inc.road_closed = true;
  inc.type = "hail";
  const auto d = encode_context(inc, 60.0);
  CHECK(d(4) == 1.0);  // unknown types fold into "other"
  CHECK(d(6) == 1.0);
  CHECK(d(58) == 1.0);
  CHECK(encode_context(inc, 0.0)(58) == 0.0);
}

TEST_CASE("classifier input normalizes speeds and distances") {
  const auto city = small_city();
  const auto& table = city.data.speeds;
  auto inc = incident_at(table, 40, 30.0);
  inc.center = city.data.geometry.flows[2].center();
  const auto scales = compute_feature_scales(table, {inc});
  CHECK(scales.max_duration_min == doctest::Approx(30.0));
  const auto cfg = micro_config();
  const auto in = build_classifier_input(inc, table, city.data.geometry, scales, cfg);
  REQUIRE(in.snapshots.rows() == 4 * 6);
  CHECK(in.snapshots(0, 0) == doctest::Approx(table.speeds(38, 0) / scales.flow_mean_speed(0)));
  CHECK(in.snapshots(3 * 6 + 5, 0) == doctest::Approx(table.speeds(41, 5) / scales.flow_mean_speed(5)));
  CHECK(in.snapshots(2, 1) == 0.0);
  CHECK(in.snapshots.col(1).maxCoeff() == doctest::Approx(1.0));
  CHECK(in.snapshots.col(1).minCoeff() == 0.0);
  const auto early = incident_at(table, 1, 30.0);
  CHECK_THROWS_AS(build_classifier_input(early, table, city.data.geometry, scales, cfg), Error);
}

TEST_CASE("classifier outputs are probabilities with a fixed latent width") {
  const auto city = small_city();
  const auto graph = graph::build_flow_graph(city.data.geometry);
  const auto scales = compute_feature_scales(city.data.speeds, city.data.incidents);
  auto cfg = micro_config();
  cfg.latent_width = 16;
  ImpactClassifier model(6, graph.propagation_matrix(), cfg);
  auto inc = incident_at(city.data.speeds, 100, 45.0);
  const auto in = build_classifier_input(inc, city.data.speeds, city.data.geometry, scales, cfg);
  const double p = model.predict(in);
  CHECK(p > 0.0);
  CHECK(p < 1.0);
  CHECK(model.predict(in) == p);
  CHECK(model.latent_features(in).size() == 16);
  CHECK(model.latent_features(in) == model.latent_features(in));

  const ImpactClassifier reloaded(nn::deserialize_params(nn::serialize_params(model.params())),
                                  graph.propagation_matrix());
  auto copy = reloaded;
  CHECK(copy.predict(in) == p);
  CHECK_THROWS_AS(ImpactClassifier(model.params(), Matrix::Identity(3, 3)), Error);
}

TEST_CASE("split sizes and disjointness") {
  const auto s = split_samples(100, 0.7, 0.1, 5);
  CHECK(s.train.size() + s.validation.size() == 70);
  CHECK(s.validation.size() == 7);
  CHECK(s.test.size() == 30);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 100);
  const auto again = split_samples(100, 0.7, 0.1, 5);
  CHECK(again.train == s.train);
  CHECK(split_samples(100, 0.7, 0.1, 6).train != s.train);
}

TEST_CASE("training refuses a single class") {
  const auto city = small_city();
  const auto graph = graph::build_flow_graph(city.data.geometry);
  const auto scales = compute_feature_scales(city.data.speeds, city.data.incidents);
  const auto cfg = micro_config();
  std::vector<ClassifierInput> inputs;
  for (std::size_t s = 50; s < 60; ++s)
    inputs.push_back(build_classifier_input(incident_at(city.data.speeds, s, 30.0), city.data.speeds,
                                            city.data.geometry, scales, cfg));
  CHECK_THROWS_AS(train_classifier(inputs, std::vector<int>(10, 1), 6, graph.propagation_matrix(), cfg),
                  Error);
}

TEST_CASE("features round-trip") {
  Eigen::RowVectorXd a(3), b(3);
  a << 0.1, -2.5, 1e-17;
  b << 0.0, 1.0 / 3.0, 7.0;
  const auto text = format_features({"i1", "i2"}, {a, b});
  const auto back = parse_features(text);
  CHECK(back.ids == std::vector<std::string>{"i1", "i2"});
  CHECK(back.features[0] == a);
  CHECK(back.features[1] == b);
  CHECK(text.rfind("incident_id,f0,f1,f2\n", 0) == 0);
}

TEST_CASE("micro classifier gradient check") {
  const auto city = small_city();
  const auto graph = graph::build_flow_graph(city.data.geometry);
  const auto scales = compute_feature_scales(city.data.speeds, city.data.incidents);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto cfg = micro_config();
    cfg.seed = seed;
    ImpactClassifier model(6, graph.propagation_matrix(), cfg);
    std::vector<ClassifierInput> inputs;
    for (std::size_t s : {60u, 200u})
      inputs.push_back(build_classifier_input(incident_at(city.data.speeds, s, 30.0), city.data.speeds,
                                              city.data.geometry, scales, cfg));
    const std::vector<const ClassifierInput*> batch{&inputs[0], &inputs[1]};
    Matrix labels(2, 1);
    labels << 1.0, 0.0;
    nn::LossBuilder loss = [&](nn::Tape& t, nn::ModelParams&) {
      return nn::bce(model.forward(t, batch, false, 0).probability, labels);
    };
    const auto r = nn::gradient_check(model.params(), loss);
    INFO("seed " << seed << " max rel " << r.max_relative_error);
    CHECK(r.passed);
  }
}
