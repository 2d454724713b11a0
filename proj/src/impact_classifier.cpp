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
#include "impact_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "geo.hpp"
#include "neural/metrics.hpp"

namespace digc::classifier {

namespace {

using Index = Eigen::Index;
using nn::Activation;
using nn::Tape;
using nn::Var;

Index idx(std::size_t v) { return static_cast<Index>(v); }

std::size_t meta_size(const nn::ModelParams& p, const std::string& key) {
  const auto it = p.meta.find(key);
  if (it == p.meta.end()) fail(ErrorKind::parse, "classifier checkpoint lacks meta field " + key);
  const auto v = parse_int(it->second, "checkpoint meta " + key);
  if (v < 0) fail(ErrorKind::parse, "checkpoint meta " + key + " is negative");
  return static_cast<std::size_t>(v);
}

double meta_double(const nn::ModelParams& p, const std::string& key) {
  const auto it = p.meta.find(key);
  if (it == p.meta.end()) fail(ErrorKind::parse, "classifier checkpoint lacks meta field " + key);
  return parse_double(it->second, "checkpoint meta " + key);
}

using Snapshot = std::map<std::string, Matrix>;

Snapshot snapshot(const nn::ModelParams& p) {
  Snapshot s;
  for (const auto& [name, param] : p.entries()) s[name] = param.value;
  return s;
}

void restore(nn::ModelParams& p, const Snapshot& s) {
  for (auto& [name, param] : p.entries()) param.value = s.at(name);
}

}  // namespace

FeatureScales compute_feature_scales(const data::SpeedTable& table,
                                     const std::vector<data::IncidentRecord>& incidents) {
  require(table.slot_count() > 0, "cannot compute scales of an empty table");
  FeatureScales s;
  s.flow_mean_speed = table.speeds.colwise().mean().transpose();
  for (Index i = 0; i < s.flow_mean_speed.size(); ++i) {
    if (!(s.flow_mean_speed(i) > 0.0)) s.flow_mean_speed(i) = 1.0;
  }
  for (const auto& inc : incidents) {
    s.max_duration_min = std::max(s.max_duration_min, inc.duration_minutes());
  }
  return s;
}

std::pair<std::int64_t, std::int64_t> snapshot_span(std::int64_t start_slot, std::size_t window) {
  const auto first = start_slot - static_cast<std::int64_t>(window / 2);
  return {first, first + static_cast<std::int64_t>(window) - 1};
}

Eigen::RowVectorXd encode_context(const data::IncidentRecord& incident, double max_duration_min) {
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(kContextWidth);
  Index at = 0;
  const auto type = std::find(kIncidentTypes.begin(), kIncidentTypes.end(), incident.type);
  c(at + (type == kIncidentTypes.end() ? 4 : type - kIncidentTypes.begin())) = 1.0;
  at += 5;
  c(at + (incident.road_closed ? 1 : 0)) = 1.0;
  at += 2;
  c(at + static_cast<Index>(hour_of_day(incident.start_time))) = 1.0;
  at += 24;
  c(at + static_cast<Index>(hour_of_day(incident.end_time))) = 1.0;
  at += 24;
  c(at + static_cast<Index>(incident.day_category)) = 1.0;
  at += 3;
  c(at) = max_duration_min > 0.0
              ? std::clamp(incident.duration_minutes() / max_duration_min, 0.0, 1.0)
              : 0.0;
  return c;
}

ClassifierInput build_classifier_input(const data::IncidentRecord& incident,
                                       const data::SpeedTable& table,
                                       const data::RoadGeometry& geometry,
                                       const FeatureScales& scales, const ClassifierConfig& config) {
  const std::size_t n = table.flow_count();
  require(geometry.size() == n, "geometry and speed table disagree on the flow count");
  require(static_cast<std::size_t>(scales.flow_mean_speed.size()) == n,
          "feature scales were computed for a different flow count");
  const auto [first, last] = snapshot_span(table.slot_of(incident.start_time), config.window);
  if (first < 0 || last >= static_cast<std::int64_t>(table.slot_count())) {
    fail(ErrorKind::invalid_argument,
         "snapshot window [" + std::to_string(first) + ", " + std::to_string(last) + "] of incident " +
             incident.id + " is outside the table (0.." + std::to_string(table.slot_count()) + ")");
  }
  const geo::Projection proj{incident.center};
  Eigen::VectorXd dist(idx(n));
  for (std::size_t i = 0; i < n; ++i) dist(idx(i)) = proj.distance(geometry.flows[i].center(), incident.center);
  const double lo = dist.minCoeff();
  const double span = dist.maxCoeff() - lo;
  for (Index i = 0; i < dist.size(); ++i) dist(i) = span > 0.0 ? (dist(i) - lo) / span : 0.0;

  ClassifierInput in;
  in.incident_id = incident.id;
  in.snapshots.resize(idx(config.window * n), 2);
  for (std::size_t t = 0; t < config.window; ++t) {
    const auto slot = static_cast<Index>(first) + idx(t);
    for (std::size_t f = 0; f < n; ++f) {
      const Index row = idx(t * n + f);
      in.snapshots(row, 0) = table.speeds(slot, idx(f)) / scales.flow_mean_speed(idx(f));
      in.snapshots(row, 1) = dist(idx(f));
    }
  }
  in.context = encode_context(incident, scales.max_duration_min);
  return in;
}

ImpactClassifier::ImpactClassifier(std::size_t n_flows, Matrix propagation, ClassifierConfig config)
    : n_(n_flows), propagation_(std::move(propagation)), config_(config) {
  require(n_ > 0, "classifier needs at least one flow");
  require(propagation_.rows() == idx(n_) && propagation_.cols() == idx(n_),
          "propagation matrix does not match the flow count");
  require(config_.window >= 1, "classifier window must be >= 1");
  declare_layers();
  std::mt19937_64 rng(derive_seed(config_.seed, "classifier.init"));
  for (const auto* layer : {&gcn1_, &gcn2_}) layer->init(params_, rng);
  fc_.init(params_, rng);
  lstm_.init(params_, rng);
  context_fc_.init(params_, rng);
  latent_fc_.init(params_, rng);
  out_fc_.init(params_, rng);
  params_.meta["model"] = "impact_classifier";
  params_.meta["n_flows"] = std::to_string(n_);
  params_.meta["window"] = std::to_string(config_.window);
  params_.meta["gcn_hidden"] = std::to_string(config_.gcn_hidden);
  params_.meta["fc_width"] = std::to_string(config_.fc_width);
  params_.meta["lstm_hidden"] = std::to_string(config_.lstm_hidden);
  params_.meta["context_width"] = std::to_string(config_.context_width);
  params_.meta["latent_width"] = std::to_string(config_.latent_width);
  params_.meta["keep_prob"] = format_double(config_.keep_prob);
}

ImpactClassifier::ImpactClassifier(nn::ModelParams params, Matrix propagation)
    : propagation_(std::move(propagation)), params_(std::move(params)) {
  const auto it = params_.meta.find("model");
  if (it == params_.meta.end() || it->second != "impact_classifier") {
    fail(ErrorKind::parse, "checkpoint does not hold an impact classifier");
  }
  n_ = meta_size(params_, "n_flows");
  if (propagation_.rows() != idx(n_)) {
    fail(ErrorKind::invalid_argument, "classifier checkpoint was trained on " + std::to_string(n_) +
                                          " flows but the graph has " +
                                          std::to_string(propagation_.rows()));
  }
  config_.window = meta_size(params_, "window");
  config_.gcn_hidden = idx(meta_size(params_, "gcn_hidden"));
  config_.fc_width = idx(meta_size(params_, "fc_width"));
  config_.lstm_hidden = idx(meta_size(params_, "lstm_hidden"));
  config_.context_width = idx(meta_size(params_, "context_width"));
  config_.latent_width = idx(meta_size(params_, "latent_width"));
  config_.keep_prob = meta_double(params_, "keep_prob");
  declare_layers();
  // Touch every expected tensor so that a truncated checkpoint fails here.
  for (const char* name : {"gcn1.Theta", "gcn2.Theta", "st_fc.W", "lstm.Wx", "ctx_fc.W",
                           "latent_fc.W", "out.W"}) {
    params_.at(name);
  }
  if (params_.at("st_fc.W").value.rows() != idx(n_) * config_.gcn_hidden) {
    fail(ErrorKind::parse, "classifier checkpoint tensors do not match its flow count");
  }
}

void ImpactClassifier::declare_layers() {
  gcn1_ = {"gcn1", 2, config_.gcn_hidden};
  gcn2_ = {"gcn2", config_.gcn_hidden, config_.gcn_hidden};
  fc_ = {"st_fc", idx(n_) * config_.gcn_hidden, config_.fc_width};
  lstm_ = {"lstm", config_.fc_width, config_.lstm_hidden};
  context_fc_ = {"ctx_fc", kContextWidth, config_.context_width};
  latent_fc_ = {"latent_fc", config_.lstm_hidden + config_.context_width, config_.latent_width};
  out_fc_ = {"out", config_.latent_width, 1};
}

ImpactClassifier::Output ImpactClassifier::forward(Tape& tape,
                                                   std::span<const ClassifierInput* const> batch,
                                                   bool train, std::uint64_t dropout_seed) {
  require(!batch.empty(), "classifier forward needs a non-empty batch");
  const std::size_t b_count = batch.size();
  const std::size_t w = config_.window;
  Matrix x(idx(w * b_count * n_), 2);
  Matrix ctx(idx(b_count), kContextWidth);
  for (std::size_t b = 0; b < b_count; ++b) {
    const auto& in = *batch[b];
    if (in.snapshots.rows() != idx(w * n_) || in.snapshots.cols() != 2 ||
        in.context.size() != kContextWidth) {
      fail(ErrorKind::invalid_argument, "classifier input " + in.incident_id +
                                            " does not match the model shape");
    }
    for (std::size_t t = 0; t < w; ++t) {
      x.middleRows(idx((t * b_count + b) * n_), idx(n_)) = in.snapshots.middleRows(idx(t * n_), idx(n_));
    }
    ctx.row(idx(b)) = in.context;
  }
  std::mt19937_64 rng(dropout_seed);
  Var h = tape.constant(std::move(x));
  h = nn::dropout(gcn1_.forward(tape, params_, propagation_, h, Activation::relu), config_.keep_prob,
                  train, rng);
  h = nn::dropout(gcn2_.forward(tape, params_, propagation_, h, Activation::relu), config_.keep_prob,
                  train, rng);
  Var steps = fc_.forward(tape, params_, nn::flatten_blocks(h, idx(n_)), Activation::relu);
  Var y_g = lstm_.forward_stacked(tape, params_, steps, idx(w));
  Var y_c = context_fc_.forward(tape, params_, tape.constant(std::move(ctx)), Activation::relu);
  const std::array<Var, 2> parts{y_c, y_g};
  Var latent = latent_fc_.forward(tape, params_, nn::concat_cols(parts), Activation::relu);
  Var prob = out_fc_.forward(tape, params_, latent, Activation::sigmoid);
  return {prob, latent};
}

double ImpactClassifier::predict(const ClassifierInput& input) {
  Tape tape;
  const ClassifierInput* one[] = {&input};
  return forward(tape, one, false, 0).probability.value()(0, 0);
}

Eigen::RowVectorXd ImpactClassifier::latent_features(const ClassifierInput& input) {
  Tape tape;
  const ClassifierInput* one[] = {&input};
  return forward(tape, one, false, 0).latent.value().row(0);
}

SplitIndices split_samples(std::size_t n, double train_fraction, double validation_fraction,
                           std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction <= 1.0, "train fraction must lie in (0, 1]");
  require(validation_fraction >= 0.0 && validation_fraction < 1.0,
          "validation fraction must lie in [0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto pool = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  const auto val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(pool)));
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(pool - val));
  s.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(pool - val),
                      order.begin() + static_cast<std::ptrdiff_t>(pool));
  s.test.assign(order.begin() + static_cast<std::ptrdiff_t>(pool), order.end());
  return s;
}

namespace {

constexpr std::size_t kEvalChunk = 64;

std::vector<double> predict_subset(ImpactClassifier& model, const std::vector<ClassifierInput>& inputs,
                                   const std::vector<std::size_t>& subset) {
  std::vector<double> out;
  out.reserve(subset.size());
  for (std::size_t at = 0; at < subset.size(); at += kEvalChunk) {
    std::vector<const ClassifierInput*> batch;
    for (std::size_t k = at; k < std::min(subset.size(), at + kEvalChunk); ++k) {
      batch.push_back(&inputs[subset[k]]);
    }
    Tape tape;
    const Matrix& p = model.forward(tape, batch, false, 0).probability.value();
    for (Index r = 0; r < p.rows(); ++r) out.push_back(p(r, 0));
  }
  return out;
}

}  // namespace

double mean_bce(ImpactClassifier& model, const std::vector<ClassifierInput>& inputs,
                const std::vector<int>& labels, const std::vector<std::size_t>& subset) {
  const auto probs = predict_subset(model, inputs, subset);
  std::vector<double> y;
  for (auto i : subset) y.push_back(static_cast<double>(labels[i]));
  return nn::bce_loss(probs, y);
}

ClassifierMetrics evaluate_classifier(ImpactClassifier& model,
                                      const std::vector<ClassifierInput>& inputs,
                                      const std::vector<int>& labels,
                                      const std::vector<std::size_t>& subset) {
  require(inputs.size() == labels.size(), "input/label count mismatch");
  const auto probs = predict_subset(model, inputs, subset);
  std::vector<double> y;
  std::vector<int> truth;
  std::vector<int> pred;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    y.push_back(static_cast<double>(labels[subset[k]]));
    truth.push_back(labels[subset[k]]);
    pred.push_back(probs[k] >= 0.5 ? 1 : 0);
  }
  ClassifierMetrics m;
  m.bce = nn::bce_loss(probs, y);
  const auto f = nn::f1_score(pred, truth);
  m.f1 = f.f1;
  m.precision = f.precision;
  m.recall = f.recall;
  m.n_test = subset.size();
  return m;
}

TrainedClassifier train_classifier(const std::vector<ClassifierInput>& inputs,
                                   const std::vector<int>& labels, std::size_t n_flows,
                                   const Matrix& propagation, const ClassifierConfig& config) {
  require(inputs.size() == labels.size(), "input/label count mismatch");
  require(config.batch_size >= 1 && config.max_epochs >= 1, "batch size and epochs must be >= 1");
  for (int l : labels) require(l == 0 || l == 1, "classifier labels must be 0 or 1");
  SplitIndices split = split_samples(inputs.size(), config.train_fraction,
                                     config.validation_fraction,
                                     derive_seed(config.seed, "classifier.split"));
  std::size_t positives = 0;
  for (auto i : split.train) positives += static_cast<std::size_t>(labels[i]);
  if (split.train.empty() || positives == 0 || positives == split.train.size()) {
    fail(ErrorKind::invalid_argument,
         "classifier training split has a single class (" + std::to_string(positives) + " of " +
             std::to_string(split.train.size()) + " positive)");
  }
  if (split.test.empty()) fail(ErrorKind::invalid_argument, "classifier test split is empty");

  ImpactClassifier model(n_flows, propagation, config);
  ClassifierMetrics metrics;
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "classifier.shuffle"));
  const std::uint64_t dropout_root = derive_seed(config.seed, "classifier.dropout");
  const nn::AdamConfig adam{config.lr};
  Snapshot best = snapshot(model.params());
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t waited = 0;
  std::vector<std::size_t> order = split.train;
  std::uint64_t batch_counter = 0;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t at = 0; at < order.size(); at += config.batch_size) {
      std::vector<const ClassifierInput*> batch;
      Matrix y(idx(std::min(order.size(), at + config.batch_size) - at), 1);
      for (std::size_t k = at; k < std::min(order.size(), at + config.batch_size); ++k) {
        batch.push_back(&inputs[order[k]]);
        y(idx(k - at), 0) = labels[order[k]];
      }
      model.params().zero_grad();
      Tape tape;
      auto out = model.forward(tape, batch, true, splitmix64(dropout_root + batch_counter++));
      Var loss = nn::bce(out.probability, y);
      if (!std::isfinite(loss.value()(0, 0))) {
        fail(ErrorKind::numeric, "classifier loss diverged at epoch " + std::to_string(epoch));
      }
      tape.backward(loss);
      model.params().adam_step(adam);
    }
    const double train_loss = mean_bce(model, inputs, labels, split.train);
    const double val_loss =
        split.validation.empty() ? train_loss : mean_bce(model, inputs, labels, split.validation);
    metrics.train_loss.push_back(train_loss);
    metrics.validation_loss.push_back(val_loss);
    metrics.epochs = epoch + 1;
    if (val_loss < best_loss) {
      best_loss = val_loss;
      best = snapshot(model.params());
      metrics.best_epoch = epoch + 1;
      waited = 0;
    } else if (++waited >= config.patience) {
      break;
    }
  }
  restore(model.params(), best);
  const ClassifierMetrics test = evaluate_classifier(model, inputs, labels, split.test);
  metrics.bce = test.bce;
  metrics.f1 = test.f1;
  metrics.precision = test.precision;
  metrics.recall = test.recall;
  metrics.n_train = split.train.size();
  metrics.n_validation = split.validation.size();
  metrics.n_test = split.test.size();
  return {std::move(model), std::move(metrics), std::move(split)};
}

std::string format_features(const std::vector<std::string>& ids,
                            const std::vector<Eigen::RowVectorXd>& features) {
  require(ids.size() == features.size(), "feature id/row count mismatch");
  const Index width = features.empty() ? 16 : features.front().size();
  std::string out = "incident_id";
  for (Index k = 0; k < width; ++k) out += ",f" + std::to_string(k);
  out += "\n";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(features[i].size() == width, "feature rows differ in width");
    out += ids[i];
    for (Index k = 0; k < width; ++k) out += "," + format_double(features[i](k));
    out += "\n";
  }
  return out;
}

FeatureTable parse_features(std::string_view text) {
  const auto nl = text.find('\n');
  const std::string header(trim(text.substr(0, nl)));
  const auto cols = split(header, ',');
  if (cols.size() < 2 || cols[0] != "incident_id") {
    fail(ErrorKind::parse, "features.csv: header must start with incident_id");
  }
  for (std::size_t k = 1; k < cols.size(); ++k) {
    if (cols[k] != "f" + std::to_string(k - 1)) {
      fail(ErrorKind::parse, "features.csv: unexpected column " + std::string(cols[k]));
    }
  }
  FeatureTable t;
  for (const auto& row : parse_csv(text, header, "features.csv")) {
    const std::string ctx = "features.csv row " + std::to_string(row.line);
    t.ids.emplace_back(row.fields[0]);
    Eigen::RowVectorXd f(idx(cols.size() - 1));
    for (std::size_t k = 1; k < cols.size(); ++k) f(idx(k - 1)) = parse_double(row.fields[k], ctx);
    t.features.push_back(std::move(f));
  }
  return t;
}

void store_scales(nn::ModelParams& params, const FeatureScales& scales) {
  std::string speeds;
  for (Index i = 0; i < scales.flow_mean_speed.size(); ++i) {
    if (i > 0) speeds += ";";
    speeds += format_double(scales.flow_mean_speed(i));
  }
  params.meta["flow_mean_speed"] = speeds;
  params.meta["max_duration_min"] = format_double(scales.max_duration_min);
}

FeatureScales load_scales(const nn::ModelParams& params) {
  const auto it = params.meta.find("flow_mean_speed");
  if (it == params.meta.end()) fail(ErrorKind::parse, "checkpoint lacks feature scales");
  FeatureScales s;
  const auto parts = split(it->second, ';');
  s.flow_mean_speed.resize(idx(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    s.flow_mean_speed(idx(i)) = parse_double(parts[i], "checkpoint flow_mean_speed");
  }
  s.max_duration_min = meta_double(params, "max_duration_min");
  return s;
}

}  // namespace digc::classifier
