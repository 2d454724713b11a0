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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "neural/metrics.hpp"

namespace digc::net {

namespace {

using Index = Eigen::Index;
using nn::Activation;
using nn::Tape;
using nn::Var;

Index idx(std::size_t v) { return static_cast<Index>(v); }

constexpr std::size_t kSlotsPerDay = data::kSlotsPerDay;

std::size_t meta_size(const nn::ModelParams& p, const std::string& key) {
  const auto it = p.meta.find(key);
  if (it == p.meta.end()) fail(ErrorKind::parse, "predictor checkpoint lacks meta field " + key);
  const auto v = parse_int(it->second, "checkpoint meta " + key);
  if (v < 0) fail(ErrorKind::parse, "checkpoint meta " + key + " is negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::spatio_temporal:
      return "spatio_temporal";
    case Variant::st_periodic:
      return "st_periodic";
    case Variant::full:
      return "full";
  }
  return "full";
}

Variant parse_variant(std::string_view text) {
  if (text == "spatio_temporal") return Variant::spatio_temporal;
  if (text == "st_periodic") return Variant::st_periodic;
  if (text == "full") return Variant::full;
  fail(ErrorKind::config, "unknown model variant '" + std::string(text) +
                              "' (expected spatio_temporal, st_periodic or full)");
}

Eigen::RowVectorXd encode_weather(const data::WeatherRecord& w) {
  static const std::array<std::string, 4> kinds{"clear", "cloudy", "rain", "fog"};
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(kWeatherWidth);
  const auto it = std::find(kinds.begin(), kinds.end(), w.weather_type);
  v(it == kinds.end() ? 4 : it - kinds.begin()) = 1.0;
  v(5) = w.temperature_c / 40.0;
  v(6) = w.sunrise_offset_min / 1440.0;
  return v;
}

void DigcConfig::validate() const {
  if (history < 1) fail(ErrorKind::config, "history length must be >= 1");
  if (horizon < 1) fail(ErrorKind::config, "prediction length k must be >= 1");
  if (periodic_days < 1) fail(ErrorKind::config, "periodic lookback must be >= 1 day");
  if (incident_lookback < 1) fail(ErrorKind::config, "incident lookback must be >= 1 slot");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) fail(ErrorKind::config, "keep probability must lie in (0, 1]");
  if (batch_size < 1 || max_epochs < 1 || train_stride < 1) {
    fail(ErrorKind::config, "batch size, epochs and stride must be >= 1");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    fail(ErrorKind::config, "validation fraction must lie in [0, 1)");
  }
}

SeriesContext make_context(const data::CityData& city,
                           const std::map<std::string, Eigen::RowVectorXd>& latent,
                           std::size_t train_end_slot, std::size_t latent_width) {
  const auto& table = city.speeds;
  require(table.slot_count() > 0 && table.flow_count() > 0, "empty speed table");
  require(train_end_slot > 0 && train_end_slot <= table.slot_count(), "training range out of table");
  require(city.weather.size() == table.slot_count(),
          "weather must hold one record per slot (" + std::to_string(city.weather.size()) + " vs " +
              std::to_string(table.slot_count()) + ")");
  SeriesContext ctx;
  ctx.latent_width = latent_width;
  ctx.speeds = table.speeds;
  const Matrix logs = table.speeds.cwiseMax(kMinSpeed).array().log().matrix();
  const auto train = logs.topRows(idx(train_end_slot));
  ctx.flow_mean = train.colwise().mean().transpose();
  ctx.flow_std.resize(ctx.flow_mean.size());
  for (Index i = 0; i < ctx.flow_mean.size(); ++i) {
    const double var = (train.col(i).array() - ctx.flow_mean(i)).square().mean();
    ctx.flow_std(i) = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  ctx.normalized = (logs.rowwise() - ctx.flow_mean.transpose()) * ctx.flow_std.cwiseInverse().asDiagonal();
  ctx.weather.resize(idx(table.slot_count()), kWeatherWidth);
  for (std::size_t s = 0; s < city.weather.size(); ++s) ctx.weather.row(idx(s)) = encode_weather(city.weather[s]);
  for (const auto& inc : city.incidents) {
    const auto it = latent.find(inc.id);
    if (it == latent.end()) continue;
    if (it->second.size() != idx(latent_width)) {
      fail(ErrorKind::invalid_argument, "latent features of " + inc.id + " have width " +
                                            std::to_string(it->second.size()));
    }
    const auto slot = table.slot_of(inc.start_time);
    if (slot < 0 || slot >= static_cast<std::int64_t>(table.slot_count())) continue;
    ctx.events.push_back({static_cast<std::size_t>(slot), inc.id, inc.start_time, it->second});
  }
  std::sort(ctx.events.begin(), ctx.events.end(), [](const IncidentEvent& a, const IncidentEvent& b) {
    return a.start_time != b.start_time ? a.start_time < b.start_time : a.id < b.id;
  });
  return ctx;
}

bool window_eligible(const SeriesContext& ctx, const DigcConfig& config, std::size_t t) {
  return t >= config.history && t >= config.periodic_days * kSlotsPerDay &&
         t + config.horizon <= ctx.slot_count();
}

std::vector<std::size_t> incidents_for_target(const SeriesContext& ctx, const DigcConfig& config,
                                              std::size_t t) {
  const std::size_t lo = t >= config.incident_lookback ? t - config.incident_lookback : 0;
  std::vector<std::size_t> out;
  const auto first = std::lower_bound(ctx.events.begin(), ctx.events.end(), lo,
                                      [](const IncidentEvent& e, std::size_t s) { return e.slot < s; });
  for (auto it = first; it != ctx.events.end() && it->slot < t; ++it) {
    out.push_back(static_cast<std::size_t>(it - ctx.events.begin()));
  }
  return out;
}

PredictionWindow materialize_window(const SeriesContext& ctx, const DigcConfig& config,
                                    std::size_t t) {
  if (!window_eligible(ctx, config, t)) {
    fail(ErrorKind::invalid_argument, "slot " + std::to_string(t) +
                                          " lacks the history, periodic lookback or lookahead for a window");
  }
  const std::size_t n = ctx.flow_count();
  const std::size_t k = config.horizon;
  PredictionWindow w;
  w.target_slot = t;
  w.history = ctx.normalized.middleRows(idx(t - config.history), idx(config.history));
  w.weather = ctx.weather.middleRows(idx(t - config.history), idx(config.history));
  w.periodic.resize(idx(config.periodic_days), idx(k * n));
  for (std::size_t d = 1; d <= config.periodic_days; ++d) {
    for (std::size_t j = 0; j < k; ++j) {
      w.periodic.block(idx(d - 1), idx(j * n), 1, idx(n)) =
          ctx.normalized.row(idx(t - d * kSlotsPerDay + j));
    }
  }
  const auto events = incidents_for_target(ctx, config, t);
  w.incidents.resize(idx(events.size()), idx(ctx.latent_width));
  for (std::size_t e = 0; e < events.size(); ++e) {
    w.incidents.row(idx(e)) = ctx.events[events[e]].features;
    w.incident_ids.push_back(ctx.events[events[e]].id);
  }
  w.target = ctx.normalized.middleRows(idx(t), idx(k));
  return w;
}

std::size_t train_boundary(std::size_t slot_count) {
  if (slot_count >= 28 * kSlotsPerDay) return 21 * kSlotsPerDay;
  return slot_count * 3 / 4;
}

WindowSplit assemble_training_windows(const SeriesContext& ctx, const DigcConfig& config) {
  config.validate();
  WindowSplit split;
  split.boundary_slot = train_boundary(ctx.slot_count());
  std::vector<std::size_t> pool;
  std::size_t eligible_train = 0;
  for (std::size_t t = 0; t < ctx.slot_count(); ++t) {
    if (!window_eligible(ctx, config, t)) {
      ++split.skipped;
      continue;
    }
    if (t + config.horizon <= split.boundary_slot) {
      if (eligible_train++ % config.train_stride == 0) pool.push_back(t);
    } else if (t >= split.boundary_slot) {
      split.test.push_back(t);
    }
  }
  const auto n_val =
      static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(pool.size())));
  split.train.assign(pool.begin(), pool.end() - static_cast<std::ptrdiff_t>(n_val));
  split.validation.assign(pool.end() - static_cast<std::ptrdiff_t>(n_val), pool.end());
  return split;
}

// ---- predictor -----------------------------------------------------------------

DigcModel::DigcModel(std::size_t n_flows, Matrix propagation, DigcConfig config,
                     std::size_t latent_width)
    : n_(n_flows), latent_width_(latent_width), propagation_(std::move(propagation)), config_(config) {
  config_.validate();
  require(n_ > 0, "predictor needs at least one flow");
  require(propagation_.rows() == idx(n_) && propagation_.cols() == idx(n_),
          "propagation matrix does not match the flow count");
  declare_layers();
  std::mt19937_64 rng(derive_seed(config_.seed, "digc.init"));
  gcn1_.init(params_, rng);
  gcn2_.init(params_, rng);
  st_fc_.init(params_, rng);
  lstm_.init(params_, rng);
  head_.init(params_, rng);
  periodic_fc_.init(params_, rng);
  rnn_.init(params_, rng);
  fusion_fc_.init(params_, rng);
  out_fc_.init(params_, rng);
  auto& m = params_.meta;
  m["model"] = "digc";
  m["n_flows"] = std::to_string(n_);
  m["latent_width"] = std::to_string(latent_width_);
  m["history"] = std::to_string(config_.history);
  m["horizon"] = std::to_string(config_.horizon);
  m["periodic_days"] = std::to_string(config_.periodic_days);
  m["incident_lookback"] = std::to_string(config_.incident_lookback);
  m["gcn_hidden"] = std::to_string(config_.gcn_hidden);
  m["st_fc"] = std::to_string(config_.st_fc);
  m["lstm_hidden"] = std::to_string(config_.lstm_hidden);
  m["rnn_hidden"] = std::to_string(config_.rnn_hidden);
  m["periodic_fc"] = std::to_string(config_.periodic_fc);
  m["fusion"] = std::to_string(config_.fusion);
  m["keep_prob"] = format_double(config_.keep_prob);
  m["variant"] = to_string(config_.variant);
}

DigcModel::DigcModel(nn::ModelParams params, Matrix propagation)
    : propagation_(std::move(propagation)), params_(std::move(params)) {
  const auto it = params_.meta.find("model");
  if (it == params_.meta.end() || it->second != "digc") {
    fail(ErrorKind::parse, "checkpoint does not hold a predictor");
  }
  n_ = meta_size(params_, "n_flows");
  if (propagation_.rows() != idx(n_)) {
    fail(ErrorKind::invalid_argument, "predictor checkpoint was trained on " + std::to_string(n_) +
                                          " flows but the graph has " +
                                          std::to_string(propagation_.rows()));
  }
  latent_width_ = meta_size(params_, "latent_width");
  config_.history = meta_size(params_, "history");
  config_.horizon = meta_size(params_, "horizon");
  config_.periodic_days = meta_size(params_, "periodic_days");
  config_.incident_lookback = meta_size(params_, "incident_lookback");
  config_.gcn_hidden = idx(meta_size(params_, "gcn_hidden"));
  config_.st_fc = idx(meta_size(params_, "st_fc"));
  config_.lstm_hidden = idx(meta_size(params_, "lstm_hidden"));
  config_.rnn_hidden = idx(meta_size(params_, "rnn_hidden"));
  config_.periodic_fc = idx(meta_size(params_, "periodic_fc"));
  config_.fusion = idx(meta_size(params_, "fusion"));
  config_.keep_prob = parse_double(params_.meta.at("keep_prob"), "checkpoint meta keep_prob");
  config_.variant = parse_variant(params_.meta.at("variant"));
  declare_layers();
  for (const char* name : {"gcn1.Theta", "gcn2.Theta", "st_fc.W", "lstm.Wx", "head.W",
                           "periodic_fc.W", "rnn.Wx", "fusion.W", "out.W"}) {
    params_.at(name);
  }
  if (params_.at("out.W").value.cols() != idx(config_.horizon * n_)) {
    fail(ErrorKind::parse, "predictor checkpoint output width does not match k*N");
  }
}

void DigcModel::declare_layers() {
  const Index n = idx(n_);
  const Index kn = idx(config_.horizon) * n;
  gcn1_ = {"gcn1", 1, config_.gcn_hidden};
  gcn2_ = {"gcn2", config_.gcn_hidden, config_.gcn_hidden};
  st_fc_ = {"st_fc", n * config_.gcn_hidden, config_.st_fc};
  lstm_ = {"lstm", config_.st_fc + kWeatherWidth, config_.lstm_hidden};
  head_ = {"head", config_.lstm_hidden, kn};
  periodic_fc_ = {"periodic_fc", idx(config_.periodic_days) * kn, config_.periodic_fc};
  rnn_ = {"rnn", idx(latent_width_), config_.rnn_hidden};
  fusion_fc_ = {"fusion", kn + config_.rnn_hidden + config_.periodic_fc, config_.fusion};
  out_fc_ = {"out", config_.fusion, kn};
}

Var DigcModel::forward(Tape& tape, std::span<const PredictionWindow* const> batch, bool train,
                       std::uint64_t dropout_seed) {
  require(!batch.empty(), "predictor forward needs a non-empty batch");
  const std::size_t b_count = batch.size();
  const std::size_t h = config_.history;
  const std::size_t kn = config_.horizon * n_;
  Matrix x(idx(h * b_count * n_), 1);
  Matrix weather(idx(h * b_count), kWeatherWidth);
  Matrix periodic(idx(b_count), idx(config_.periodic_days * kn));
  std::size_t longest = 0;
  for (std::size_t b = 0; b < b_count; ++b) {
    const auto& w = *batch[b];
    if (w.history.rows() != idx(h) || w.history.cols() != idx(n_) ||
        w.periodic.rows() != idx(config_.periodic_days) || w.periodic.cols() != idx(kn) ||
        (w.incidents.rows() > 0 && w.incidents.cols() != idx(latent_width_))) {
      fail(ErrorKind::invalid_argument, "prediction window for slot " + std::to_string(w.target_slot) +
                                            " does not match the model shape");
    }
    for (std::size_t s = 0; s < h; ++s) {
      x.middleRows(idx((s * b_count + b) * n_), idx(n_)) = w.history.row(idx(s)).transpose();
      weather.row(idx(s * b_count + b)) = w.weather.row(idx(s));
    }
    for (std::size_t d = 0; d < config_.periodic_days; ++d) {
      periodic.block(idx(b), idx(d * kn), 1, idx(kn)) = w.periodic.row(idx(d));
    }
    longest = std::max(longest, static_cast<std::size_t>(w.incidents.rows()));
  }

  std::mt19937_64 rng(dropout_seed);
  Var g = tape.constant(std::move(x));
  g = nn::dropout(gcn1_.forward(tape, params_, propagation_, g, Activation::relu), config_.keep_prob,
                  train, rng);
  g = nn::dropout(gcn2_.forward(tape, params_, propagation_, g, Activation::relu), config_.keep_prob,
                  train, rng);
  Var steps = st_fc_.forward(tape, params_, nn::flatten_blocks(g, idx(n_)), Activation::relu);
  const std::array<Var, 2> step_parts{steps, tape.constant(std::move(weather))};
  Var hidden = lstm_.forward_stacked(tape, params_, nn::concat_cols(step_parts), idx(h));
  Var y_s = head_.forward(tape, params_, hidden, Activation::identity);

  Var y_p = tape.constant(Matrix::Zero(idx(b_count), config_.periodic_fc));
  if (config_.variant != Variant::spatio_temporal) {
    y_p = periodic_fc_.forward(tape, params_, tape.constant(std::move(periodic)), Activation::relu);
  }

  Var y_inci = tape.constant(Matrix::Zero(idx(b_count), config_.rnn_hidden));
  if (config_.variant == Variant::full && longest > 0) {
    std::vector<Var> seq;
    std::vector<Eigen::VectorXd> masks;
    for (std::size_t l = 0; l < longest; ++l) {
      Matrix step = Matrix::Zero(idx(b_count), idx(latent_width_));
      Eigen::VectorXd mask = Eigen::VectorXd::Zero(idx(b_count));
      for (std::size_t b = 0; b < b_count; ++b) {
        if (idx(l) < batch[b]->incidents.rows()) {
          step.row(idx(b)) = batch[b]->incidents.row(idx(l));
          mask(idx(b)) = 1.0;
        }
      }
      seq.push_back(tape.constant(std::move(step)));
      masks.push_back(std::move(mask));
    }
    y_inci = rnn_.forward(tape, params_, seq, masks);
  }

  const std::array<Var, 3> fused{y_s, y_inci, y_p};
  Var f = fusion_fc_.forward(tape, params_, nn::concat_cols(fused), Activation::relu);
  return out_fc_.forward(tape, params_, f, Activation::identity);
}

PlainLstm::PlainLstm(std::size_t n_flows, DigcConfig config) : n_(n_flows), config_(config) {
  config_.validate();
  lstm_ = {"lstm", idx(n_), config_.lstm_hidden};
  head_ = {"head", config_.lstm_hidden, idx(config_.horizon * n_)};
  std::mt19937_64 rng(derive_seed(config_.seed, "plain_lstm.init"));
  lstm_.init(params_, rng);
  head_.init(params_, rng);
  params_.meta["model"] = "plain_lstm";
}

Var PlainLstm::forward(Tape& tape, std::span<const PredictionWindow* const> batch, bool,
                       std::uint64_t) {
  require(!batch.empty(), "forward needs a non-empty batch");
  const std::size_t b_count = batch.size();
  const std::size_t h = config_.history;
  Matrix x(idx(h * b_count), idx(n_));
  for (std::size_t b = 0; b < b_count; ++b) {
    for (std::size_t s = 0; s < h; ++s) x.row(idx(s * b_count + b)) = batch[b]->history.row(idx(s));
  }
  Var hidden = lstm_.forward_stacked(tape, params_, tape.constant(std::move(x)), idx(h));
  return head_.forward(tape, params_, hidden, Activation::identity);
}

// ---- training and evaluation ------------------------------------------------------

namespace {

Matrix stack_targets(std::span<const PredictionWindow* const> batch) {
  const auto k = batch[0]->target.rows();
  const auto n = batch[0]->target.cols();
  Matrix y(idx(batch.size()), k * n);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (Index s = 0; s < k; ++s) y.block(idx(b), s * n, 1, n) = batch[b]->target.row(s);
  }
  return y;
}

constexpr std::size_t kEvalChunk = 64;

double mean_loss(SequenceModel& model, const SeriesContext& ctx, const std::vector<std::size_t>& targets) {
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t at = 0; at < targets.size(); at += kEvalChunk) {
    std::vector<PredictionWindow> windows;
    for (std::size_t i = at; i < std::min(targets.size(), at + kEvalChunk); ++i) {
      windows.push_back(materialize_window(ctx, model.config(), targets[i]));
    }
    std::vector<const PredictionWindow*> batch;
    for (const auto& w : windows) batch.push_back(&w);
    Tape tape;
    const Matrix& pred = model.forward(tape, batch, false, 0).value();
    total += (pred - stack_targets(batch)).squaredNorm();
    count += static_cast<std::size_t>(pred.size());
  }
  return count > 0 ? total / static_cast<double>(count) : 0.0;
}

}  // namespace

TrainingLog train_sequence_model(SequenceModel& model, const SeriesContext& ctx,
                                 const WindowSplit& split) {
  const DigcConfig& config = model.config();
  if (split.train.empty()) fail(ErrorKind::invalid_argument, "no training windows");
  TrainingLog log;
  log.n_train = split.train.size();
  log.n_validation = split.validation.size();
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "digc.shuffle"));
  const std::uint64_t dropout_root = derive_seed(config.seed, "digc.dropout");
  const nn::AdamConfig adam{config.lr};
  std::map<std::string, Matrix> best;
  for (const auto& [name, p] : model.params().entries()) best[name] = p.value;
  double best_loss = std::numeric_limits<double>::infinity();
  std::size_t waited = 0;
  std::uint64_t batch_counter = 0;
  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t at = 0; at < order.size(); at += config.batch_size) {
      std::vector<PredictionWindow> windows;
      for (std::size_t i = at; i < std::min(order.size(), at + config.batch_size); ++i) {
        windows.push_back(materialize_window(ctx, config, order[i]));
      }
      std::vector<const PredictionWindow*> batch;
      for (const auto& w : windows) batch.push_back(&w);
      model.params().zero_grad();
      Tape tape;
      Var pred = model.forward(tape, batch, true, splitmix64(dropout_root + batch_counter++));
      Var loss = nn::mse(pred, stack_targets(batch));
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) {
        fail(ErrorKind::numeric, "training loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                     ", batch starting at " + std::to_string(at));
      }
      epoch_loss += value * static_cast<double>(batch.size());
      tape.backward(loss);
      model.params().adam_step(adam);
    }
    log.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    const double val = split.validation.empty() ? log.train_loss.back()
                                                : mean_loss(model, ctx, split.validation);
    log.validation_loss.push_back(val);
    log.epochs = epoch + 1;
    if (val < best_loss) {
      best_loss = val;
      for (const auto& [name, p] : model.params().entries()) best[name] = p.value;
      log.best_epoch = epoch + 1;
      waited = 0;
    } else if (++waited >= config.patience) {
      break;
    }
  }
  for (auto& [name, p] : model.params().entries()) p.value = best.at(name);
  return log;
}

std::vector<Matrix> predict_normalized(SequenceModel& model, const SeriesContext& ctx,
                                       const std::vector<std::size_t>& targets) {
  const std::size_t k = model.config().horizon;
  const std::size_t n = ctx.flow_count();
  std::vector<Matrix> out;
  out.reserve(targets.size());
  for (std::size_t at = 0; at < targets.size(); at += kEvalChunk) {
    std::vector<PredictionWindow> windows;
    for (std::size_t i = at; i < std::min(targets.size(), at + kEvalChunk); ++i) {
      windows.push_back(materialize_window(ctx, model.config(), targets[i]));
    }
    std::vector<const PredictionWindow*> batch;
    for (const auto& w : windows) batch.push_back(&w);
    Tape tape;
    const Matrix& pred = model.forward(tape, batch, false, 0).value();
    for (Index b = 0; b < pred.rows(); ++b) {
      Matrix m(idx(k), idx(n));
      for (std::size_t s = 0; s < k; ++s) m.row(idx(s)) = pred.block(b, idx(s * n), 1, idx(n));
      out.push_back(std::move(m));
    }
  }
  return out;
}

std::vector<Matrix> predict_multistep(SequenceModel& model, const SeriesContext& ctx,
                                      const std::vector<std::size_t>& targets) {
  auto out = predict_normalized(model, ctx, targets);
  for (auto& m : out) {
    m = ((m * ctx.flow_std.asDiagonal()).rowwise() + ctx.flow_mean.transpose()).array().exp().matrix();
  }
  return out;
}

MapeReport evaluate_predictions(const SeriesContext& ctx, const std::vector<std::size_t>& targets,
                                const std::vector<Matrix>& predictions) {
  require(targets.size() == predictions.size(), "target/prediction count mismatch");
  require(!targets.empty(), "no predictions to evaluate");
  const auto k = static_cast<std::size_t>(predictions.front().rows());
  const std::size_t n = ctx.flow_count();
  MapeReport r;
  r.targets = targets.size();
  std::vector<double> all_pred, all_true;
  for (std::size_t s = 0; s < k; ++s) {
    std::vector<double> pred, truth;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      require(predictions[i].rows() == idx(k) && predictions[i].cols() == idx(n),
              "prediction shape mismatch");
      for (std::size_t f = 0; f < n; ++f) {
        pred.push_back(predictions[i](idx(s), idx(f)));
        truth.push_back(ctx.speeds(idx(targets[i] + s), idx(f)));
      }
    }
    r.per_step.push_back(nn::mape(pred, truth).percent);
    all_pred.insert(all_pred.end(), pred.begin(), pred.end());
    all_true.insert(all_true.end(), truth.begin(), truth.end());
  }
  const auto overall = nn::mape(all_pred, all_true);
  r.overall = overall.percent;
  r.excluded = overall.excluded;
  return r;
}

std::string format_predictions(const std::vector<std::size_t>& targets,
                               const std::vector<Matrix>& predictions) {
  require(targets.size() == predictions.size(), "target/prediction count mismatch");
  std::string out = "slot,flow_id,step,predicted_speed\n";
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Matrix& m = predictions[i];
    for (Index s = 0; s < m.rows(); ++s) {
      for (Index f = 0; f < m.cols(); ++f) {
        out += std::to_string(targets[i] + static_cast<std::size_t>(s)) + "," + std::to_string(f) + "," +
               std::to_string(s + 1) + "," + format_double(m(s, f)) + "\n";
      }
    }
  }
  return out;
}

}  // namespace digc::net
