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
#include "pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <functional>
#include <set>
#include <type_traits>

#include <json.hpp>

#include "neural/params.hpp"
#include "road_graph.hpp"

namespace digc::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// ---- option registry --------------------------------------------------------

std::string to_text(std::size_t v) { return std::to_string(v); }
std::string to_text(double v) { return format_double(v); }
std::string to_text(bool v) { return v ? "true" : "false"; }
std::string to_text(const fs::path& v) { return v.generic_string(); }
std::string to_text(net::Variant v) { return net::to_string(v); }
std::string to_text(TimePoint v) { return format_iso8601(v); }
std::string to_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

template <class T>
T from_text(std::string_view text, const std::string& key) {
  const auto v = trim(text);
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(ErrorKind::config, "option " + key + " expects true or false, got '" + std::string(v) + "'");
  } else if constexpr (std::is_integral_v<T>) {
    const auto n = parse_int(v, "option " + key);
    if (n < 0) fail(ErrorKind::config, "option " + key + " must be non-negative");
    return static_cast<T>(n);
  } else if constexpr (std::is_floating_point_v<T>) {
    return parse_double(v, "option " + key);
  } else if constexpr (std::is_same_v<T, std::vector<double>>) {
    std::vector<double> out;
    for (auto part : split(v, ',')) out.push_back(parse_double(trim(part), "option " + key));
    if (out.empty()) fail(ErrorKind::config, "option " + key + " needs at least one value");
    return out;
  } else if constexpr (std::is_same_v<T, net::Variant>) {
    return net::parse_variant(v);
  } else if constexpr (std::is_same_v<T, TimePoint>) {
    return parse_iso8601(v);
  } else {
    return T(std::string(v));
  }
}

struct Option {
  std::string key;
  std::function<std::string(PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;
};

template <class F>
Option option(std::string key, F field) {
  using T = std::remove_cvref_t<decltype(field(std::declval<PipelineConfig&>()))>;
  Option o;
  o.key = key;
  o.get = [field](PipelineConfig& c) { return to_text(field(c)); };
  o.set = [field, key](PipelineConfig& c, std::string_view v) {
    try {
      field(c) = from_text<T>(v, key);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::config) throw;
      fail(ErrorKind::config, e.what());
    }
  };
  return o;
}

const std::vector<Option>& options() {
  using C = PipelineConfig;
  static const std::vector<Option> table = [] {
    std::vector<Option> t;
    t.push_back(option("seed", [](C& c) -> auto& { return c.seed; }));
    t.push_back(option("data_dir", [](C& c) -> auto& { return c.data_dir; }));
    t.push_back(option("scenario.n_flows", [](C& c) -> auto& { return c.scenario.n_flows; }));
    t.push_back(option("scenario.days", [](C& c) -> auto& { return c.scenario.days; }));
    t.push_back(option("scenario.districts", [](C& c) -> auto& { return c.scenario.districts; }));
    t.push_back(option("scenario.spacing_m", [](C& c) -> auto& { return c.scenario.spacing_m; }));
    t.push_back(option("scenario.start_time", [](C& c) -> auto& { return c.scenario.start_time; }));
    t.push_back(option("scenario.white_noise", [](C& c) -> auto& { return c.scenario.white_noise; }));
    t.push_back(option("scenario.flow_ar_noise", [](C& c) -> auto& { return c.scenario.flow_ar_noise; }));
    t.push_back(option("scenario.district_ar_noise",
                       [](C& c) -> auto& { return c.scenario.district_ar_noise; }));
    t.push_back(option("scenario.incidents_per_day",
                       [](C& c) -> auto& { return c.scenario.incidents_per_day; }));
    t.push_back(option("scenario.high_impact_share",
                       [](C& c) -> auto& { return c.scenario.high_impact_share; }));
    t.push_back(option("scenario.zero_impact_share",
                       [](C& c) -> auto& { return c.scenario.zero_impact_share; }));
    t.push_back(option("scenario.impact_radius_m", [](C& c) -> auto& { return c.scenario.impact_radius_m; }));
    t.push_back(option("discovery.delta", [](C& c) -> auto& { return c.discovery.delta; }));
    t.push_back(option("discovery.rho", [](C& c) -> auto& { return c.discovery.rho; }));
    t.push_back(option("discovery.theta", [](C& c) -> auto& { return c.discovery.theta; }));
    t.push_back(option("discovery.radius_m", [](C& c) -> auto& { return c.discovery.radius_m; }));
    t.push_back(option("discovery.similarity_window",
                       [](C& c) -> auto& { return c.discovery.similarity_window; }));
    t.push_back(option("discovery.rsv_window", [](C& c) -> auto& { return c.discovery.rsv_window; }));
    t.push_back(option("discovery.norm_half_window",
                       [](C& c) -> auto& { return c.discovery.norm_half_window; }));
    t.push_back(option("discovery.influence_window",
                       [](C& c) -> auto& { return c.discovery.influence_window; }));
    t.push_back(option("discovery.clusters", [](C& c) -> auto& { return c.discovery.clusters; }));
    t.push_back(option("discovery.write_scores", [](C& c) -> auto& { return c.write_scores; }));
    t.push_back(option("sweep.rho", [](C& c) -> auto& { return c.sweep_rho; }));
    t.push_back(option("sweep.theta", [](C& c) -> auto& { return c.sweep_theta; }));
    t.push_back(option("classifier.window", [](C& c) -> auto& { return c.classifier.window; }));
    t.push_back(option("classifier.keep_prob", [](C& c) -> auto& { return c.classifier.keep_prob; }));
    t.push_back(option("classifier.lr", [](C& c) -> auto& { return c.classifier.lr; }));
    t.push_back(option("classifier.batch_size", [](C& c) -> auto& { return c.classifier.batch_size; }));
    t.push_back(option("classifier.max_epochs", [](C& c) -> auto& { return c.classifier.max_epochs; }));
    t.push_back(option("classifier.patience", [](C& c) -> auto& { return c.classifier.patience; }));
    t.push_back(option("classifier.train_fraction",
                       [](C& c) -> auto& { return c.classifier.train_fraction; }));
    t.push_back(option("classifier.validation_fraction",
                       [](C& c) -> auto& { return c.classifier.validation_fraction; }));
    t.push_back(option("digc.variant", [](C& c) -> auto& { return c.digc.variant; }));
    t.push_back(option("digc.horizon", [](C& c) -> auto& { return c.digc.horizon; }));
    t.push_back(option("digc.history", [](C& c) -> auto& { return c.digc.history; }));
    t.push_back(option("digc.periodic_days", [](C& c) -> auto& { return c.digc.periodic_days; }));
    t.push_back(option("digc.incident_lookback", [](C& c) -> auto& { return c.digc.incident_lookback; }));
    t.push_back(option("digc.keep_prob", [](C& c) -> auto& { return c.digc.keep_prob; }));
    t.push_back(option("digc.lr", [](C& c) -> auto& { return c.digc.lr; }));
    t.push_back(option("digc.batch_size", [](C& c) -> auto& { return c.digc.batch_size; }));
    t.push_back(option("digc.max_epochs", [](C& c) -> auto& { return c.digc.max_epochs; }));
    t.push_back(option("digc.patience", [](C& c) -> auto& { return c.digc.patience; }));
    t.push_back(option("digc.validation_fraction",
                       [](C& c) -> auto& { return c.digc.validation_fraction; }));
    t.push_back(option("digc.train_stride", [](C& c) -> auto& { return c.digc.train_stride; }));
    t.push_back(option("evaluate.plain_lstm", [](C& c) -> auto& { return c.plain_lstm_baseline; }));
    std::sort(t.begin(), t.end(), [](const Option& a, const Option& b) { return a.key < b.key; });
    return t;
  }();
  return table;
}

void flatten_json(const json& node, const std::string& prefix,
                  std::vector<std::pair<std::string, std::string>>& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten_json(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (node.is_array()) {
    std::string joined;
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (!node[i].is_number()) fail(ErrorKind::config, "option " + prefix + " expects a list of numbers");
      joined += (i ? "," : "") + format_double(node[i].get<double>());
    }
    out.emplace_back(prefix, joined);
  } else if (node.is_string()) {
    out.emplace_back(prefix, node.get<std::string>());
  } else if (node.is_boolean()) {
    out.emplace_back(prefix, node.get<bool>() ? "true" : "false");
  } else if (node.is_number_integer() || node.is_number_unsigned()) {
    out.emplace_back(prefix, node.dump());
  } else if (node.is_number_float()) {
    out.emplace_back(prefix, format_double(node.get<double>()));
  } else {
    fail(ErrorKind::config, "option " + prefix + " has an unsupported value");
  }
}

// ---- stage bookkeeping ------------------------------------------------------

class DirectoryLock {
 public:
  explicit DirectoryLock(const fs::path& dir) : path_(dir / ".digc.lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST) {
        fail(ErrorKind::io, "output directory " + dir.string() + " is in use (lock file " + path_.string() +
                                " exists; remove it if no other run is active)");
      }
      fail(ErrorKind::io, "cannot create lock file " + path_.string() + ": " + std::strerror(errno));
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    if (::write(fd_, pid.data(), pid.size()) < 0) {
      // The pid is informational only.
    }
  }
  ~DirectoryLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
  int fd_ = -1;
};

std::string relative_name(const fs::path& path, const fs::path& root) {
  const auto rel = path.lexically_relative(root);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return path.generic_string();
}

class Stage {
 public:
  Stage(const PipelineConfig& config, const std::string& hash, std::string name, fs::path dir)
      : config_(config), hash_(hash), name_(std::move(name)), dir_(std::move(dir)),
        start_(std::chrono::steady_clock::now()) {
    fs::create_directories(dir_);
  }

  // Fails with a missing-artifact error naming the stage that produces it.
  fs::path input(const fs::path& path, std::string_view producer) {
    if (!fs::exists(path)) {
      fail(ErrorKind::missing_artifact, "missing artifact " + path.string() + " (run `" +
                                            std::string(producer) + "` first)");
    }
    inputs_[relative_name(path, config_.out_dir)] = hex64(fnv1a64(read_file(path)));
    return path;
  }
  void city_inputs(const fs::path& data_dir) {
    for (const char* f : {"city.json", "speeds.csv", "incidents.json", "weather.csv", "geometry.csv"}) {
      input(data_dir / f, "generate");
    }
  }
  void write(const std::string& file, const std::string& content) {
    write_file(dir_ / file, content);
    outputs_[relative_name(dir_ / file, config_.out_dir)] = hex64(fnv1a64(content));
  }
  void write_json(const std::string& file, const json& value) { write(file, value.dump(2) + "\n"); }
  // Records a file written by another routine.
  void record(const std::string& file) {
    outputs_[relative_name(dir_ / file, config_.out_dir)] = hex64(fnv1a64(read_file(dir_ / file)));
  }
  const fs::path& dir() const { return dir_; }

  void finish() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json m;
    m["stage"] = name_;
    m["seed"] = config_.seed;
    m["config_hash"] = hash_;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["wall_time_s"] = wall;
    write_file(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  const PipelineConfig& config_;
  const std::string& hash_;
  std::string name_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

json stamp(const PipelineConfig& config, const std::string& hash) {
  json j;
  j["seed"] = config.seed;
  j["config_hash"] = hash;
  return j;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

// ---- configuration ----------------------------------------------------------

fs::path PipelineConfig::resolved_data_dir() const {
  return data_dir.empty() ? out_dir / "data" : data_dir;
}

void set_option(PipelineConfig& config, std::string_view key, std::string_view value) {
  for (const auto& o : options()) {
    if (o.key == key) {
      o.set(config, value);
      return;
    }
  }
  fail(ErrorKind::config, "unknown option '" + std::string(key) + "'");
}

std::vector<std::string> option_keys() {
  std::vector<std::string> keys;
  for (const auto& o : options()) keys.push_back(o.key);
  return keys;
}

void apply_config_file(PipelineConfig& config, const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::config, "config file " + path.string() + " does not exist");
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::exception& e) {
    fail(ErrorKind::config, "config file " + path.string() + ": " + e.what());
  }
  if (!root.is_object()) fail(ErrorKind::config, "config file " + path.string() + " must hold an object");
  std::vector<std::pair<std::string, std::string>> entries;
  flatten_json(root, "", entries);
  for (const auto& [k, v] : entries) set_option(config, k, v);
}

std::string canonical_config(const PipelineConfig& config) {
  PipelineConfig copy = config;
  std::string out;
  for (const auto& o : options()) out += o.key + "=" + o.get(copy) + "\n";
  return out;
}

std::string config_hash(const PipelineConfig& config) { return hex64(fnv1a64(canonical_config(config))); }

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"generate", "build-graph",      "discover", "sweep",
                                              "train-classifier", "extract-features", "train",
                                              "predict",  "evaluate",         "report"};
  return names;
}

// ---- pipeline ---------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  if (config_.out_dir.empty()) fail(ErrorKind::config, "an output directory is required");
  try {
    config_.discovery.validate();
    config_.digc.validate();
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
  if (!config_.data_dir.empty() && !fs::is_directory(config_.data_dir)) {
    fail(ErrorKind::config, "data directory " + config_.data_dir.string() + " does not exist");
  }
  hash_ = config_hash(config_);
}

void Pipeline::run(std::string_view command) {
  const auto& names = commands();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    fail(ErrorKind::config, "unknown command '" + std::string(command) + "'");
  }
  fs::create_directories(config_.out_dir);
  DirectoryLock lock(config_.out_dir);
  if (command == "generate") generate();
  if (command == "build-graph") build_graph();
  if (command == "discover") discover();
  if (command == "sweep") sweep();
  if (command == "train-classifier") train_classifier();
  if (command == "extract-features") extract_features();
  if (command == "train") train();
  if (command == "predict") predict();
  if (command == "evaluate") evaluate();
  if (command == "report") report();
}

namespace {

std::vector<int> cluster_labels(Stage& stage, const PipelineConfig& config, std::size_t n_flows) {
  if (config.discovery.clusters <= 1) return {};
  const auto path = stage.input(config.out_dir / "graph" / "clusters.csv", "build-graph");
  auto labels = graph::parse_clusters(read_file(path), n_flows);
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;
  if (static_cast<std::size_t>(k) != config.discovery.clusters) {
    fail(ErrorKind::config, "clusters.csv holds " + std::to_string(k) + " clusters but discovery.clusters is " +
                                std::to_string(config.discovery.clusters) + " (re-run build-graph)");
  }
  return labels;
}

Eigen::MatrixXd propagation(Stage& stage, const PipelineConfig& config, std::size_t n_flows) {
  const auto path = stage.input(config.out_dir / "graph" / "edges.csv", "build-graph");
  return graph::parse_edges(read_file(path), n_flows).propagation_matrix();
}

std::map<std::string, Eigen::RowVectorXd> latent_features(Stage& stage, const PipelineConfig& config,
                                                          bool required) {
  const auto path = config.out_dir / "features" / "features.csv";
  std::map<std::string, Eigen::RowVectorXd> out;
  if (!required) return out;
  const auto table = classifier::parse_features(read_file(stage.input(path, "extract-features")));
  for (std::size_t i = 0; i < table.ids.size(); ++i) out[table.ids[i]] = table.features[i];
  return out;
}

std::size_t latent_width(const std::map<std::string, Eigen::RowVectorXd>& latent,
                         const classifier::ClassifierConfig& config) {
  return latent.empty() ? static_cast<std::size_t>(config.latent_width)
                        : static_cast<std::size_t>(latent.begin()->second.size());
}

json mape_json(const net::MapeReport& r) {
  json j;
  j["mape_overall"] = r.overall;
  j["mape_per_step"] = r.per_step;
  j["targets"] = r.targets;
  j["excluded_targets"] = r.excluded;
  return j;
}

}  // namespace

void Pipeline::generate() {
  Stage stage(config_, hash_, "generate", config_.resolved_data_dir());
  auto scenario = config_.scenario;
  scenario.seed = derive_seed(config_.seed, "generate");
  const auto city = data::generate_synthetic_city(scenario);
  data::save_city(stage.dir(), city.data);
  for (const char* f : {"city.json", "speeds.csv", "incidents.json", "weather.csv", "geometry.csv"}) {
    stage.record(f);
  }
  stage.write("ground_truth.csv", data::format_ground_truth(city.truth));
  stage.finish();
}

void Pipeline::build_graph() {
  Stage stage(config_, hash_, "build-graph", config_.out_dir / "graph");
  const auto data_dir = config_.resolved_data_dir();
  const auto geometry = data::load_geometry(stage.input(data_dir / "geometry.csv", "generate"));
  const auto g = graph::build_flow_graph(geometry);
  stage.write("edges.csv", graph::format_edges(g));
  std::vector<int> labels(g.node_count(), 0);
  if (config_.discovery.clusters > 1) {
    labels = graph::spectral_clusters(g, config_.discovery.clusters, derive_seed(config_.seed, "clusters")).labels;
  }
  stage.write("clusters.csv", graph::format_clusters(labels));
  stage.finish();
}

void Pipeline::discover() {
  Stage stage(config_, hash_, "discover", config_.out_dir / "discovery");
  const auto data_dir = config_.resolved_data_dir();
  stage.city_inputs(data_dir);
  const auto city = data::load_city(data_dir);
  const auto labels = cluster_labels(stage, config_, city.geometry.size());
  const auto scores = discovery::compute_scores(city.speeds, config_.discovery, labels);
  const auto result = discovery::discover_incidents(city, scores, config_.discovery);
  stage.write("labels.csv", discovery::format_labels(result.labels));
  stage.write("temporal.csv", discovery::format_temporal(city, result.labels));
  if (config_.write_scores) stage.write("scores.csv", discovery::format_scores(scores));

  json summary = stamp(config_, hash_);
  std::size_t critical = 0;
  for (const auto& l : result.labels) critical += l.is_critical ? 1 : 0;
  summary["incidents"] = city.incidents.size();
  summary["labeled"] = result.labels.size();
  summary["critical"] = critical;
  summary["skipped"] = result.skipped;
  summary["rho"] = config_.discovery.rho;
  summary["theta"] = config_.discovery.theta;
  try {
    const auto v = discovery::rsv_variant_validation(city, scores, config_.discovery);
    summary["rsv_variant_correlations"] = v.correlations;
    summary["rsv_variant_selected"] = static_cast<int>(v.selected);
    summary["rsv_validation_incidents"] = v.incidents_used;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::invalid_argument) throw;
    summary["rsv_variant_note"] = e.what();
  }
  stage.write_json("summary.json", summary);
  stage.finish();
}

void Pipeline::sweep() {
  Stage stage(config_, hash_, "sweep", config_.out_dir / "sweep");
  const auto data_dir = config_.resolved_data_dir();
  stage.city_inputs(data_dir);
  const auto city = data::load_city(data_dir);
  const auto labels = cluster_labels(stage, config_, city.geometry.size());
  const auto scores = discovery::compute_scores(city.speeds, config_.discovery, labels);
  const auto points =
      discovery::sweep_thresholds(city, scores, config_.discovery, config_.sweep_rho, config_.sweep_theta);
  stage.write("sweep.csv", discovery::format_sweep(points));
  stage.finish();
}

void Pipeline::train_classifier() {
  Stage stage(config_, hash_, "train-classifier", config_.out_dir / "classifier");
  const auto data_dir = config_.resolved_data_dir();
  stage.city_inputs(data_dir);
  const auto city = data::load_city(data_dir);
  const auto n = city.geometry.size();
  const auto p = propagation(stage, config_, n);
  const auto labels =
      discovery::parse_labels(read_file(stage.input(config_.out_dir / "discovery" / "labels.csv", "discover")));
  std::map<std::string, int> by_id;
  for (const auto& l : labels) by_id[l.incident_id] = l.is_critical ? 1 : 0;

  auto cfg = config_.classifier;
  cfg.seed = derive_seed(config_.seed, "classifier");
  const auto scales = classifier::compute_feature_scales(city.speeds, city.incidents);
  std::vector<classifier::ClassifierInput> inputs;
  std::vector<int> targets;
  std::vector<std::string> skipped;
  for (const auto& inc : city.incidents) {
    const auto it = by_id.find(inc.id);
    if (it == by_id.end()) continue;
    try {
      inputs.push_back(classifier::build_classifier_input(inc, city.speeds, city.geometry, scales, cfg));
      targets.push_back(it->second);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::invalid_argument) throw;
      skipped.push_back(inc.id);
    }
  }
  auto trained = classifier::train_classifier(inputs, targets, n, p, cfg);
  classifier::store_scales(trained.model.params(), scales);
  stage.write("checkpoint.json", nn::serialize_params(trained.model.params()));

  const auto& m = trained.metrics;
  json j = stamp(config_, hash_);
  j["bce"] = m.bce;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["n_train"] = m.n_train;
  j["n_validation"] = m.n_validation;
  j["n_test"] = m.n_test;
  j["epochs"] = m.epochs;
  j["best_epoch"] = m.best_epoch;
  j["train_loss"] = m.train_loss;
  j["validation_loss"] = m.validation_loss;
  j["skipped_incidents"] = skipped;
  stage.write_json("metrics.json", j);
  stage.finish();
}

void Pipeline::extract_features() {
  Stage stage(config_, hash_, "extract-features", config_.out_dir / "features");
  const auto data_dir = config_.resolved_data_dir();
  stage.city_inputs(data_dir);
  const auto city = data::load_city(data_dir);
  const auto p = propagation(stage, config_, city.geometry.size());
  auto params = nn::load_params(stage.input(config_.out_dir / "classifier" / "checkpoint.json", "train-classifier"));
  const auto scales = classifier::load_scales(params);
  classifier::ImpactClassifier model(std::move(params), p);
  std::vector<std::string> ids;
  std::vector<Eigen::RowVectorXd> features;
  for (const auto& inc : city.incidents) {
    classifier::ClassifierInput input;
    try {
      input = classifier::build_classifier_input(inc, city.speeds, city.geometry, scales, model.config());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::invalid_argument) throw;
      continue;
    }
    ids.push_back(inc.id);
    features.push_back(model.latent_features(input));
  }
  stage.write("features.csv", classifier::format_features(ids, features));
  stage.finish();
}

void Pipeline::train() {
  Stage stage(config_, hash_, "train", config_.out_dir / "model");
  const auto data_dir = config_.resolved_data_dir();
  stage.city_inputs(data_dir);
  const auto city = data::load_city(data_dir);
  const auto n = city.geometry.size();
  const auto p = propagation(stage, config_, n);
  auto cfg = config_.digc;
  cfg.seed = derive_seed(config_.seed, "digc");
  const auto latent = latent_features(stage, config_, cfg.variant == net::Variant::full);
  const auto ctx = net::make_context(city, latent, net::train_boundary(city.speeds.slot_count()),
                                     latent_width(latent, config_.classifier));
  const auto split = net::assemble_training_windows(ctx, cfg);
  if (split.train.empty() || split.test.empty()) {
    fail(ErrorKind::config, "the data is too short for training and test windows (need more than " +
                                std::to_string(cfg.periodic_days) + " days)");
  }
  net::DigcModel model(n, p, cfg, ctx.latent_width);
  const auto log = net::train_sequence_model(model, ctx, split);
  stage.write("checkpoint.json", nn::serialize_params(model.params()));

  json j = stamp(config_, hash_);
  j["variant"] = net::to_string(cfg.variant);
  j["horizon"] = cfg.horizon;
  j["n_train"] = log.n_train;
  j["n_validation"] = log.n_validation;
  j["n_test"] = split.test.size();
  j["skipped_slots"] = split.skipped;
  j["boundary_slot"] = split.boundary_slot;
  j["epochs"] = log.epochs;
  j["best_epoch"] = log.best_epoch;
  j["train_loss"] = log.train_loss;
  j["validation_loss"] = log.validation_loss;
  j["flow_mean_log_speed"] = to_vector(ctx.flow_mean);
  j["flow_std_log_speed"] = to_vector(ctx.flow_std);
  stage.write_json("training.json", j);
  stage.finish();
}

namespace {

struct LoadedPredictor {
  data::CityData city;
  net::SeriesContext ctx;
  net::WindowSplit split;
  std::unique_ptr<net::DigcModel> model;
};

LoadedPredictor load_predictor(Stage& stage, const PipelineConfig& config) {
  LoadedPredictor out;
  const auto data_dir = config.resolved_data_dir();
  const auto checkpoint = stage.input(config.out_dir / "model" / "checkpoint.json", "train");
  stage.city_inputs(data_dir);
  out.city = data::load_city(data_dir);
  const auto n = out.city.geometry.size();
  const auto p = propagation(stage, config, n);
  out.model = std::make_unique<net::DigcModel>(nn::load_params(checkpoint), p);
  const auto& mc = out.model->config();
  if (mc.horizon != config.digc.horizon || mc.variant != config.digc.variant) {
    fail(ErrorKind::config, "checkpoint was trained with variant " + net::to_string(mc.variant) + ", k=" +
                                std::to_string(mc.horizon) + " but the configuration asks for " +
                                net::to_string(config.digc.variant) + ", k=" +
                                std::to_string(config.digc.horizon));
  }
  const auto latent = latent_features(stage, config, mc.variant == net::Variant::full);
  out.ctx = net::make_context(out.city, latent, net::train_boundary(out.city.speeds.slot_count()),
                              latent_width(latent, config.classifier));
  auto cfg = mc;
  cfg.seed = derive_seed(config.seed, "digc");
  cfg.validation_fraction = config.digc.validation_fraction;
  cfg.train_stride = config.digc.train_stride;
  out.split = net::assemble_training_windows(out.ctx, cfg);
  if (out.split.test.empty()) fail(ErrorKind::config, "no test windows after the training boundary");
  return out;
}

}  // namespace

void Pipeline::predict() {
  Stage stage(config_, hash_, "predict", config_.out_dir / "predictions");
  auto loaded = load_predictor(stage, config_);
  const auto preds = net::predict_multistep(*loaded.model, loaded.ctx, loaded.split.test);
  stage.write("predictions.csv", net::format_predictions(loaded.split.test, preds));
  json j = stamp(config_, hash_);
  j.update(mape_json(net::evaluate_predictions(loaded.ctx, loaded.split.test, preds)));
  j["variant"] = net::to_string(loaded.model->config().variant);
  j["horizon"] = loaded.model->config().horizon;
  stage.write_json("metrics.json", j);
  stage.finish();
}

void Pipeline::evaluate() {
  Stage stage(config_, hash_, "evaluate", config_.out_dir / "evaluation");
  auto loaded = load_predictor(stage, config_);
  const auto& test = loaded.split.test;
  const auto k = loaded.model->config().horizon;
  json models;
  models["digc"] =
      mape_json(net::evaluate_predictions(loaded.ctx, test, net::predict_multistep(*loaded.model, loaded.ctx, test)));
  models["persistence"] =
      mape_json(net::evaluate_predictions(loaded.ctx, test, net::persistence_predictions(loaded.ctx, k, test)));
  models["historical_average"] = mape_json(net::evaluate_predictions(
      loaded.ctx, test, net::historical_average_predictions(loaded.ctx, k, loaded.split.boundary_slot, test)));
  if (config_.plain_lstm_baseline) {
    auto cfg = loaded.model->config();
    cfg.seed = derive_seed(config_.seed, "plain_lstm");
    cfg.max_epochs = config_.digc.max_epochs;
    cfg.patience = config_.digc.patience;
    cfg.lr = config_.digc.lr;
    cfg.batch_size = config_.digc.batch_size;
    net::PlainLstm lstm(loaded.ctx.flow_count(), cfg);
    net::train_sequence_model(lstm, loaded.ctx, loaded.split);
    models["plain_lstm"] =
        mape_json(net::evaluate_predictions(loaded.ctx, test, net::predict_multistep(lstm, loaded.ctx, test)));
  }
  json j = stamp(config_, hash_);
  j["models"] = models;
  j["variant"] = net::to_string(loaded.model->config().variant);
  j["horizon"] = k;
  stage.write_json("metrics.json", j);
  stage.finish();
}

namespace {

std::string fmt(const json& v) {
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

void Pipeline::report() {
  Stage stage(config_, hash_, "report", config_.out_dir / "report");
  const std::vector<std::pair<std::string, fs::path>> sources{
      {"discovery", config_.out_dir / "discovery" / "summary.json"},
      {"classifier", config_.out_dir / "classifier" / "metrics.json"},
      {"training", config_.out_dir / "model" / "training.json"},
      {"prediction", config_.out_dir / "predictions" / "metrics.json"},
      {"evaluation", config_.out_dir / "evaluation" / "metrics.json"},
  };
  json all = stamp(config_, hash_);
  std::string md = "# Pipeline report\n\nseed: " + std::to_string(config_.seed) + "  \nconfig hash: " + hash_ + "\n";
  std::size_t found = 0;
  for (const auto& [name, path] : sources) {
    if (!fs::exists(path)) continue;
    ++found;
    const auto j = json::parse(read_file(stage.input(path, name)));
    all[name] = j;
    md += "\n## " + name + "\n\n";
    for (const auto& [key, value] : j.items()) {
      if (key == "seed" || key == "config_hash" || value.is_array() || value.is_object()) continue;
      md += "- " + key + ": " + fmt(value) + "\n";
    }
    if (name == "evaluation" && j.contains("models")) {
      md += "\n| model | MAPE % | per step |\n|---|---|---|\n";
      for (const auto& [model, r] : j.at("models").items()) {
        std::string steps;
        for (const auto& s : r.at("mape_per_step")) steps += (steps.empty() ? "" : ", ") + fmt(s);
        md += "| " + model + " | " + fmt(r.at("mape_overall")) + " | " + steps + " |\n";
      }
    }
  }
  if (found == 0) {
    fail(ErrorKind::missing_artifact, "nothing to report under " + config_.out_dir.string() +
                                          " (run discover, train-classifier, train, predict or evaluate first)");
  }
  stage.write_json("summary.json", all);
  stage.write("report.md", md);
  stage.finish();
}

}  // namespace digc::pipeline
