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
#include "road_graph.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "geo.hpp"

namespace digc::graph {

FlowGraph::FlowGraph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : n_(n), edges_(std::move(edges)) {
  if (n_ == 0) fail(ErrorKind::invalid_argument, "flow graph needs at least one flow");
  for (auto& e : edges_) {
    require(e.first < n_ && e.second < n_, "edge endpoint out of range");
    require(e.first != e.second, "self-edges are not allowed");
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  adjacency_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (const auto& [i, j] : edges_) {
    adjacency_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    adjacency_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
}

Eigen::VectorXd FlowGraph::degree() const { return adjacency_.rowwise().sum(); }

Eigen::MatrixXd FlowGraph::augmented_adjacency() const {
  return adjacency_ + Eigen::MatrixXd::Identity(adjacency_.rows(), adjacency_.cols());
}

Eigen::VectorXd FlowGraph::augmented_degree() const {
  return augmented_adjacency().rowwise().sum();
}

Eigen::MatrixXd FlowGraph::propagation_matrix() const {
  const Eigen::VectorXd inv_sqrt = augmented_degree().array().rsqrt();
  return inv_sqrt.asDiagonal() * augmented_adjacency() * inv_sqrt.asDiagonal();
}

Eigen::MatrixXd FlowGraph::clustering_laplacian() const {
  const Eigen::VectorXd d = degree();
  Eigen::VectorXd inv_sqrt(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) inv_sqrt(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return Eigen::MatrixXd::Identity(adjacency_.rows(), adjacency_.cols()) -
         inv_sqrt.asDiagonal() * adjacency_ * inv_sqrt.asDiagonal();
}

std::vector<int> FlowGraph::components() const {
  std::vector<std::vector<std::size_t>> nbrs(n_);
  for (const auto& [i, j] : edges_) {
    nbrs[i].push_back(j);
    nbrs[j].push_back(i);
  }
  std::vector<int> label(n_, -1);
  int next = 0;
  for (std::size_t s = 0; s < n_; ++s) {
    if (label[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : nbrs[u]) {
        if (label[v] < 0) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

FlowGraph build_flow_graph(const data::RoadGeometry& geometry, double tol) {
  const std::size_t n = geometry.size();
  if (n == 0) fail(ErrorKind::invalid_argument, "cannot build a graph from zero flows");
  auto same = [tol](data::LatLng a, data::LatLng b) {
    return std::abs(a.lat - b.lat) <= tol && std::abs(a.lng - b.lng) <= tol;
  };
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = geometry.flows[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& b = geometry.flows[j];
      if (same(a.start, b.start) || same(a.start, b.end) || same(a.end, b.start) ||
          same(a.end, b.end)) {
        edges.emplace_back(i, j);
      }
    }
  }
  return FlowGraph(n, std::move(edges));
}

Eigen::MatrixXd normalized_laplacian(const FlowGraph& graph, LaplacianForm form) {
  return form == LaplacianForm::propagation ? graph.propagation_matrix()
                                            : graph.clustering_laplacian();
}

SpectralEmbedding spectral_embed(const FlowGraph& graph, std::size_t k) {
  const std::size_t n = graph.node_count();
  if (k < 1 || k > n) {
    fail(ErrorKind::invalid_argument,
         "spectral_embed needs 1 <= k <= N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(graph.clustering_laplacian());
  if (solver.info() != Eigen::Success) {
    // Eigen's tridiagonal QR gives up after 30*N sweeps.
    fail(ErrorKind::numeric, "symmetric eigensolver did not converge within " +
                                 std::to_string(30 * n) + " iterations");
  }
  SpectralEmbedding out;
  const auto kk = static_cast<Eigen::Index>(k);
  out.eigenvalues = solver.eigenvalues().head(kk);
  out.vectors = solver.eigenvectors().leftCols(kk);
  for (Eigen::Index c = 0; c < kk; ++c) {
    auto col = out.vectors.col(c);
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col(arg) < 0.0) col = -col;
  }
  return out;
}

ClusterAssignment kmeans_cluster(const Eigen::MatrixXd& points, std::size_t k,
                                 std::uint64_t seed, const KMeansOptions& options) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k < 1 || k > n) {
    fail(ErrorKind::invalid_argument,
         "k-means needs 1 <= k <= N (k=" + std::to_string(k) + ", N=" + std::to_string(n) + ")");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  const auto dims = points.cols();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // k-means++ seeding.
  Eigen::MatrixXd centroids(kk, dims);
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centroids.row(0) = points.row(static_cast<Eigen::Index>(first(rng)));
  Eigen::VectorXd d2(static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 1; c < kk; ++c) {
    for (Eigen::Index i = 0; i < d2.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < c; ++j) {
        best = std::min(best, (points.row(i) - centroids.row(j)).squaredNorm());
      }
      d2(i) = best;
    }
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double r = unit(rng) * total;
      for (pick = 0; pick + 1 < d2.size(); ++pick) {
        r -= d2(pick);
        if (r < 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(first(rng));
    }
    centroids.row(c) = points.row(pick);
  }

  ClusterAssignment out;
  out.k = k;
  out.embedding = points;
  out.labels.assign(n, 0);
  Eigen::VectorXd dist(static_cast<Eigen::Index>(n));
  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (Eigen::Index c = 0; c < kk; ++c) {
        const double d = (points.row(i) - centroids.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = static_cast<int>(c);
        }
      }
      out.labels[static_cast<std::size_t>(i)] = arg;
      dist(i) = best;
    }
    // Repair empty clusters before the update step.
    std::vector<std::size_t> counts(k, 0);
    for (int l : out.labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      Eigen::Index far = 0;
      dist.maxCoeff(&far);
      --counts[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(far)])];
      out.labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
      counts[c] = 1;
      dist(far) = 0.0;
    }

    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(kk, dims);
    for (std::size_t i = 0; i < n; ++i) {
      next.row(out.labels[i]) += points.row(static_cast<Eigen::Index>(i));
    }
    for (Eigen::Index c = 0; c < kk; ++c) next.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      inertia += (points.row(static_cast<Eigen::Index>(i)) - next.row(out.labels[i])).squaredNorm();
    }
    out.inertia_history.push_back(inertia);
    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(next);
    out.iterations = iter + 1;
    if (shift <= options.tolerance) break;
  }
  return out;
}

ClusterAssignment spectral_clusters(const FlowGraph& graph, std::size_t k, std::uint64_t seed) {
  const auto emb = spectral_embed(graph, k);
  return kmeans_cluster(emb.vectors, k, seed);
}

double flow_distance(data::LatLng a, data::LatLng b, double reference_lat) {
  return geo::Projection{{reference_lat, 0.0}}.distance(a, b);
}

std::string format_edges(const FlowGraph& graph) {
  std::string out = "src_flow,dst_flow\n";
  for (const auto& [i, j] : graph.edges()) {
    out += std::to_string(i) + "," + std::to_string(j) + "\n";
  }
  return out;
}

FlowGraph parse_edges(std::string_view text, std::size_t n_flows) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& row : parse_csv(text, "src_flow,dst_flow", "edges.csv")) {
    if (row.fields.size() != 2) {
      fail(ErrorKind::parse, "edges.csv line " + std::to_string(row.line) + ": expected 2 fields");
    }
    const auto a = parse_int(row.fields[0], "edges.csv line " + std::to_string(row.line));
    const auto b = parse_int(row.fields[1], "edges.csv line " + std::to_string(row.line));
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n_flows ||
        static_cast<std::size_t>(b) >= n_flows || a == b) {
      fail(ErrorKind::parse, "edges.csv line " + std::to_string(row.line) + ": bad flow pair");
    }
    edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  }
  return FlowGraph(n_flows, std::move(edges));
}

std::string format_clusters(const std::vector<int>& labels) {
  std::string out = "flow_id,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  }
  return out;
}

std::vector<int> parse_clusters(std::string_view text, std::size_t n_flows) {
  const auto rows = parse_csv(text, "flow_id,label", "clusters.csv");
  std::vector<int> labels(n_flows, -1);
  for (const auto& row : rows) {
    const std::string ctx = "clusters.csv row " + std::to_string(row.line);
    const auto id = parse_int(row.fields[0], ctx);
    const auto label = parse_int(row.fields[1], ctx);
    if (id < 0 || static_cast<std::size_t>(id) >= n_flows) {
      fail(ErrorKind::parse, ctx + ": flow_id out of range");
    }
    if (label < 0) fail(ErrorKind::parse, ctx + ": negative label");
    labels[static_cast<std::size_t>(id)] = static_cast<int>(label);
  }
  for (std::size_t i = 0; i < n_flows; ++i) {
    if (labels[i] < 0) fail(ErrorKind::parse, "clusters.csv: flow " + std::to_string(i) + " unlabeled");
  }
  return labels;
}

}  // namespace digc::graph
