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

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "traffic_data.hpp"

namespace digc::graph {

inline constexpr double kDefaultSnapToleranceDeg = 1e-6;

/// Undirected graph whose nodes are flows; an edge joins two flows that share
/// an endpoint.
class FlowGraph {
 public:
  FlowGraph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t node_count() const { return n_; }
  // Each undirected edge once, as (i, j) with i < j, sorted.
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  const Eigen::MatrixXd& adjacency() const { return adjacency_; }
  Eigen::VectorXd degree() const;

  // A + I and its row sums.
  Eigen::MatrixXd augmented_adjacency() const;
  Eigen::VectorXd augmented_degree() const;

  // D~^{-1/2} (A + I) D~^{-1/2}: the graph-convolution propagation matrix.
  Eigen::MatrixXd propagation_matrix() const;
  // I - D^{-1/2} A D^{-1/2} without self-loops, used for spectral clustering.
  // Isolated nodes get D^{-1/2} = 0, so their row is the identity row.
  Eigen::MatrixXd clustering_laplacian() const;

  // Connected-component label per node, numbered in order of first node.
  std::vector<int> components() const;

 private:
  std::size_t n_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  Eigen::MatrixXd adjacency_;
};

FlowGraph build_flow_graph(const data::RoadGeometry& geometry,
                           double snap_tolerance_deg = kDefaultSnapToleranceDeg);

enum class LaplacianForm { propagation, clustering };
Eigen::MatrixXd normalized_laplacian(const FlowGraph& graph, LaplacianForm form);

struct SpectralEmbedding {
  Eigen::MatrixXd vectors;     // N x k, unit-norm columns
  Eigen::VectorXd eigenvalues; // k smallest, ascending
};

// First k eigenpairs of the clustering Laplacian. Eigenvector signs are fixed
// so that the largest-magnitude entry of each column is positive.
SpectralEmbedding spectral_embed(const FlowGraph& graph, std::size_t k);

struct ClusterAssignment {
  std::vector<int> labels;
  std::size_t k = 0;
  Eigen::MatrixXd embedding;
  // Within-cluster sum of squares after each Lloyd iteration.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

struct KMeansOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;
};

// k-means++ seeding followed by Lloyd iterations. Empty clusters are reseeded
// from the point farthest from its current centroid.
ClusterAssignment kmeans_cluster(const Eigen::MatrixXd& points, std::size_t k,
                                 std::uint64_t seed, const KMeansOptions& options = {});

// Spectral embedding followed by k-means on its rows.
ClusterAssignment spectral_clusters(const FlowGraph& graph, std::size_t k, std::uint64_t seed);

// Distance in meters between two points on an equirectangular projection
// centered at reference_lat.
double flow_distance(data::LatLng a, data::LatLng b, double reference_lat);

std::string format_edges(const FlowGraph& graph);
FlowGraph parse_edges(std::string_view text, std::size_t n_flows);
std::string format_clusters(const std::vector<int>& labels);
std::vector<int> parse_clusters(std::string_view text, std::size_t n_flows);

}  // namespace digc::graph
