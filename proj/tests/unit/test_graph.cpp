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
#include <random>
#include <set>

#include "road_graph.hpp"
#include "synthetic_city.hpp"

using namespace digc;
using Eigen::MatrixXd;

namespace {

// Cyclic Jacobi rotations; eigenvalues only.
std::vector<double> jacobi_eigenvalues(MatrixXd a) {
  const auto n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

graph::FlowGraph two_cliques(std::size_t size) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t base : {std::size_t{0}, size})
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j) edges.emplace_back(base + i, base + j);
  return graph::FlowGraph(2 * size, edges);
}

// Labels equal up to renaming.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  std::set<std::pair<int, int>> seen;
  std::set<int> left, right;
  for (std::size_t i = 0; i < a.size(); ++i) seen.insert({a[i], b[i]});
  for (const auto& [x, y] : seen) {
    left.insert(x);
    right.insert(y);
  }
  return seen.size() == left.size() && seen.size() == right.size();
}

}  // namespace

TEST_CASE("two connected flows give a uniform propagation matrix") {
  graph::FlowGraph g(2, {{0, 1}});
  // A + I is all ones, every augmented degree is 2.
  const MatrixXd p = g.propagation_matrix();
  CHECK(p.isApprox(MatrixXd::Constant(2, 2, 0.5), 1e-15));
  const MatrixXd l = g.clustering_laplacian();
  CHECK(l(0, 0) == doctest::Approx(1.0));
  CHECK(l(0, 1) == doctest::Approx(-1.0));
}

TEST_CASE("isolated flow keeps an identity row") {
  graph::FlowGraph g(3, {{0, 1}});
  const MatrixXd l = g.clustering_laplacian();
  CHECK(l(2, 2) == 1.0);
  CHECK(l(2, 0) == 0.0);
  CHECK(g.propagation_matrix()(2, 2) == doctest::Approx(1.0));
}

TEST_CASE("edges are normalized and deduplicated") {
  graph::FlowGraph g(4, {{2, 1}, {1, 2}, {0, 3}});
  REQUIRE(g.edges().size() == 2);
  CHECK(g.edges()[0] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(g.edges()[1] == std::pair<std::size_t, std::size_t>{1, 2});
  const auto back = graph::parse_edges(graph::format_edges(g), 4);
  CHECK(back.edges() == g.edges());
  CHECK_THROWS_AS(graph::FlowGraph(2, {{0, 0}}), Error);
  CHECK_THROWS_AS(graph::parse_edges("src_flow,dst_flow\n0,9\n", 4), Error);
}

TEST_CASE("grid geometry connects flows that share endpoints") {
  const auto geometry = data::grid_geometry(12, 1, 300.0, 3000.0, {37.75, -122.45});
  const auto g = graph::build_flow_graph(geometry);
  for (const auto& [i, j] : g.edges()) {
    const auto& a = geometry.flows[i];
    const auto& b = geometry.flows[j];
    const bool shared = a.start == b.start || a.start == b.end || a.end == b.start || a.end == b.end;
    CHECK(shared);
  }
  const auto comps = g.components();
  CHECK(comps.size() == 12);
  CHECK(*std::max_element(comps.begin(), comps.end()) == 0);
}

TEST_CASE("laplacian spectrum matches a Jacobi oracle") {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t i = 0; i < 9; ++i)
      for (std::size_t j = i + 1; j < 9; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    graph::FlowGraph g(9, edges);
    const auto emb = graph::spectral_embed(g, 9);
    const auto oracle = jacobi_eigenvalues(g.clustering_laplacian());
    for (std::size_t i = 0; i < 9; ++i) {
      CHECK(std::abs(emb.eigenvalues(static_cast<Eigen::Index>(i)) - oracle[i]) < 1e-10);
    }
    // Eigenvalues of the normalized Laplacian lie in [0, 2].
    CHECK(emb.eigenvalues.minCoeff() > -1e-12);
    CHECK(emb.eigenvalues.maxCoeff() < 2.0 + 1e-12);
  }
}

TEST_CASE("spectral clusters of two cliques equal the components") {
  const auto g = two_cliques(5);
  const auto c = graph::spectral_clusters(g, 2, 9);
  CHECK(same_partition(c.labels, g.components()));
}

TEST_CASE("k-means separates distant blobs and inertia never rises") {
  MatrixXd pts(30, 2);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int i = 0; i < 30; ++i) {
    pts(i, 0) = (i / 10) * 10.0 + noise(rng);
    pts(i, 1) = noise(rng);
  }
  const auto c = graph::kmeans_cluster(pts, 3, 1);
  std::vector<int> truth(30);
  for (int i = 0; i < 30; ++i) truth[static_cast<std::size_t>(i)] = i / 10;
  CHECK(same_partition(c.labels, truth));
  for (std::size_t i = 1; i < c.inertia_history.size(); ++i) {
    CHECK(c.inertia_history[i] <= c.inertia_history[i - 1] + 1e-12);
  }
  CHECK(graph::kmeans_cluster(pts, 3, 1).labels == c.labels);
}

TEST_CASE("clusters file round-trips") {
  const std::vector<int> labels{0, 1, 1, 0, 2};
  CHECK(graph::parse_clusters(graph::format_clusters(labels), 5) == labels);
  CHECK_THROWS_AS(graph::parse_clusters(graph::format_clusters(labels), 4), Error);
}

TEST_CASE("flow distance is Euclidean on the local projection") {
  const data::LatLng a{37.75, -122.45};
  const data::LatLng b{37.76, -122.45};
  // One hundredth of a degree of latitude is about 1112 m.
  CHECK(graph::flow_distance(a, b, 37.75) == doctest::Approx(1111.9).epsilon(1e-3));
  CHECK(graph::flow_distance(a, a, 37.75) == 0.0);
}
