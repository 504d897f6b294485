// Copyright 2026 The knitgrid Authors
//
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
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"

namespace knitgrid {

enum class BenchFamily { Vqe, Qml, Qaoa1, Qaoa2 };

inline std::string_view bench_family_name(BenchFamily f) {
  switch (f) {
    case BenchFamily::Vqe: return "vqe";
    case BenchFamily::Qml: return "qml";
    case BenchFamily::Qaoa1: return "qaoa1";
    case BenchFamily::Qaoa2: return "qaoa2";
  }
  return "?";
}

inline std::optional<BenchFamily> bench_family_from_name(std::string_view s) {
  for (BenchFamily f : {BenchFamily::Vqe, BenchFamily::Qml, BenchFamily::Qaoa1, BenchFamily::Qaoa2})
    if (bench_family_name(f) == s) return f;
  return std::nullopt;
}

struct BenchOptions {
  int qubits = 8;
  std::uint64_t seed = 0;
  /// Ansatz repetitions (entangling layers / QAOA rounds).
  int layers = 1;
  /// QAOA graphs: nodes per cluster (the last clusters absorb any remainder).
  int cluster_size = 5;
  double p_intra = 0.7;
  /// qaoa1: edge probability between nodes of adjacent clusters.
  double p_inter = 0.3;
  /// qaoa2: edges between each pair of adjacent clusters.
  int inter_edges = 1;
};

/// Cluster id of every node; sizes differ by at most one.
inline std::vector<int> cluster_labels(int n, int cluster_size) {
  const int k = std::max(1, n / std::max(1, cluster_size));
  std::vector<int> label(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) label[static_cast<std::size_t>(i)] = static_cast<int>(static_cast<long>(i) * k / n);
  return label;
}

namespace detail {

inline Circuit bench_header(BenchFamily f, const BenchOptions& o) {
  if (o.qubits < 2) throw ValidationError("benchmark circuits need at least 2 qubits");
  if (o.layers < 1) throw ValidationError("layers must be >= 1");
  Circuit c(o.qubits);
  c.add_meta("family", std::string(bench_family_name(f)));
  c.add_meta("seed", std::to_string(o.seed));
  c.add_meta("layers", std::to_string(o.layers));
  c.set_observable(std::string(static_cast<std::size_t>(o.qubits), 'Z'));
  return c;
}

inline Circuit qaoa(BenchFamily f, const BenchOptions& o,
                    const std::vector<std::pair<int, int>>& edges, std::mt19937_64& rng) {
  Circuit c = bench_header(f, o);
  c.add_meta("cluster_size", std::to_string(o.cluster_size));
  c.add_meta("edges", std::to_string(edges.size()));
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  for (int q = 0; q < o.qubits; ++q) c.h(q);
  for (int l = 0; l < o.layers; ++l) {
    const double gamma = angle(rng), beta = angle(rng);
    for (const auto& [a, b] : edges) c.rzz(a, b, gamma);
    for (int q = 0; q < o.qubits; ++q) c.rx(q, beta);
  }
  return c;
}

}  // namespace detail

/// RY/RZ rotations with a linear CZ chain per layer, closing rotation layer.
inline Circuit make_vqe(const BenchOptions& o) {
  Circuit c = detail::bench_header(BenchFamily::Vqe, o);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> angle(0.0, 2 * std::numbers::pi);
  auto rotations = [&] {
    for (int q = 0; q < o.qubits; ++q) c.ry(q, angle(rng));
    for (int q = 0; q < o.qubits; ++q) c.rz(q, angle(rng));
  };
  for (int l = 0; l < o.layers; ++l) {
    rotations();
    for (int q = 0; q + 1 < o.qubits; ++q) c.cz(q, q + 1);
  }
  rotations();
  return c;
}

/// ZZ feature map with pairwise entanglement: H, RZ(x_i), then RZZ on
/// neighbouring pairs (even pairs first, then odd).
inline Circuit make_qml(const BenchOptions& o) {
  Circuit c = detail::bench_header(BenchFamily::Qml, o);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> feature(0.0, 2 * std::numbers::pi);
  std::vector<double> x(static_cast<std::size_t>(o.qubits));
  for (double& v : x) v = feature(rng);
  for (int l = 0; l < o.layers; ++l) {
    for (int q = 0; q < o.qubits; ++q) c.h(q);
    for (int q = 0; q < o.qubits; ++q) c.rz(q, 2.0 * x[static_cast<std::size_t>(q)]);
    for (int start : {0, 1})
      for (int q = start; q + 1 < o.qubits; q += 2) {
        const double phi = 2.0 * (std::numbers::pi - x[static_cast<std::size_t>(q)]) *
                           (std::numbers::pi - x[static_cast<std::size_t>(q + 1)]);
        c.rzz(q, q + 1, phi);
      }
  }
  return c;
}

/// Clustered random graph: p_intra inside clusters, p_inter between nodes of
/// adjacent clusters.
inline Circuit make_qaoa1(const BenchOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::bernoulli_distribution intra(o.p_intra), inter(o.p_inter);
  const auto label = cluster_labels(o.qubits, o.cluster_size);
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < o.qubits; ++a)
    for (int b = a + 1; b < o.qubits; ++b) {
      const int la = label[static_cast<std::size_t>(a)], lb = label[static_cast<std::size_t>(b)];
      if (la == lb ? intra(rng) : (lb == la + 1 && inter(rng))) edges.emplace_back(a, b);
    }
  return detail::qaoa(BenchFamily::Qaoa1, o, edges, rng);
}

/// Clustered random graph: p_intra inside clusters and exactly inter_edges
/// edges between each pair of adjacent clusters.
inline Circuit make_qaoa2(const BenchOptions& o) {
  if (o.inter_edges < 0) throw ValidationError("inter_edges must be >= 0");
  std::mt19937_64 rng(o.seed);
  std::bernoulli_distribution intra(o.p_intra);
  const auto label = cluster_labels(o.qubits, o.cluster_size);
  const int k = label.back() + 1;
  std::vector<std::pair<int, int>> edges;
  for (int a = 0; a < o.qubits; ++a)
    for (int b = a + 1; b < o.qubits; ++b)
      if (label[static_cast<std::size_t>(a)] == label[static_cast<std::size_t>(b)] && intra(rng))
        edges.emplace_back(a, b);
  for (int cl = 0; cl + 1 < k; ++cl) {
    std::vector<int> left, right;
    for (int q = 0; q < o.qubits; ++q) {
      if (label[static_cast<std::size_t>(q)] == cl) left.push_back(q);
      if (label[static_cast<std::size_t>(q)] == cl + 1) right.push_back(q);
    }
    const auto pairs = left.size() * right.size();
    if (static_cast<std::size_t>(o.inter_edges) > pairs)
      throw ValidationError("inter_edges exceeds the node pairs between clusters");
    std::set<std::pair<int, int>> chosen;
    std::uniform_int_distribution<std::size_t> pick_l(0, left.size() - 1), pick_r(0, right.size() - 1);
    while (chosen.size() < static_cast<std::size_t>(o.inter_edges))
      chosen.emplace(left[pick_l(rng)], right[pick_r(rng)]);
    edges.insert(edges.end(), chosen.begin(), chosen.end());
  }
  return detail::qaoa(BenchFamily::Qaoa2, o, edges, rng);
}

inline Circuit make_benchmark(BenchFamily f, const BenchOptions& o) {
  switch (f) {
    case BenchFamily::Vqe: return make_vqe(o);
    case BenchFamily::Qml: return make_qml(o);
    case BenchFamily::Qaoa1: return make_qaoa1(o);
    case BenchFamily::Qaoa2: return make_qaoa2(o);
  }
  throw ValidationError("unknown benchmark family");
}

}  // namespace knitgrid
