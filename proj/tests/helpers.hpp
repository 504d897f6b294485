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
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "knitgrid/circuit.hpp"
#include "knitgrid/ir.hpp"
#include "knitgrid/optimizer.hpp"

namespace testutil {

using namespace knitgrid;

inline void add_random_1q(Circuit& c, int q, std::mt19937_64& rng) {
  static constexpr GateKind kinds[] = {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z, GateKind::S,
                                       GateKind::SDG, GateKind::RX, GateKind::RY, GateKind::RZ};
  const GateKind k = kinds[std::uniform_int_distribution<int>(0, 8)(rng)];
  if (is_parametric(k))
    c.add(k, {q}, std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng));
  else
    c.add(k, {q});
}

inline void add_random_2q(Circuit& c, int a, int b, std::mt19937_64& rng) {
  if (std::bernoulli_distribution(0.5)(rng))
    c.cz(a, b);
  else
    c.rzz(a, b, std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng));
}

inline std::string random_observable(int n, std::mt19937_64& rng) {
  std::string s;
  for (int q = 0; q < n; ++q) s.push_back("IXYZ"[std::uniform_int_distribution<int>(0, 3)(rng)]);
  if (s.find_first_not_of('I') == std::string::npos) s[0] = 'Z';
  return s;
}

/// Random circuit over the full gate set (no layout structure).
inline Circuit random_circuit(int n, int num_ops, std::mt19937_64& rng) {
  Circuit c(n);
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int i = 0; i < num_ops; ++i) {
    if (n < 2 || std::bernoulli_distribution(0.55)(rng)) {
      add_random_1q(c, pick(rng), rng);
    } else {
      int a = pick(rng), b = pick(rng);
      while (b == a) b = pick(rng);
      add_random_2q(c, a, b, rng);
    }
  }
  c.set_observable(random_observable(n, rng));
  return c;
}

/// A circuit together with an explicit decomposition into leaves.
struct Scenario {
  Circuit circuit;
  Candidate candidate;
};

/// Random blocked circuit whose qubits live in 2-3 blocks, optionally with one
/// qubit migrating to another block mid-circuit (a wire cut). Retries until
/// the decomposition has between min_cuts and max_cuts cuts.
inline Scenario random_scenario(std::mt19937_64& rng, int min_qubits = 2, int max_qubits = 8,
                                std::size_t min_cuts = 1, std::size_t max_cuts = 3) {
  while (true) {
    const int n = std::uniform_int_distribution<int>(min_qubits, max_qubits)(rng);
    const int blocks = n < 4 ? 2 : std::uniform_int_distribution<int>(2, 3)(rng);
    std::vector<int> block(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) block[static_cast<std::size_t>(q)] = q < blocks ? q : std::uniform_int_distribution<int>(0, blocks - 1)(rng);
    std::shuffle(block.begin(), block.end(), rng);

    const int num_ops = std::uniform_int_distribution<int>(2 * n, 4 * n)(rng);
    int mover = -1, move_at = -1, move_to = -1;
    if (std::bernoulli_distribution(0.5)(rng)) {
      mover = std::uniform_int_distribution<int>(0, n - 1)(rng);
      move_at = std::uniform_int_distribution<int>(1, num_ops - 1)(rng);
      move_to = (block[static_cast<std::size_t>(mover)] + 1) % blocks;
    }
    Circuit c(n);
    std::map<std::pair<std::size_t, int>, int> leaf_of;  // (op, qubit) -> leaf
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int i = 0; i < num_ops; ++i) {
      if (i == move_at) block[static_cast<std::size_t>(mover)] = move_to;
      if (std::bernoulli_distribution(0.45)(rng)) {
        const int q = pick(rng);
        add_random_1q(c, q, rng);
        leaf_of[{c.ops().size() - 1, q}] = block[static_cast<std::size_t>(q)];
        continue;
      }
      const int a = pick(rng);
      std::vector<int> mates;
      for (int q = 0; q < n; ++q)
        if (q != a && (block[static_cast<std::size_t>(q)] == block[static_cast<std::size_t>(a)] ||
                       std::bernoulli_distribution(0.08)(rng)))
          mates.push_back(q);
      if (mates.empty()) {
        add_random_1q(c, a, rng);
        leaf_of[{c.ops().size() - 1, a}] = block[static_cast<std::size_t>(a)];
        continue;
      }
      const int b = mates[std::uniform_int_distribution<std::size_t>(0, mates.size() - 1)(rng)];
      add_random_2q(c, a, b, rng);
      leaf_of[{c.ops().size() - 1, a}] = block[static_cast<std::size_t>(a)];
      leaf_of[{c.ops().size() - 1, b}] = block[static_cast<std::size_t>(b)];
    }
    c.set_observable(random_observable(n, rng));

    IrGraph ir = build_ir(c);
    std::vector<std::vector<std::size_t>> leaves(static_cast<std::size_t>(blocks));
    for (const auto& [key, leaf] : leaf_of)
      leaves[static_cast<std::size_t>(leaf)].push_back(ir.group_of(ir.vertex_index({key.first, key.second})));
    if (std::any_of(leaves.begin(), leaves.end(), [](const auto& l) { return l.empty(); })) continue;
    Candidate cand = make_candidate(c, std::move(ir), leaves);
    if (cand.num_cuts() < min_cuts || cand.num_cuts() > max_cuts) continue;
    return {std::move(c), std::move(cand)};
  }
}

/// Candidate over the uncompressed IR of `c` with vertex (op, q) placed on
/// leaf `leaf(op, q)`; leaves are 0..num_leaves-1.
template <class LeafFn>
Candidate assign_leaves(const Circuit& c, std::size_t num_leaves, LeafFn leaf) {
  IrGraph ir = build_ir(c);
  std::vector<std::vector<std::size_t>> leaves(num_leaves);
  for (std::size_t v = 0; v < ir.vertices().size(); ++v) {
    const VertexId id = ir.vertices()[v];
    leaves[static_cast<std::size_t>(leaf(id.op, id.qubit))].push_back(ir.group_of(v));
  }
  return make_candidate(c, std::move(ir), leaves);
}

/// Dense block on qubits [first, first + size): CZ ladder with rotations.
inline void dense_block(Circuit& c, int first, int size, int rounds, double angle) {
  for (int r = 0; r < rounds; ++r)
    for (int q = first; q + 1 < first + size; ++q) {
      c.ry(q, angle * (r + 1));
      c.cz(q, q + 1);
      c.rx(q + 1, angle / (r + 1));
    }
}

/// k + 1 two-qubit clusters in a line, neighbours joined by one CZ.
inline Circuit cluster_chain(int k) {
  Circuit c(2 * (k + 1));
  for (int b = 0; b <= k; ++b) dense_block(c, 2 * b, 2, 3, 0.3 + 0.1 * b);
  for (int b = 0; b < k; ++b) c.cz(2 * b + 1, 2 * b + 2);
  for (int b = 0; b <= k; ++b) dense_block(c, 2 * b, 2, 3, 0.7 - 0.05 * b);
  c.set_observable(std::string(static_cast<std::size_t>(2 * (k + 1)), 'Z'));
  return c;
}

/// Two dense 3-qubit blocks joined by a single CZ (qubits 2 and 3).
inline Circuit two_clusters() {
  Circuit c(6);
  dense_block(c, 0, 3, 3, 0.4);
  dense_block(c, 3, 3, 3, 0.9);
  c.cz(2, 3);
  dense_block(c, 0, 3, 2, 1.3);
  dense_block(c, 3, 3, 2, 0.2);
  c.set_observable("ZIZZIZ");
  return c;
}

}  // namespace testutil
