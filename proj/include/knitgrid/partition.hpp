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
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

#include "knitgrid/error.hpp"
#include "knitgrid/rng.hpp"

namespace knitgrid {

/// Undirected weighted graph for min-cut partitioning. Parallel edges are
/// allowed and simply add up.
struct PartitionGraph {
  std::vector<double> node_weight;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;

  explicit PartitionGraph(std::vector<double> weights)
      : node_weight(std::move(weights)), adj(node_weight.size()) {}

  std::size_t size() const { return node_weight.size(); }

  void add_edge(std::size_t u, std::size_t v, double w) {
    if (u == v) return;
    adj[u].emplace_back(v, w);
    adj[v].emplace_back(u, w);
  }

  double cut_weight(const std::vector<int>& part) const {
    double cut = 0.0;
    for (std::size_t u = 0; u < size(); ++u)
      for (auto [v, w] : adj[u])
        if (u < v && part[u] != part[v]) cut += w;
    return cut;
  }
};

struct BisectionOptions {
  /// Target share of the total node weight in part 0.
  double target_fraction = 0.5;
  /// Allowed relative overshoot of each part over its target.
  double imbalance = 0.03;
  std::uint64_t seed = 0;
  int starts = 4;
  int max_passes = 16;
};

namespace detail {

class FmBisector {
 public:
  FmBisector(const PartitionGraph& g, const BisectionOptions& opt) : g_(g) {
    const double total = std::accumulate(g.node_weight.begin(), g.node_weight.end(), 0.0);
    cap_[0] = (1.0 + opt.imbalance) * opt.target_fraction * total;
    cap_[1] = (1.0 + opt.imbalance) * (1.0 - opt.target_fraction) * total;
    imbalance_ = opt.imbalance;
    for (double w : g.node_weight) slack_ = std::max(slack_, w);
  }

  double violation(const std::array<double, 2>& w) const {
    return std::max(0.0, w[0] - cap_[0]) + std::max(0.0, w[1] - cap_[1]);
  }

  std::vector<int> initial(std::mt19937_64& rng) const {
    const std::size_t n = g_.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> part(n, 1);
    double w0 = 0.0;
    for (std::size_t v : order) {
      if (w0 + g_.node_weight[v] <= cap_[0] + 1e-12) {
        part[v] = 0;
        w0 += g_.node_weight[v];
      }
    }
    ensure_nonempty(part);
    return part;
  }

  /// Greedy graph growing: part 0 grows from a random node, always taking
  /// the frontier node most connected to it, until it reaches its target.
  std::vector<int> grown(std::mt19937_64& rng, double target) const {
    const std::size_t n = g_.size();
    std::vector<int> part(n, 1);
    std::vector<double> conn(n, 0.0);
    std::vector<bool> frontier(n, false);
    double w0 = 0.0;
    std::uniform_int_distribution<std::size_t> any(0, n - 1);
    while (w0 < target) {
      std::size_t pick = n;
      for (std::size_t v = 0; v < n; ++v)
        if (frontier[v] && part[v] == 1 && (pick == n || conn[v] > conn[pick])) pick = v;
      if (pick == n) {  // new component
        std::size_t start = any(rng);
        for (std::size_t k = 0; k < n && part[start] == 0; ++k) start = (start + 1) % n;
        if (part[start] == 0) break;
        pick = start;
      }
      if (w0 + g_.node_weight[pick] > cap_[0] + 1e-12 && w0 > 0.0) break;
      part[pick] = 0;
      w0 += g_.node_weight[pick];
      for (auto [v, wt] : g_.adj[pick]) {
        conn[v] += wt;
        frontier[v] = true;
      }
    }
    ensure_nonempty(part);
    return part;
  }

  double target0() const { return cap_[0] / (1.0 + imbalance_); }

  void ensure_nonempty(std::vector<int>& part) const {
    for (int side : {0, 1}) {
      if (std::find(part.begin(), part.end(), side) != part.end()) continue;
      std::size_t lightest = 0;
      for (std::size_t v = 1; v < part.size(); ++v)
        if (g_.node_weight[v] < g_.node_weight[lightest]) lightest = v;
      part[lightest] = side;
    }
  }

  /// One FM pass; returns true if the partition improved.
  bool pass(std::vector<int>& part) const {
    const std::size_t n = g_.size();
    std::array<double, 2> w{0.0, 0.0};
    std::array<std::size_t, 2> count{0, 0};
    for (std::size_t v = 0; v < n; ++v) {
      w[static_cast<std::size_t>(part[v])] += g_.node_weight[v];
      ++count[static_cast<std::size_t>(part[v])];
    }
    std::vector<double> gain(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
      for (auto [v, wt] : g_.adj[u]) gain[u] += part[u] != part[v] ? wt : -wt;

    std::vector<bool> locked(n, false);
    std::vector<std::size_t> moves;
    double cum = 0.0;
    double best_gain = 0.0;
    double best_violation = violation(w);
    const double start_violation = best_violation;
    std::size_t best_len = 0;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      double pick_gain = -std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < n; ++v) {
        if (locked[v]) continue;
        const auto from = static_cast<std::size_t>(part[v]);
        if (count[from] <= 1) continue;
        std::array<double, 2> nw = w;
        nw[from] -= g_.node_weight[v];
        nw[1 - from] += g_.node_weight[v];
        // Within a pass one node of overshoot is tolerated; only the best
        // (least violating) prefix is kept.
        if (violation(nw) > std::max(violation(w), slack_) + 1e-12) continue;
        if (gain[v] > pick_gain + 1e-12) {
          pick = v;
          pick_gain = gain[v];
        }
      }
      if (pick == n) break;
      const auto from = static_cast<std::size_t>(part[pick]);
      part[pick] = 1 - part[pick];
      locked[pick] = true;
      w[from] -= g_.node_weight[pick];
      w[1 - from] += g_.node_weight[pick];
      --count[from];
      ++count[1 - from];
      cum += pick_gain;
      gain[pick] = -gain[pick];
      for (auto [v, wt] : g_.adj[pick]) gain[v] += part[v] == part[pick] ? -2 * wt : 2 * wt;
      moves.push_back(pick);
      const double viol = violation(w);
      if (viol < best_violation - 1e-12 ||
          (viol <= best_violation + 1e-12 && cum > best_gain + 1e-12)) {
        best_violation = viol;
        best_gain = cum;
        best_len = moves.size();
      }
    }
    for (std::size_t i = moves.size(); i > best_len; --i) part[moves[i - 1]] ^= 1;
    return best_len > 0 && (best_gain > 1e-12 || best_violation < start_violation - 1e-12);
  }

 private:
  const PartitionGraph& g_;
  std::array<double, 2> cap_{};
  double imbalance_ = 0.0;
  double slack_ = 0.0;
};

/// Heavy-edge matching. Returns the coarse graph and the coarse node of every
/// fine node; merged nodes stay below `max_weight`.
inline std::pair<PartitionGraph, std::vector<std::size_t>> coarsen(const PartitionGraph& g, double max_weight,
                                                                    std::mt19937_64& rng) {
  const std::size_t n = g.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> mate(n, kNone);
  std::vector<double> w_to(n, 0.0);
  for (std::size_t u : order) {
    if (mate[u] != kNone) continue;
    for (auto [v, w] : g.adj[u]) w_to[v] += w;
    std::size_t best = kNone;
    for (auto [v, w] : g.adj[u]) {
      if (mate[v] != kNone || v == u || g.node_weight[u] + g.node_weight[v] > max_weight) continue;
      if (best == kNone || w_to[v] > w_to[best]) best = v;
    }
    for (auto [v, w] : g.adj[u]) w_to[v] = 0.0;
    mate[u] = best == kNone ? u : best;
    if (best != kNone) mate[best] = u;
  }
  std::vector<std::size_t> coarse(n, kNone);
  std::vector<double> weights;
  for (std::size_t u = 0; u < n; ++u) {
    if (coarse[u] != kNone) continue;
    coarse[u] = coarse[mate[u]] = weights.size();
    weights.push_back(g.node_weight[u] + (mate[u] != u ? g.node_weight[mate[u]] : 0.0));
  }
  PartitionGraph cg(std::move(weights));
  for (std::size_t u = 0; u < n; ++u)
    for (auto [v, w] : g.adj[u])
      if (u < v && coarse[u] != coarse[v]) cg.add_edge(coarse[u], coarse[v], w);
  return {std::move(cg), std::move(coarse)};
}

inline void refine(const FmBisector& fm, std::vector<int>& part, int max_passes) {
  for (int p = 0; p < max_passes && fm.pass(part); ++p) {
  }
}

/// One multilevel V-cycle: coarsen, partition the coarsest graph from several
/// starts, then project back refining with FM at every level.
inline std::vector<int> multilevel_bisect(const PartitionGraph& g, const BisectionOptions& opt,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double total = std::accumulate(g.node_weight.begin(), g.node_weight.end(), 0.0);
  const double max_weight = std::max(total / 24.0, *std::max_element(g.node_weight.begin(), g.node_weight.end()));
  std::deque<PartitionGraph> graphs;
  std::vector<std::vector<std::size_t>> maps;
  const PartitionGraph* cur = &g;
  while (cur->size() > 32) {
    auto [cg, map] = coarsen(*cur, max_weight, rng);
    if (cg.size() * 10 > cur->size() * 9) break;
    graphs.push_back(std::move(cg));
    maps.push_back(std::move(map));
    cur = &graphs.back();
  }

  FmBisector coarse_fm(*cur, opt);
  std::vector<int> part;
  double best_cut = 0.0, best_viol = 0.0;
  for (int s = 0; s < 8; ++s) {
    std::vector<int> cand = s % 2 == 0 ? coarse_fm.grown(rng, coarse_fm.target0()) : coarse_fm.initial(rng);
    refine(coarse_fm, cand, opt.max_passes);
    std::array<double, 2> w{0.0, 0.0};
    for (std::size_t v = 0; v < cur->size(); ++v) w[static_cast<std::size_t>(cand[v])] += cur->node_weight[v];
    const double viol = coarse_fm.violation(w), cut = cur->cut_weight(cand);
    if (part.empty() || viol < best_viol - 1e-12 || (viol <= best_viol + 1e-12 && cut < best_cut - 1e-12)) {
      part = std::move(cand);
      best_cut = cut;
      best_viol = viol;
    }
  }
  for (std::size_t level = maps.size(); level-- > 0;) {
    const PartitionGraph& fine = level == 0 ? g : graphs[level - 1];
    std::vector<int> projected(fine.size());
    for (std::size_t v = 0; v < fine.size(); ++v) projected[v] = part[maps[level][v]];
    part = std::move(projected);
    refine(FmBisector(fine, opt), part, opt.max_passes);
  }
  return part;
}

}  // namespace detail

/// Multilevel min-cut bisection (heavy-edge coarsening, greedy growing plus
/// random starts, Fiduccia-Mattheyses refinement) with a balance tolerance.
/// Returns side 0/1 per node; both sides are non-empty whenever the graph has
/// two or more nodes.
inline std::vector<int> bisect(const PartitionGraph& g, const BisectionOptions& opt = {}) {
  if (g.size() < 2) throw ValidationError("bisect: need at least two nodes");
  detail::FmBisector fm(g, opt);
  std::vector<int> best;
  double best_cut = 0.0, best_viol = 0.0;
  for (int s = 0; s < std::max(1, opt.starts); ++s) {
    std::vector<int> part =
        detail::multilevel_bisect(g, opt, derive_seed(opt.seed, {static_cast<std::uint64_t>(s)}));
    fm.ensure_nonempty(part);
    std::array<double, 2> w{0.0, 0.0};
    for (std::size_t v = 0; v < g.size(); ++v) w[static_cast<std::size_t>(part[v])] += g.node_weight[v];
    const double viol = fm.violation(w);
    const double cut = g.cut_weight(part);
    if (best.empty() || viol < best_viol - 1e-12 ||
        (viol <= best_viol + 1e-12 && cut < best_cut - 1e-12)) {
      best = std::move(part);
      best_cut = cut;
      best_viol = viol;
    }
  }
  return best;
}

/// k-way partition by recursive bisection. Returns part ids 0..k'-1 with
/// k' = min(k, number of nodes); every part is non-empty.
inline std::vector<int> partition(const PartitionGraph& g, int num_parts, double imbalance,
                                  std::uint64_t seed) {
  if (num_parts < 2) throw ValidationError("partition: num_parts must be >= 2");
  std::vector<int> result(g.size(), 0);
  int next_id = 0;
  // (node subset, parts wanted, seed path)
  auto recurse = [&](auto&& self, const std::vector<std::size_t>& nodes, int parts,
                     std::uint64_t sub_seed) -> void {
    if (parts <= 1 || nodes.size() <= 1) {
      const int id = next_id++;
      for (std::size_t v : nodes) result[v] = id;
      return;
    }
    parts = std::min<int>(parts, static_cast<int>(nodes.size()));
    std::vector<std::size_t> local(g.size(), g.size());
    std::vector<double> weights;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      local[nodes[i]] = i;
      weights.push_back(g.node_weight[nodes[i]]);
    }
    PartitionGraph sub(std::move(weights));
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (auto [v, w] : g.adj[nodes[i]])
        if (local[v] < g.size() && i < local[v]) sub.add_edge(i, local[v], w);
    const int left_parts = parts / 2;
    BisectionOptions opt;
    opt.target_fraction = static_cast<double>(left_parts) / parts;
    opt.imbalance = imbalance;
    opt.seed = sub_seed;
    const std::vector<int> side = bisect(sub, opt);
    std::vector<std::size_t> left, right;
    for (std::size_t i = 0; i < nodes.size(); ++i) (side[i] == 0 ? left : right).push_back(nodes[i]);
    self(self, left, left_parts, derive_seed(sub_seed, {1}));
    self(self, right, parts - left_parts, derive_seed(sub_seed, {2}));
  };
  std::vector<std::size_t> all(g.size());
  std::iota(all.begin(), all.end(), 0);
  recurse(recurse, all, num_parts, seed);
  return result;
}

}  // namespace knitgrid
