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
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "knitgrid/error.hpp"
#include "knitgrid/rng.hpp"
#include "knitgrid/tensor.hpp"

namespace knitgrid {

/// Ordered pairwise merges. Operands are SSA ids: inputs are 0..n-1 and the
/// k-th step creates id n+k.
struct ContractionPath {
  std::vector<std::pair<std::size_t, std::size_t>> steps;
  double cost = 0.0;
};

/// Largest network solved exactly by subset dynamic programming.
inline constexpr std::size_t kMaxExactPathTensors = 12;

namespace detail {

/// Replays a path over index metadata, calling merge(a, b) -> result shape.
template <typename Merge>
double replay_path(std::vector<TensorShape> live, const ContractionPath& path, Merge&& merge) {
  const std::size_t n = live.size();
  std::vector<bool> alive(n, true);
  double total = 0.0;
  for (const auto& [x, y] : path.steps) {
    if (x == y || x >= live.size() || y >= live.size() || !alive[x] || !alive[y])
      throw ValidationError("contraction path refers to a consumed or unknown tensor");
    total += merge(live[x], live[y]);
    live.push_back({merged_indices(live[x].indices, live[y].indices), std::nullopt});
    alive[x] = alive[y] = false;
    alive.push_back(true);
  }
  return total;
}

inline void check_no_hyperindices(const std::vector<TensorShape>& shapes) {
  std::map<std::string, std::pair<int, std::size_t>> seen;
  for (const auto& s : shapes)
    for (const Index& i : s.indices) {
      auto [it, fresh] = seen.emplace(i.name, std::pair<int, std::size_t>{0, i.dim});
      if (!fresh && it->second.second != i.dim)
        throw ValidationError("dimension mismatch on index '" + i.name + "'");
      if (++it->second.first > 2) throw ValidationError("hyper-index '" + i.name + "'");
    }
}

}  // namespace detail

/// Dense FLOP cost of executing `path` (sum of pair_cost over merges).
inline double path_cost(const std::vector<TensorShape>& shapes, const ContractionPath& path) {
  return detail::replay_path(shapes, path, [](const TensorShape& a, const TensorShape& b) {
    return pair_cost(a.indices, b.indices);
  });
}

/// Multiplications of `path` with structural zeros of coefficient tensors skipped.
inline double path_flops(const std::vector<TensorShape>& shapes, const ContractionPath& path) {
  return detail::replay_path(shapes, path, pair_flops);
}

/// Exact minimum-cost path by dynamic programming over all tensor subsets.
inline ContractionPath find_path_optimal(const std::vector<TensorShape>& shapes) {
  const std::size_t n = shapes.size();
  if (n == 0) throw ValidationError("find_path: empty network");
  if (n > 20) throw ValidationError("find_path_optimal: network too large");
  detail::check_no_hyperindices(shapes);
  struct Idx {
    std::uint32_t mask = 0;
    double dim = 1.0;
    bool open = false;
  };
  std::map<std::string, Idx> by_name;
  for (std::size_t t = 0; t < n; ++t)
    for (const Index& i : shapes[t].indices) {
      auto& e = by_name[i.name];
      e.mask |= 1u << t;
      e.dim = static_cast<double>(i.dim);
    }
  std::vector<Idx> idx;
  for (auto& [_, e] : by_name) {
    e.open = std::popcount(e.mask) == 1;
    idx.push_back(e);
  }
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
  auto on_boundary = [&](const Idx& e, std::uint32_t s) {
    return (e.mask & s) && (e.open || (e.mask & ~s));
  };
  std::vector<double> best(std::size_t{full} + 1, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> split(std::size_t{full} + 1, 0);
  for (std::size_t t = 0; t < n; ++t) best[1u << t] = 0.0;
  for (std::uint32_t s = 1; s <= full; ++s) {
    if (std::popcount(s) < 2) continue;
    const std::uint32_t low = s & (~s + 1);
    for (std::uint32_t a = (s - 1) & s; a; a = (a - 1) & s) {
      if (!(a & low)) continue;
      const std::uint32_t b = s ^ a;
      double c = 1.0;
      for (const Idx& e : idx)
        if (on_boundary(e, a) || on_boundary(e, b)) c *= e.dim;
      const double total = best[a] + best[b] + c;
      if (total < best[s]) {
        best[s] = total;
        split[s] = a;
      }
    }
  }
  // Emit merges children-first; SSA ids assigned in emission order.
  ContractionPath path;
  std::size_t next_id = n;
  auto emit = [&](auto&& self, std::uint32_t s) -> std::size_t {
    if (std::popcount(s) == 1) return static_cast<std::size_t>(std::countr_zero(s));
    const std::size_t x = self(self, split[s]);
    const std::size_t y = self(self, s ^ split[s]);
    path.steps.emplace_back(x, y);
    return next_id++;
  };
  emit(emit, full);
  path.cost = best[full];
  return path;
}

/// Greedy: repeatedly merge the connected pair with the cheapest pairwise
/// contraction; restarts > 0 perturb the scores with seeded noise. Outer
/// products join disconnected components last, smallest first.
inline ContractionPath find_path_greedy(const std::vector<TensorShape>& shapes,
                                        std::uint64_t seed = 0, int restarts = 8) {
  const std::size_t n = shapes.size();
  if (n == 0) throw ValidationError("find_path: empty network");
  detail::check_no_hyperindices(shapes);
  ContractionPath best;
  best.cost = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<Index>> live;
    std::vector<std::size_t> ids;
    for (std::size_t t = 0; t < n; ++t) {
      live.push_back(shapes[t].indices);
      ids.push_back(t);
    }
    ContractionPath path;
    std::size_t next_id = n;
    auto volume = [](const std::vector<Index>& v) {
      double x = 1.0;
      for (const Index& i : v) x *= static_cast<double>(i.dim);
      return x;
    };
    while (live.size() > 1) {
      std::size_t bi = 0, bj = 0;
      double best_score = std::numeric_limits<double>::infinity();
      bool found = false;
      for (std::size_t i = 0; i < live.size(); ++i)
        for (std::size_t j = i + 1; j < live.size(); ++j) {
          bool shares = false;
          for (const Index& x : live[i]) shares = shares || detail::has_index(live[j], x.name);
          if (!shares) continue;
          double score = pair_cost(live[i], live[j]);
          if (r > 0) score *= 1.0 + noise(rng);
          if (score < best_score) {
            best_score = score;
            bi = i;
            bj = j;
            found = true;
          }
        }
      if (!found) {
        std::vector<std::size_t> order(live.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          return volume(live[x]) < volume(live[y]);
        });
        bi = std::min(order[0], order[1]);
        bj = std::max(order[0], order[1]);
      }
      path.cost += pair_cost(live[bi], live[bj]);
      path.steps.emplace_back(ids[bi], ids[bj]);
      std::vector<Index> merged = detail::merged_indices(live[bi], live[bj]);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));
      ids.erase(ids.begin() + static_cast<std::ptrdiff_t>(bj));
      live[bi] = std::move(merged);
      ids[bi] = next_id++;
    }
    if (path.cost < best.cost) best = std::move(path);
  }
  return best;
}

/// Exact DP up to kMaxExactPathTensors tensors, greedy with restarts above.
/// Depends only on index metadata.
inline ContractionPath find_path(const std::vector<TensorShape>& shapes, std::uint64_t seed = 0) {
  if (shapes.size() <= kMaxExactPathTensors) return find_path_optimal(shapes);
  return find_path_greedy(shapes, seed, 8);
}

struct ContractionResult {
  double value = 0.0;
  /// Multiplications performed (structural zeros of coefficient tensors skipped).
  double flops = 0.0;
};

/// Contracts a closed network along `path` down to a scalar.
inline ContractionResult contract(std::vector<Tensor> tensors, const ContractionPath& path) {
  if (tensors.empty()) throw ValidationError("contract: empty network");
  const std::size_t n = tensors.size();
  std::vector<TensorShape> shapes;
  for (const Tensor& t : tensors) {
    t.validate();
    shapes.push_back(shape_of(t));
  }
  ContractionResult result;
  std::vector<bool> alive(n, true);
  for (const auto& [x, y] : path.steps) {
    if (x == y || x >= tensors.size() || y >= tensors.size() || !alive[x] || !alive[y])
      throw ValidationError("contraction path refers to a consumed or unknown tensor");
    result.flops += pair_flops(shapes[x], shapes[y]);
    Tensor merged = contract_pair(tensors[x], tensors[y]);
    tensors[x] = Tensor{};
    tensors[y] = Tensor{};
    shapes.push_back({merged.indices, std::nullopt});
    tensors.push_back(std::move(merged));
    alive[x] = alive[y] = false;
    alive.push_back(true);
  }
  if (std::count(alive.begin(), alive.end(), true) != 1)
    throw ValidationError("contraction path does not reduce the network to one tensor");
  const Tensor& last = tensors[static_cast<std::size_t>(std::find(alive.begin(), alive.end(), true) - alive.begin())];
  if (!last.indices.empty())
    throw ValidationError("network has open index '" + last.indices.front().name + "'");
  result.value = last.data.at(0);
  return result;
}

}  // namespace knitgrid
