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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <numeric>
#include <sstream>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"
#include "knitgrid/ir.hpp"
#include "knitgrid/parallel.hpp"
#include "knitgrid/partition.hpp"
#include "knitgrid/qpd.hpp"
#include "knitgrid/rng.hpp"

namespace knitgrid {

enum class NextLeaf { MostQubits, MostOps, HighestDegree };

inline std::string_view next_leaf_name(NextLeaf n) {
  switch (n) {
    case NextLeaf::MostQubits: return "most_qubits";
    case NextLeaf::MostOps: return "most_ops";
    case NextLeaf::HighestDegree: return "highest_degree";
  }
  return "?";
}

/// Uniform gate error model: 1 - prod(1 - eps_g).
struct ErrorModel {
  double single_qubit = 1e-4;
  double two_qubit = 1e-3;

  double operator()(std::size_t n1, std::size_t n2) const {
    return 1.0 - std::pow(1.0 - single_qubit, static_cast<double>(n1)) *
                     std::pow(1.0 - two_qubit, static_cast<double>(n2));
  }
};

/// Error estimate of one subcircuit. Placeholders count as single-qubit gates
/// (they are replaced by single-qubit instantiations); measurements and
/// preparations are free.
inline double estimate_error(const Circuit& fragment, const ErrorModel& model = {}) {
  std::size_t n1 = 0, n2 = 0;
  for (const Op& op : fragment.ops()) {
    if (is_two_qubit(op.kind)) ++n2;
    else if (is_single_qubit_gate(op.kind) || op.kind == GateKind::PLACEHOLDER) ++n1;
  }
  return model(n1, n2);
}

/// Per-leaf figures used by termination, next-leaf selection and scoring.
struct LeafStats {
  std::size_t qubits = 0;  // wire segments, i.e. qubits of the subcircuit
  std::size_t ops = 0;     // uncompressed vertices
  std::size_t degree = 0;  // cut edges leaving the leaf
  std::size_t single_qubit_gates = 0;
  std::size_t two_qubit_gates = 0;
};

struct PartitionParams {
  int num_parts = 2;
  double imbalance = 0.03;
  std::uint64_t seed = 0;
};

struct Hyperparams {
  /// Termination: split until every leaf has at most this many qubits.
  int max_qubits = 15;
  /// Hard width limit for feasibility; 0 means max_qubits.
  int qubit_cap = 0;
  double max_overhead = 1e12;
  Compression compression = Compression::OneQubit;
  NextLeaf next_leaf = NextLeaf::MostQubits;
  PartitionParams partition;
  /// Replaces the max_qubits termination when set.
  std::function<bool(const LeafStats&)> termination;
  ErrorModel error_model;

  int effective_cap() const { return qubit_cap > 0 ? qubit_cap : max_qubits; }
  bool terminated(const LeafStats& s) const {
    return termination ? termination(s) : s.qubits <= static_cast<std::size_t>(max_qubits);
  }
  void validate() const {
    if (!(max_overhead > 0.0)) throw ValidationError("max_overhead must be > 0");
    if (partition.num_parts < 2) throw ValidationError("num_parts must be >= 2");
    if (partition.imbalance < 0.0 || partition.imbalance > 0.5)
      throw ValidationError("imbalance must lie in [0, 0.5]");
    if (max_qubits < 1) throw ValidationError("max_qubits must be >= 1");
  }
};

/// Binary tree over sets of (compressed) IR vertices. Node 0 is the root.
class ContractionTree {
 public:
  struct Node {
    std::vector<std::size_t> groups;  // sorted
    std::optional<std::size_t> left;
    std::optional<std::size_t> right;
    bool is_leaf() const { return !left; }
  };

  ContractionTree() = default;
  explicit ContractionTree(std::vector<std::size_t> all_groups) {
    std::sort(all_groups.begin(), all_groups.end());
    nodes_.push_back({std::move(all_groups), std::nullopt, std::nullopt});
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_[i]; }
  std::size_t root() const { return 0; }

  /// Turns leaf `at` into an internal node with the two given children.
  std::pair<std::size_t, std::size_t> split(std::size_t at, std::vector<std::size_t> left,
                                            std::vector<std::size_t> right) {
    if (!nodes_[at].is_leaf()) throw ValidationError("split: node is not a leaf");
    std::sort(left.begin(), left.end());
    std::sort(right.begin(), right.end());
    const std::size_t l = nodes_.size();
    nodes_.push_back({std::move(left), std::nullopt, std::nullopt});
    nodes_.push_back({std::move(right), std::nullopt, std::nullopt});
    nodes_[at].left = l;
    nodes_[at].right = l + 1;
    return {l, l + 1};
  }

  /// Leaf node ids ordered by their smallest group id.
  std::vector<std::size_t> leaves() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].is_leaf()) out.push_back(i);
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
      const auto& ga = nodes_[a].groups;
      const auto& gb = nodes_[b].groups;
      if (ga.empty() || gb.empty()) return ga.size() < gb.size();
      return ga.front() < gb.front();
    });
    return out;
  }

  std::size_t num_leaves() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                  [](const Node& n) { return n.is_leaf(); }));
  }

  /// Nested rendering with leaves labelled S1.. in leaves() order,
  /// e.g. "((S2,S3),S1)".
  std::string to_string() const {
    const auto order = leaves();
    std::vector<std::size_t> label(nodes_.size(), 0);
    for (std::size_t k = 0; k < order.size(); ++k) label[order[k]] = k + 1;
    std::string out;
    auto rec = [&](auto&& self, std::size_t i) -> void {
      if (nodes_[i].is_leaf()) {
        out += "S" + std::to_string(label[i]);
        return;
      }
      out += '(';
      self(self, *nodes_[i].left);
      out += ',';
      self(self, *nodes_[i].right);
      out += ')';
    };
    if (!nodes_.empty()) rec(rec, 0);
    return out;
  }

  friend bool operator==(const ContractionTree& a, const ContractionTree& b) {
    if (a.nodes_.size() != b.nodes_.size()) return false;
    for (std::size_t i = 0; i < a.nodes_.size(); ++i)
      if (a.nodes_[i].groups != b.nodes_[i].groups || a.nodes_[i].left != b.nodes_[i].left ||
          a.nodes_[i].right != b.nodes_[i].right)
        return false;
    return true;
  }

 private:
  friend class TreeBuilder;
  std::vector<Node> nodes_;
};

/// Cost of contracting the tensors of vertex sets `left` and `right`: product
/// of the dimensions of all indices either operand carries. A cut between the
/// two contributes an index on each side (dim^2, coefficient tensor absorbed);
/// a cut to the rest of the network contributes one index.
inline double node_cost(const IrGraph& ir, const std::vector<std::size_t>& left,
                        const std::vector<std::size_t>& right) {
  std::vector<int> side(ir.num_groups(), 0);
  for (std::size_t g : left) side[g] = 1;
  for (std::size_t g : right) side[g] = 2;
  double cost = 1.0;
  for (const IrEdge& e : ir.edges()) {
    const int a = side[ir.group_of(e.u)];
    const int b = side[ir.group_of(e.v)];
    if (a == b) continue;
    const double d = static_cast<double>(e.dim);
    if (a && b) cost *= d * d;
    else cost *= d;
  }
  return cost;
}

/// Sum of node costs over internal nodes; 0 for a single leaf.
inline double tree_cost(const ContractionTree& tree, const IrGraph& ir) {
  std::vector<int> seen(ir.num_groups(), 0);
  for (std::size_t leaf : tree.leaves())
    for (std::size_t g : tree.node(leaf).groups) {
      if (g >= seen.size()) throw ValidationError("tree_cost: tree refers to unknown IR vertex");
      ++seen[g];
    }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }))
    throw ValidationError("tree_cost: tree leaves do not partition the IR");
  double total = 0.0;
  for (const auto& n : tree.nodes())
    if (!n.is_leaf()) total += node_cost(ir, tree.node(*n.left).groups, tree.node(*n.right).groups);
  return total;
}

namespace detail {

/// Optimal binary tree over `sets` (unions of IR groups; groups outside all
/// sets count as the rest of the network). Returns split masks by subset.
struct SubtreePlan {
  std::vector<double> best;
  std::vector<std::uint32_t> split;
};

inline SubtreePlan plan_subtree(const IrGraph& ir, const std::vector<std::vector<std::size_t>>& sets) {
  const std::size_t k = sets.size();
  if (k == 0 || k > 16) throw ValidationError("plan_subtree: unsupported set count");
  std::vector<int> owner(ir.num_groups(), -1);
  for (std::size_t s = 0; s < k; ++s)
    for (std::size_t g : sets[s]) owner[g] = static_cast<int>(s);
  struct E {
    int a, b;
    double d;
  };
  std::vector<E> edges;
  for (const IrEdge& e : ir.edges()) {
    const int a = owner[ir.group_of(e.u)];
    const int b = owner[ir.group_of(e.v)];
    if (a == b) continue;
    edges.push_back({a, b, static_cast<double>(e.dim)});
  }
  const std::uint32_t full = (1u << k) - 1;
  SubtreePlan plan;
  plan.best.assign(std::size_t{full} + 1, std::numeric_limits<double>::infinity());
  plan.split.assign(std::size_t{full} + 1, 0);
  for (std::size_t s = 0; s < k; ++s) plan.best[1u << s] = 0.0;
  auto in = [](int x, std::uint32_t m) { return x >= 0 && ((m >> x) & 1u); };
  for (std::uint32_t s = 1; s <= full; ++s) {
    if (std::popcount(s) < 2) continue;
    const std::uint32_t low = s & (~s + 1);
    for (std::uint32_t a = (s - 1) & s; a; a = (a - 1) & s) {
      if (!(a & low)) continue;
      const std::uint32_t b = s ^ a;
      double c = 1.0;
      for (const E& e : edges) {
        const bool ea = in(e.a, a), eb = in(e.b, b), fa = in(e.b, a), fb = in(e.a, b);
        if ((ea && eb) || (fa && fb)) c *= e.d * e.d;
        else if (in(e.a, s) != in(e.b, s)) c *= e.d;
      }
      const double total = plan.best[a] + plan.best[b] + c;
      if (total < plan.best[s]) {
        plan.best[s] = total;
        plan.split[s] = a;
      }
    }
  }
  return plan;
}

}  // namespace detail

/// Builds trees from set plans; the only writer of ContractionTree internals
/// besides split().
class TreeBuilder {
 public:
  /// Replaces leaf `at` with the optimal subtree over `sets`.
  static void attach(ContractionTree& tree, std::size_t at, const IrGraph& ir,
                     const std::vector<std::vector<std::size_t>>& sets) {
    const auto plan = detail::plan_subtree(ir, sets);
    auto union_of = [&](std::uint32_t m) {
      std::vector<std::size_t> out;
      for (std::size_t s = 0; s < sets.size(); ++s)
        if ((m >> s) & 1u) out.insert(out.end(), sets[s].begin(), sets[s].end());
      return out;
    };
    auto rec = [&](auto&& self, std::size_t node, std::uint32_t m) -> void {
      if (std::popcount(m) == 1) return;
      const std::uint32_t a = plan.split[m];
      auto [l, r] = tree.split(node, union_of(a), union_of(m ^ a));
      self(self, l, a);
      self(self, r, m ^ a);
    };
    rec(rec, at, (1u << sets.size()) - 1);
  }

  static ContractionTree optimal(const IrGraph& ir, const std::vector<std::vector<std::size_t>>& leaves) {
    std::vector<std::size_t> all;
    for (const auto& l : leaves) all.insert(all.end(), l.begin(), l.end());
    ContractionTree tree(all);
    if (leaves.size() > 1) attach(tree, 0, ir, leaves);
    return tree;
  }

  /// Left-deep tree in the given leaf order (fallback for many leaves).
  static ContractionTree sequential(const std::vector<std::vector<std::size_t>>& leaves) {
    std::vector<std::size_t> all;
    for (const auto& l : leaves) all.insert(all.end(), l.begin(), l.end());
    ContractionTree tree(all);
    std::size_t at = 0;
    for (std::size_t k = leaves.size(); k-- > 1;) {
      std::vector<std::size_t> head;
      for (std::size_t i = 0; i < k; ++i) head.insert(head.end(), leaves[i].begin(), leaves[i].end());
      at = tree.split(at, head, leaves[k]).first;
    }
    return tree;
  }
};

/// Leaf statistics of a vertex-group set.
inline LeafStats leaf_stats(const IrGraph& ir, const std::vector<std::size_t>& groups) {
  std::vector<bool> in(ir.vertices().size(), false);
  LeafStats s;
  for (std::size_t g : groups)
    for (std::size_t v : ir.groups()[g]) in[v] = true;
  for (std::size_t v = 0; v < in.size(); ++v) {
    if (!in[v]) continue;
    ++s.ops;
    if (!ir.is_two_qubit_vertex(v)) ++s.single_qubit_gates;
    const std::size_t pos = ir.wire_position(v);
    const auto& wire = ir.wire(ir.vertices()[v].qubit);
    if (pos == 0 || !in[wire[pos - 1]]) ++s.qubits;
  }
  for (const IrEdge& e : ir.all_edges()) {
    const bool a = in[e.u], b = in[e.v];
    if (a && b) {
      if (e.kind == EdgeKind::Gate) ++s.two_qubit_gates;
    } else if (a || b) {
      ++s.single_qubit_gates;  // placeholder instantiation
      ++s.degree;
    }
  }
  return s;
}

struct Candidate {
  IrGraph ir;
  ContractionTree tree;
  double pp_cost = 0.0;
  double est_error = 0.0;
  Hyperparams params;
  bool feasible = true;
  std::string note;
  std::size_t trial_id = 0;
  std::size_t num_leaves = 1;
  std::size_t num_gate_cuts = 0;
  std::size_t num_wire_cuts = 0;
  std::vector<std::size_t> leaf_qubits;
  /// Instance count of each cut for the naive cost reference.
  std::vector<std::size_t> naive_instances;

  std::size_t num_cuts() const { return num_gate_cuts + num_wire_cuts; }
  /// Brute-force postprocessing cost of the same decomposition.
  double naive_cost() const { return naive_pp_cost(naive_instances, num_leaves); }
};

/// Leaf index of every group of `tree`.
inline std::vector<std::size_t> leaf_assignment(const ContractionTree& tree, const IrGraph& ir) {
  std::vector<std::size_t> owner(ir.num_groups(), 0);
  const auto leaves = tree.leaves();
  for (std::size_t k = 0; k < leaves.size(); ++k)
    for (std::size_t g : tree.node(leaves[k]).groups) owner[g] = k;
  return owner;
}

/// Cut edges of a tree: edges of `ir` joining different leaves.
inline std::vector<IrEdge> cut_edges(const ContractionTree& tree, const IrGraph& ir) {
  const auto owner = leaf_assignment(tree, ir);
  std::vector<IrEdge> out;
  for (const IrEdge& e : ir.edges())
    if (owner[ir.group_of(e.u)] != owner[ir.group_of(e.v)]) out.push_back(e);
  return out;
}

namespace detail {

inline void finalize_candidate(Candidate& c, const Circuit& circuit) {
  c.pp_cost = tree_cost(c.tree, c.ir);
  const auto leaves = c.tree.leaves();
  c.num_leaves = leaves.size();
  c.est_error = 0.0;
  c.leaf_qubits.clear();
  for (std::size_t leaf : leaves) {
    const LeafStats s = leaf_stats(c.ir, c.tree.node(leaf).groups);
    c.leaf_qubits.push_back(s.qubits);
    c.est_error = std::max(c.est_error, c.params.error_model(s.single_qubit_gates, s.two_qubit_gates));
  }
  c.num_gate_cuts = c.num_wire_cuts = 0;
  c.naive_instances.clear();
  for (const IrEdge& e : cut_edges(c.tree, c.ir)) {
    if (e.kind == EdgeKind::Gate) {
      ++c.num_gate_cuts;
      const Op& op = circuit.ops()[c.ir.vertices()[e.u].op];
      c.naive_instances.push_back(qpd_for(op.kind, op.param).naive_instances);
    } else {
      ++c.num_wire_cuts;
      c.naive_instances.push_back(qpd_wire().naive_instances);
    }
  }
  const auto cap = static_cast<std::size_t>(c.params.effective_cap());
  for (std::size_t q : c.leaf_qubits)
    if (q > cap && c.feasible) {
      c.feasible = false;
      c.note = "leaf with " + std::to_string(q) + " qubits exceeds cap " + std::to_string(cap);
    }
}

inline void reconfigure(Candidate& c) {
  const auto leaves = c.tree.leaves();
  if (leaves.size() < 3 || leaves.size() > 12) return;
  std::vector<std::vector<std::size_t>> sets;
  for (std::size_t l : leaves) sets.push_back(c.tree.node(l).groups);
  ContractionTree better = TreeBuilder::optimal(c.ir, sets);
  const double now = tree_cost(c.tree, c.ir);
  if (tree_cost(better, c.ir) < now * (1.0 - 1e-12)) c.tree = std::move(better);
}

}  // namespace detail

/// Candidate for an explicit decomposition of `ir` into leaves (sets of group
/// ids). The tree is the optimal one for these leaves (left-deep above 12).
inline Candidate make_candidate(const Circuit& circuit, IrGraph ir,
                                const std::vector<std::vector<std::size_t>>& leaves,
                                Hyperparams params = {}) {
  Candidate c;
  c.ir = std::move(ir);
  c.params = std::move(params);
  c.tree = leaves.size() <= 12 ? TreeBuilder::optimal(c.ir, leaves) : TreeBuilder::sequential(leaves);
  detail::finalize_candidate(c, circuit);
  return c;
}

/// One optimizer run: compress, then repeatedly partition the leaf chosen by
/// next_leaf until all leaves terminate or the next split would exceed
/// max_overhead (that split is undone).
inline Candidate optimize_once(const Circuit& circuit, const Hyperparams& params) {
  params.validate();
  Candidate c;
  c.params = params;
  c.ir = compress(build_ir(circuit), params.compression);
  std::vector<std::size_t> all(c.ir.num_groups());
  std::iota(all.begin(), all.end(), 0);
  c.tree = ContractionTree(all);

  for (std::uint64_t iteration = 0;; ++iteration) {
    std::optional<std::size_t> pick;
    LeafStats pick_stats;
    for (std::size_t leaf : c.tree.leaves()) {
      const LeafStats s = leaf_stats(c.ir, c.tree.node(leaf).groups);
      if (params.terminated(s)) continue;
      auto key = [&](const LeafStats& x) {
        switch (params.next_leaf) {
          case NextLeaf::MostQubits: return std::tuple(x.qubits, x.ops, x.degree);
          case NextLeaf::MostOps: return std::tuple(x.ops, x.qubits, x.degree);
          case NextLeaf::HighestDegree: return std::tuple(x.degree, x.qubits, x.ops);
        }
        return std::tuple(x.qubits, x.ops, x.degree);
      };
      if (!pick || key(s) > key(pick_stats)) {
        pick = leaf;
        pick_stats = s;
      }
    }
    if (!pick) break;
    const auto& groups = c.tree.node(*pick).groups;
    if (groups.size() < 2) {
      c.feasible = false;
      c.note = "unpartitionable leaf does not meet termination";
      break;
    }
    std::vector<std::size_t> local(c.ir.num_groups(), groups.size());
    std::vector<double> weights;
    for (std::size_t i = 0; i < groups.size(); ++i) {
      local[groups[i]] = i;
      weights.push_back(static_cast<double>(c.ir.groups()[groups[i]].size()));
    }
    PartitionGraph pg(std::move(weights));
    for (const IrEdge& e : c.ir.edges()) {
      const std::size_t a = local[c.ir.group_of(e.u)], b = local[c.ir.group_of(e.v)];
      if (a < groups.size() && b < groups.size()) pg.add_edge(a, b, e.weight);
    }
    const std::vector<int> part =
        partition(pg, params.partition.num_parts, params.partition.imbalance,
                  derive_seed(params.partition.seed, {iteration}));
    const int num_parts = *std::max_element(part.begin(), part.end()) + 1;
    std::vector<std::vector<std::size_t>> sets(static_cast<std::size_t>(num_parts));
    for (std::size_t i = 0; i < groups.size(); ++i)
      sets[static_cast<std::size_t>(part[i])].push_back(groups[i]);

    ContractionTree before = c.tree;
    if (num_parts == 2) c.tree.split(*pick, sets[0], sets[1]);
    else TreeBuilder::attach(c.tree, *pick, c.ir, sets);
    if (tree_cost(c.tree, c.ir) > params.max_overhead) {
      c.tree = std::move(before);
      c.note = "stopped at max_overhead";
      break;
    }
  }
  detail::reconfigure(c);
  detail::finalize_candidate(c, circuit);
  return c;
}

/// Declared hyperparameter space; trials sample uniformly from it.
struct SearchSpace {
  std::vector<Compression> compressions{Compression::None, Compression::OneQubit,
                                        Compression::TwoQubit, Compression::Wire};
  std::vector<NextLeaf> next_leaves{NextLeaf::MostQubits, NextLeaf::MostOps,
                                    NextLeaf::HighestDegree};
  std::vector<double> imbalances{0.03, 0.1, 0.3, 0.5};
  std::vector<int> num_parts{2, 3, 4};
  std::vector<int> termination_qubits{15};
  int qubit_cap = 15;
  double max_overhead = 1e12;
  ErrorModel error_model;

  static SearchSpace with_limits(int max_qubits, double max_overhead) {
    SearchSpace s;
    s.termination_qubits = {max_qubits};
    s.qubit_cap = max_qubits;
    s.max_overhead = max_overhead;
    return s;
  }

  /// Adds stricter termination thresholds (3Q/4, Q/2, Q/4, 2, 1) to trade
  /// postprocessing cost for lower subcircuit error.
  SearchSpace& sweep_termination() {
    const int q = qubit_cap;
    for (int t : {q, (3 * q + 3) / 4, (q + 1) / 2, (q + 3) / 4, 2, 1})
      if (t >= 1 && t <= q &&
          std::find(termination_qubits.begin(), termination_qubits.end(), t) == termination_qubits.end())
        termination_qubits.push_back(t);
    return *this;
  }
};

/// Hyperparameters of trial `t`, a pure function of (space, seed, t).
inline Hyperparams sample_hyperparams(const SearchSpace& space, std::uint64_t seed, std::size_t t) {
  std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
  auto pick = [&](const auto& v) {
    if (v.empty()) throw ValidationError("search space dimension is empty");
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
  };
  Hyperparams p;
  p.compression = pick(space.compressions);
  p.next_leaf = pick(space.next_leaves);
  p.partition.imbalance = pick(space.imbalances);
  p.partition.num_parts = pick(space.num_parts);
  p.max_qubits = pick(space.termination_qubits);
  p.partition.seed = derive_seed(seed, {static_cast<std::uint64_t>(t), 0x5eedULL});
  p.qubit_cap = space.qubit_cap;
  p.max_overhead = space.max_overhead;
  p.error_model = space.error_model;
  return p;
}

/// Runs every trial (in parallel) and returns all candidates by trial id.
inline std::vector<Candidate> run_trials(const Circuit& circuit, std::size_t trials,
                                         const SearchSpace& space, std::uint64_t seed,
                                         std::size_t threads = default_thread_count()) {
  if (trials < 1) throw ValidationError("hyperopt: trials must be >= 1");
  std::vector<Candidate> out(trials);
  parallel_for(
      trials,
      [&](std::size_t t) {
        out[t] = optimize_once(circuit, sample_hyperparams(space, seed, t));
        out[t].trial_id = t;
      },
      threads);
  return out;
}

/// Indices of the non-dominated points of (cost, error), sorted by cost then
/// error. Exact duplicates keep the earliest point.
inline std::vector<std::size_t> pareto_indices(const std::vector<std::pair<double, double>>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pts.size() && !dominated; ++j) {
      if (i == j) continue;
      const bool le = pts[j].first <= pts[i].first && pts[j].second <= pts[i].second;
      const bool lt = pts[j].first < pts[i].first || pts[j].second < pts[i].second;
      dominated = le && (lt || j < i);
    }
    if (!dominated) out.push_back(i);
  }
  std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return pts[a] < pts[b]; });
  return out;
}

/// Non-dominated feasible candidates, sorted by pp_cost.
inline std::vector<Candidate> pareto_front(const std::vector<Candidate>& candidates) {
  std::vector<const Candidate*> feasible;
  for (const Candidate& c : candidates)
    if (c.feasible) feasible.push_back(&c);
  std::vector<std::pair<double, double>> pts;
  for (const Candidate* c : feasible) pts.emplace_back(c->pp_cost, c->est_error);
  std::vector<Candidate> front;
  for (std::size_t i : pareto_indices(pts)) front.push_back(*feasible[i]);
  return front;
}

/// Random search over `space`; returns the Pareto front of the feasible trials.
inline std::vector<Candidate> hyperopt(const Circuit& circuit, std::size_t trials,
                                       const SearchSpace& space, std::uint64_t seed,
                                       std::size_t threads = default_thread_count()) {
  auto front = pareto_front(run_trials(circuit, trials, space, seed, threads));
  if (front.empty())
    throw InfeasibleError("no feasible decomposition within max_overhead " +
                          std::to_string(space.max_overhead) + " and " +
                          std::to_string(space.qubit_cap) + " qubits");
  return front;
}

/// Point closest to (0, 0) after min-max normalisation of both objectives; a
/// constant objective normalises to 0. Ties go to lower cost, then lower error.
inline std::size_t knee_index(const std::vector<std::pair<double, double>>& pts) {
  if (pts.empty()) throw ValidationError("select_knee: empty front");
  double cmin = pts[0].first, cmax = cmin, emin = pts[0].second, emax = emin;
  for (const auto& [c, e] : pts) {
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
    emin = std::min(emin, e);
    emax = std::max(emax, e);
  }
  auto norm = [](double v, double lo, double hi) { return hi > lo ? (v - lo) / (hi - lo) : 0.0; };
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = std::hypot(norm(pts[i].first, cmin, cmax), norm(pts[i].second, emin, emax));
    const bool tie = std::abs(d - best_d) <= 1e-12;
    if (d < best_d - 1e-12 || (tie && pts[i] < pts[best])) {
      best = i;
      best_d = std::min(d, best_d);
    }
  }
  return best;
}

inline Candidate select_knee(const std::vector<Candidate>& front) {
  std::vector<std::pair<double, double>> pts;
  for (const Candidate& c : front) pts.emplace_back(c.pp_cost, c.est_error);
  return front[knee_index(pts)];
}

/// Pareto front as CSV (trial_id, pp_cost, est_error, num_leaves, num_cuts,
/// flattened hyperparameters).
inline std::string pareto_csv(const std::vector<Candidate>& front) {
  std::ostringstream os;
  os << "trial_id,pp_cost,est_error,num_leaves,num_cuts,max_qubits,max_overhead,compression,"
        "next_leaf,num_parts,imbalance,partition_seed\n";
  for (const Candidate& c : front) {
    os << c.trial_id << ',' << detail::format_double(c.pp_cost) << ','
       << detail::format_double(c.est_error) << ',' << c.num_leaves << ',' << c.num_cuts() << ','
       << c.params.max_qubits << ',' << detail::format_double(c.params.max_overhead) << ','
       << compression_name(c.params.compression) << ',' << next_leaf_name(c.params.next_leaf) << ','
       << c.params.partition.num_parts << ',' << detail::format_double(c.params.partition.imbalance)
       << ',' << c.params.partition.seed << '\n';
  }
  return os.str();
}

}  // namespace knitgrid
