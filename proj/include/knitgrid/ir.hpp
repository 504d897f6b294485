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
#include <cmath>
#include <compare>
#include <cstddef>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"
#include "knitgrid/qpd.hpp"

namespace knitgrid {

/// (operation index, qubit) incidence.
struct VertexId {
  std::size_t op = 0;
  int qubit = 0;

  friend auto operator<=>(const VertexId&, const VertexId&) = default;
};

enum class EdgeKind { Gate, Wire };

enum class Compression { None, OneQubit, TwoQubit, Wire };

inline std::string_view compression_name(Compression c) {
  switch (c) {
    case Compression::None: return "none";
    case Compression::OneQubit: return "1q";
    case Compression::TwoQubit: return "2q";
    case Compression::Wire: return "wire";
  }
  return "?";
}

inline std::optional<Compression> compression_from_name(std::string_view s) {
  for (Compression c : {Compression::None, Compression::OneQubit, Compression::TwoQubit,
                        Compression::Wire})
    if (compression_name(c) == s) return c;
  return std::nullopt;
}

/// A cuttable element. Endpoints are uncompressed vertex indices: for a gate
/// edge `u` sits on the gate's first qubit, for a wire edge `u` is upstream.
struct IrEdge {
  std::size_t u = 0;
  std::size_t v = 0;
  EdgeKind kind = EdgeKind::Gate;
  /// log2 of the cut's sampling overhead.
  double weight = 0.0;
  /// Index dimension contributed on each side of the cut.
  std::size_t dim = 0;
};

/// Graph of (op, qubit) vertices with gate and wire edges. Compression merges
/// vertices into groups; `edges()` lists only edges between distinct groups,
/// i.e. the elements that can still be cut.
class IrGraph {
 public:
  int num_qubits() const { return num_qubits_; }
  Compression compression() const { return compression_; }

  const std::vector<VertexId>& vertices() const { return vertices_; }
  /// Vertex indices of qubit q in program order.
  const std::vector<std::size_t>& wire(int q) const { return wires_[static_cast<std::size_t>(q)]; }
  /// Position of vertex v along its wire.
  std::size_t wire_position(std::size_t v) const { return wire_pos_[v]; }
  /// Whether vertex v belongs to a two-qubit op.
  bool is_two_qubit_vertex(std::size_t v) const { return two_qubit_[v]; }

  const std::vector<std::vector<std::size_t>>& groups() const { return groups_; }
  std::size_t group_of(std::size_t v) const { return group_of_[v]; }
  std::size_t num_groups() const { return groups_.size(); }

  const std::vector<IrEdge>& edges() const { return edges_; }
  /// Every edge of the uncompressed graph.
  const std::vector<IrEdge>& all_edges() const { return all_edges_; }

  std::size_t vertex_index(VertexId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw ValidationError("unknown IR vertex");
    return it->second;
  }

  friend IrGraph build_ir(const Circuit& circuit);
  friend IrGraph compress(const IrGraph& ir, Compression method);

 private:
  void set_groups(const std::vector<std::size_t>& root_of) {
    std::map<std::size_t, std::size_t> relabel;
    groups_.clear();
    group_of_.assign(vertices_.size(), 0);
    for (std::size_t v = 0; v < vertices_.size(); ++v) {
      auto [it, fresh] = relabel.emplace(root_of[v], groups_.size());
      if (fresh) groups_.emplace_back();
      groups_[it->second].push_back(v);
      group_of_[v] = it->second;
    }
    edges_.clear();
    for (const IrEdge& e : all_edges_)
      if (group_of_[e.u] != group_of_[e.v]) edges_.push_back(e);
  }

  int num_qubits_ = 0;
  Compression compression_ = Compression::None;
  std::vector<VertexId> vertices_;
  std::map<VertexId, std::size_t> index_;
  std::vector<std::vector<std::size_t>> wires_;
  std::vector<std::size_t> wire_pos_;
  std::vector<bool> two_qubit_;
  std::vector<std::vector<std::size_t>> groups_;
  std::vector<std::size_t> group_of_;
  std::vector<IrEdge> edges_;
  std::vector<IrEdge> all_edges_;
};

inline IrGraph build_ir(const Circuit& circuit) {
  IrGraph g;
  g.num_qubits_ = circuit.num_qubits();
  g.wires_.assign(static_cast<std::size_t>(circuit.num_qubits()), {});
  const double wire_weight = std::log2(sampling_overhead(qpd_wire()));
  for (const Op& op : circuit.ops()) {
    if (!is_single_qubit_gate(op.kind) && !is_two_qubit(op.kind))
      throw ValidationError("build_ir: " + std::string(gate_name(op.kind)) +
                            " is not allowed in a circuit to be cut");
    std::vector<std::size_t> ids;
    for (int q : op.qubits) {
      const std::size_t v = g.vertices_.size();
      g.vertices_.push_back({op.index, q});
      g.index_.emplace(VertexId{op.index, q}, v);
      auto& w = g.wires_[static_cast<std::size_t>(q)];
      g.wire_pos_.push_back(w.size());
      g.two_qubit_.push_back(is_two_qubit(op.kind));
      if (!w.empty()) g.all_edges_.push_back({w.back(), v, EdgeKind::Wire, wire_weight, 4});
      w.push_back(v);
      ids.push_back(v);
    }
    if (is_two_qubit(op.kind)) {
      const QpdSpec spec = qpd_for(op.kind, op.param);
      g.all_edges_.push_back(
          {ids[0], ids[1], EdgeKind::Gate, std::log2(sampling_overhead(spec)), spec.rows()});
    }
  }
  std::vector<std::size_t> identity(g.vertices_.size());
  std::iota(identity.begin(), identity.end(), 0);
  g.set_groups(identity);
  return g;
}

inline IrGraph compress(const IrGraph& ir, Compression method) {
  if (ir.compression_ != Compression::None || ir.num_groups() != ir.vertices_.size())
    throw ValidationError("compress: input graph is already compressed");
  IrGraph g = ir;
  g.compression_ = method;
  std::vector<std::size_t> parent(g.vertices_.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  };
  switch (method) {
    case Compression::None:
      break;
    case Compression::OneQubit:
      for (const auto& w : g.wires_) {
        auto is_2q = [&](std::size_t v) { return g.two_qubit_[v]; };
        std::optional<std::size_t> last_2q;
        std::optional<std::size_t> first_2q;
        for (std::size_t v : w)
          if (is_2q(v)) {
            first_2q = v;
            break;
          }
        for (std::size_t v : w) {
          if (is_2q(v)) {
            last_2q = v;
            continue;
          }
          if (last_2q) unite(v, *last_2q);
          else if (first_2q) unite(v, *first_2q);
          else unite(v, w.front());
        }
      }
      break;
    case Compression::TwoQubit:
      for (const IrEdge& e : g.all_edges_)
        if (e.kind == EdgeKind::Gate) unite(e.u, e.v);
      break;
    case Compression::Wire:
      for (const auto& w : g.wires_)
        for (std::size_t v : w) unite(v, w.front());
      break;
  }
  std::vector<std::size_t> root(g.vertices_.size());
  for (std::size_t v = 0; v < root.size(); ++v) root[v] = find(v);
  g.set_groups(root);
  return g;
}

/// Graphviz rendering; vertices labelled "op:qubit", edges "kind/weight".
inline std::string to_dot(const IrGraph& ir) {
  std::ostringstream os;
  os << "graph ir {\n";
  for (std::size_t g = 0; g < ir.num_groups(); ++g) {
    os << "  g" << g << " [label=\"";
    for (std::size_t k = 0; k < ir.groups()[g].size(); ++k) {
      const VertexId id = ir.vertices()[ir.groups()[g][k]];
      os << (k ? " " : "") << id.op << ':' << id.qubit;
    }
    os << "\"];\n";
  }
  for (const IrEdge& e : ir.edges())
    os << "  g" << ir.group_of(e.u) << " -- g" << ir.group_of(e.v) << " [label=\""
       << (e.kind == EdgeKind::Gate ? "gate" : "wire") << '/' << e.weight << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace knitgrid
