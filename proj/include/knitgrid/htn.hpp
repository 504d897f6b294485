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
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"
#include "knitgrid/ir.hpp"
#include "knitgrid/optimizer.hpp"
#include "knitgrid/parallel.hpp"
#include "knitgrid/qpd.hpp"
#include "knitgrid/rng.hpp"
#include "knitgrid/simulator.hpp"
#include "knitgrid/tensor.hpp"

namespace knitgrid {

/// Instantiation axis of a quantum tensor. Coordinate r selects option
/// rows[r][j] for slot slot_labels[j]; fused indices carry several slots.
struct QtIndex {
  std::string name;
  std::size_t dim = 0;
  std::vector<std::string> slot_labels;
  std::vector<std::vector<std::size_t>> rows;
  /// Shot weights (QPD hit counts); empty means uniform.
  std::vector<double> weights;

  /// Share of the shot budget of coordinate r along this index.
  double shot_fraction(std::size_t r) const {
    if (weights.empty()) return 1.0 / static_cast<double>(dim);
    double total = 0.0;
    for (double w : weights) total += w;
    return weights[r] / total;
  }
};

/// Blueprint subcircuit with placeholder slots and one index per cut (or per
/// fused cut group).
struct QuantumTensor {
  std::string name;
  Circuit blueprint;
  std::map<std::string, std::vector<Instantiation>> slots;
  std::vector<QtIndex> indices;
  /// Original qubit behind each blueprint qubit (-1 for none).
  std::vector<int> source_qubits;

  const PauliObservable& observable() const { return blueprint.observable(); }

  std::size_t num_coordinates() const {
    std::size_t n = 1;
    for (const QtIndex& i : indices) n *= i.dim;
    return n;
  }

  std::vector<Index> tensor_indices() const {
    std::vector<Index> out;
    for (const QtIndex& i : indices) out.push_back({i.name, i.dim});
    return out;
  }
};

struct HybridTensorNetwork {
  std::vector<QuantumTensor> qts;
  std::vector<Tensor> cts;

  std::size_t num_subcircuit_runs() const {
    std::size_t n = 0;
    for (const QuantumTensor& q : qts) n += q.num_coordinates();
    return n;
  }

  /// Shapes in contraction order: QTs first, then CTs.
  std::vector<TensorShape> shapes() const {
    std::vector<TensorShape> out;
    for (const QuantumTensor& q : qts) out.push_back({q.tensor_indices(), std::nullopt});
    for (const Tensor& t : cts) out.push_back(shape_of(t));
    return out;
  }

  /// Checks index pairing: every index name on exactly one QT and one CT
  /// with matching dimension, slot tables consistent.
  void validate() const {
    std::map<std::string, std::pair<int, std::size_t>> seen;
    auto note = [&](const std::string& name, std::size_t dim) {
      auto [it, fresh] = seen.emplace(name, std::pair{0, dim});
      if (!fresh && it->second.second != dim)
        throw ValidationError("index '" + name + "' has inconsistent dimensions");
      ++it->second.first;
    };
    for (const QuantumTensor& q : qts) {
      for (const QtIndex& i : q.indices) {
        if (i.rows.size() != i.dim) throw ValidationError("index '" + i.name + "' row table size");
        if (!i.weights.empty() && i.weights.size() != i.dim)
          throw ValidationError("index '" + i.name + "' weight table size");
        for (const auto& row : i.rows) {
          if (row.size() != i.slot_labels.size())
            throw ValidationError("index '" + i.name + "' row width");
          for (std::size_t j = 0; j < row.size(); ++j) {
            auto it = q.slots.find(i.slot_labels[j]);
            if (it == q.slots.end() || row[j] >= it->second.size())
              throw ValidationError("index '" + i.name + "' refers to bad slot option");
          }
        }
        note(i.name, i.dim);
      }
    }
    for (const Tensor& t : cts) {
      t.validate();
      for (const Index& i : t.indices) note(i.name, i.dim);
    }
    for (const auto& [name, entry] : seen)
      if (entry.first != 2) throw ValidationError("index '" + name + "' is not shared by exactly two tensors");
  }
};

namespace detail {

struct StagedOp {
  GateKind kind;
  std::vector<int> qubits;
  std::optional<double> param;
  std::string slot;
};

struct StagedLeaf {
  std::vector<StagedOp> ops;
  std::string observable;
  std::vector<int> source;
  std::vector<std::pair<std::string, std::vector<Instantiation>>> slots;

  int new_qubit(int source_qubit) {
    observable.push_back('I');
    source.push_back(source_qubit);
    return static_cast<int>(observable.size()) - 1;
  }
  void placeholder(int q, std::string label, std::vector<Instantiation> options) {
    ops.push_back({GateKind::PLACEHOLDER, {q}, std::nullopt, label});
    slots.emplace_back(std::move(label), std::move(options));
  }
};

}  // namespace detail

/// One QT per tree leaf and one CT per cut edge. Gate-cut slots are
/// "g<op>a" (first qubit) and "g<op>b"; wire-cut slots are "w<q>_<op>a"
/// (upstream measurement) and "w<q>_<op>b" (downstream preparation), where
/// <op> is the first downstream operation.
inline HybridTensorNetwork generate_htn(const Candidate& candidate, const Circuit& circuit) {
  if (!candidate.feasible) throw InfeasibleError("generate_htn: candidate is infeasible");
  const IrGraph& ir = candidate.ir;
  if (ir.num_qubits() != circuit.num_qubits())
    throw ValidationError("generate_htn: candidate was compiled for another circuit");
  const auto owner = leaf_assignment(candidate.tree, ir);
  const std::size_t num_leaves = std::max<std::size_t>(1, candidate.tree.num_leaves());
  std::vector<detail::StagedLeaf> leaves(num_leaves);
  HybridTensorNetwork htn;

  const auto n = static_cast<std::size_t>(circuit.num_qubits());
  std::vector<int> cur_leaf(n, -1), cur_local(n, -1);
  for (const Op& op : circuit.ops()) {
    std::vector<int> leaf_of, local_of;
    for (int q : op.qubits) {
      const std::size_t v = ir.vertex_index({op.index, q});
      const int k = static_cast<int>(owner[ir.group_of(v)]);
      const auto uq = static_cast<std::size_t>(q);
      if (cur_leaf[uq] != k) {
        const int local = leaves[static_cast<std::size_t>(k)].new_qubit(q);
        if (cur_leaf[uq] >= 0) {
          const QpdSpec spec = qpd_wire();
          const std::string base = "w" + std::to_string(q) + "_" + std::to_string(op.index);
          leaves[static_cast<std::size_t>(cur_leaf[uq])].placeholder(cur_local[uq], base + "a", spec.inst_a);
          leaves[static_cast<std::size_t>(k)].placeholder(local, base + "b", spec.inst_b);
          htn.cts.push_back({"c" + base,
                             {{base + "a", spec.rows()}, {base + "b", spec.cols()}},
                             spec.coeffs,
                             TensorRole::WireCoefficient});
        }
        cur_leaf[uq] = k;
        cur_local[uq] = local;
      }
      leaf_of.push_back(k);
      local_of.push_back(cur_local[uq]);
    }
    if (op.qubits.size() == 1 || leaf_of[0] == leaf_of[1]) {
      leaves[static_cast<std::size_t>(leaf_of[0])].ops.push_back({op.kind, local_of, op.param, {}});
      continue;
    }
    if (!is_cuttable(op.kind))
      throw ValidationError("generate_htn: cut on non-cuttable " + std::string(gate_name(op.kind)));
    const QpdSpec spec = qpd_for(op.kind, op.param);
    const std::string base = "g" + std::to_string(op.index);
    leaves[static_cast<std::size_t>(leaf_of[0])].placeholder(local_of[0], base + "a", spec.inst_a);
    leaves[static_cast<std::size_t>(leaf_of[1])].placeholder(local_of[1], base + "b", spec.inst_b);
    htn.cts.push_back({"c" + base,
                       {{base + "a", spec.rows()}, {base + "b", spec.cols()}},
                       spec.coeffs,
                       TensorRole::GateCoefficient});
  }

  const PauliObservable& obs = circuit.observable();
  for (std::size_t q = 0; q < n; ++q) {
    const char p = obs.paulis[q];
    if (cur_leaf[q] >= 0) {
      leaves[static_cast<std::size_t>(cur_leaf[q])].observable[static_cast<std::size_t>(cur_local[q])] = p;
    } else if (p != 'I') {
      const int local = leaves[0].new_qubit(static_cast<int>(q));
      leaves[0].observable[static_cast<std::size_t>(local)] = p;
    }
  }

  for (std::size_t k = 0; k < num_leaves; ++k) {
    detail::StagedLeaf& s = leaves[k];
    if (s.observable.empty()) s.new_qubit(-1);
    QuantumTensor qt;
    qt.name = "qt" + std::to_string(k);
    qt.blueprint = Circuit(static_cast<int>(s.observable.size()));
    for (auto& op : s.ops) qt.blueprint.add(op.kind, op.qubits, op.param, op.slot);
    qt.blueprint.set_observable(s.observable);
    qt.source_qubits = s.source;
    for (auto& [label, options] : s.slots) {
      QtIndex idx{label, options.size(), {label}, {}, {}};
      for (std::size_t r = 0; r < options.size(); ++r) idx.rows.push_back({r});
      qt.indices.push_back(std::move(idx));
      qt.slots.emplace(label, std::move(options));
    }
    htn.qts.push_back(std::move(qt));
  }
  return htn;
}

namespace detail {

/// QT owning each index name.
inline std::map<std::string, std::size_t> index_owners(const HybridTensorNetwork& htn) {
  std::map<std::string, std::size_t> out;
  for (std::size_t k = 0; k < htn.qts.size(); ++k)
    for (const QtIndex& i : htn.qts[k].indices) out[i.name] = k;
  return out;
}

inline std::size_t find_qt_index(const QuantumTensor& qt, const std::string& name) {
  for (std::size_t j = 0; j < qt.indices.size(); ++j)
    if (qt.indices[j].name == name) return j;
  throw ValidationError("index '" + name + "' not found on " + qt.name);
}

/// Transpose of a matrix CT.
inline Tensor transposed(const Tensor& t) {
  const std::size_t r = t.indices[0].dim, c = t.indices[1].dim;
  Tensor out{t.name, {t.indices[1], t.indices[0]}, std::vector<double>(r * c), t.role};
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.data[j * r + i] = t.data[i * c + j];
  return out;
}

inline QtIndex fuse_indices(const std::vector<const QtIndex*>& parts) {
  QtIndex out;
  out.dim = 1;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    out.name += (p ? "*" : "") + parts[p]->name;
    out.slot_labels.insert(out.slot_labels.end(), parts[p]->slot_labels.begin(),
                           parts[p]->slot_labels.end());
    out.dim *= parts[p]->dim;
  }
  for (std::size_t r = 0; r < out.dim; ++r) {
    std::vector<std::size_t> row;
    std::size_t rest = r;
    std::vector<std::size_t> digit(parts.size());
    for (std::size_t p = parts.size(); p-- > 0;) {
      digit[p] = rest % parts[p]->dim;
      rest /= parts[p]->dim;
    }
    for (std::size_t p = 0; p < parts.size(); ++p)
      row.insert(row.end(), parts[p]->rows[digit[p]].begin(), parts[p]->rows[digit[p]].end());
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace detail

/// Kronecker product of matrices, row-major over (first factor most
/// significant).
inline std::vector<double> kronecker(const std::vector<const Tensor*>& mats) {
  std::vector<double> out{1.0};
  std::size_t rows = 1, cols = 1;
  for (const Tensor* m : mats) {
    const std::size_t r = m->indices[0].dim, c = m->indices[1].dim;
    std::vector<double> next(rows * r * cols * c);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t a = 0; a < r; ++a)
          for (std::size_t b = 0; b < c; ++b)
            next[(i * r + a) * (cols * c) + (j * c + b)] = out[i * cols + j] * m->data[a * c + b];
    out = std::move(next);
    rows *= r;
    cols *= c;
  }
  return out;
}

/// Fuses all CTs of one class (gate or wire) between the same QT pair into a
/// single CT; the matching QT indices become one joint index.
inline HybridTensorNetwork simplify(const HybridTensorNetwork& in) {
  in.validate();
  HybridTensorNetwork out = in;
  out.cts.clear();
  const auto owner = detail::index_owners(in);
  // (qt_lo, qt_hi, role) -> CTs oriented lo -> hi, in original order.
  std::map<std::tuple<std::size_t, std::size_t, int>, std::vector<Tensor>> groups;
  std::vector<std::tuple<std::size_t, std::size_t, int>> order;
  for (const Tensor& t : in.cts) {
    if (t.indices.size() != 2) throw ValidationError("simplify: CT '" + t.name + "' is not a matrix");
    const std::size_t a = owner.at(t.indices[0].name), b = owner.at(t.indices[1].name);
    const auto key = std::tuple(std::min(a, b), std::max(a, b), static_cast<int>(t.role));
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(a <= b ? t : detail::transposed(t));
  }
  for (const auto& key : order) {
    auto& cts = groups[key];
    if (cts.size() == 1) {
      out.cts.push_back(cts[0]);
      continue;
    }
    std::vector<const Tensor*> mats;
    for (const Tensor& t : cts) mats.push_back(&t);
    Tensor fused;
    fused.role = cts[0].role;
    for (int side = 0; side < 2; ++side) {
      QuantumTensor& qt = out.qts[side == 0 ? std::get<0>(key) : std::get<1>(key)];
      std::vector<const QtIndex*> parts;
      std::vector<std::size_t> positions;
      for (const Tensor& t : cts) positions.push_back(detail::find_qt_index(qt, t.indices[side].name));
      for (std::size_t p : positions) parts.push_back(&qt.indices[p]);
      QtIndex joint = detail::fuse_indices(parts);
      fused.indices.push_back({joint.name, joint.dim});
      const std::size_t first = *std::min_element(positions.begin(), positions.end());
      std::vector<QtIndex> kept;
      for (std::size_t j = 0; j < qt.indices.size(); ++j) {
        if (j == first) kept.push_back(joint);
        if (std::find(positions.begin(), positions.end(), j) == positions.end())
          kept.push_back(std::move(qt.indices[j]));
      }
      qt.indices = std::move(kept);
    }
    fused.name = cts[0].name;
    for (std::size_t i = 1; i < cts.size(); ++i) fused.name += "*" + cts[i].name;
    fused.data = kronecker(mats);
    out.cts.push_back(std::move(fused));
  }
  out.validate();
  return out;
}

/// Kept coordinates and hit counts of one sampled index.
struct SampledIndex {
  std::vector<std::size_t> kept;
  std::vector<double> weights;
};

struct SamplingPlan {
  /// Samples per gate CT; nullopt means exhaustive.
  std::optional<std::size_t> total_samples;
  std::map<std::string, SampledIndex> indices;
};

/// Replaces every gate CT by an unbiased s-sample estimate (entries
/// sign * ||C||_1 * hits / s) and truncates rows/columns that were never hit,
/// both in the CT and in the QT index tables. Wire CTs are kept whole.
inline std::pair<HybridTensorNetwork, SamplingPlan> sample_qpd(const HybridTensorNetwork& in,
                                                               std::optional<std::size_t> samples,
                                                               std::uint64_t seed) {
  SamplingPlan plan{samples, {}};
  if (!samples) return {in, plan};
  if (*samples < 1) throw ValidationError("sample_qpd: sample count must be >= 1");
  in.validate();
  HybridTensorNetwork out = in;
  const auto owner = detail::index_owners(in);
  const double s = static_cast<double>(*samples);
  for (std::size_t t = 0; t < out.cts.size(); ++t) {
    Tensor& ct = out.cts[t];
    if (ct.role != TensorRole::GateCoefficient) continue;
    if (ct.indices.size() != 2) throw ValidationError("sample_qpd: CT '" + ct.name + "' is not a matrix");
    const std::size_t rows = ct.indices[0].dim, cols = ct.indices[1].dim;
    std::vector<double> mag(ct.data.size());
    double l1 = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) l1 += mag[i] = std::abs(ct.data[i]);
    if (l1 == 0.0) throw ValidationError("sample_qpd: CT '" + ct.name + "' is zero");
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::discrete_distribution<std::size_t> draw(mag.begin(), mag.end());
    std::vector<double> hits(mag.size(), 0.0);
    for (std::size_t k = 0; k < *samples; ++k) hits[draw(rng)] += 1.0;

    std::vector<double> row_hits(rows, 0.0), col_hits(cols, 0.0);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) {
        row_hits[i] += hits[i * cols + j];
        col_hits[j] += hits[i * cols + j];
      }
    SampledIndex keep_r, keep_c;
    for (std::size_t i = 0; i < rows; ++i)
      if (row_hits[i] > 0) keep_r.kept.push_back(i), keep_r.weights.push_back(row_hits[i]);
    for (std::size_t j = 0; j < cols; ++j)
      if (col_hits[j] > 0) keep_c.kept.push_back(j), keep_c.weights.push_back(col_hits[j]);

    std::vector<double> data;
    for (std::size_t i : keep_r.kept)
      for (std::size_t j : keep_c.kept) {
        const double c = ct.data[i * cols + j];
        data.push_back(c == 0.0 ? 0.0 : std::copysign(l1 * hits[i * cols + j] / s, c));
      }
    ct.data = std::move(data);
    for (int side = 0; side < 2; ++side) {
      const SampledIndex& keep = side == 0 ? keep_r : keep_c;
      Index& ci = ct.indices[static_cast<std::size_t>(side)];
      QuantumTensor& qt = out.qts[owner.at(ci.name)];
      QtIndex& qi = qt.indices[detail::find_qt_index(qt, ci.name)];
      std::vector<std::vector<std::size_t>> kept_rows;
      for (std::size_t r : keep.kept) kept_rows.push_back(qi.rows[r]);
      qi.rows = std::move(kept_rows);
      qi.dim = keep.kept.size();
      qi.weights = keep.weights;
      ci.dim = keep.kept.size();
      plan.indices[ci.name] = keep;
    }
  }
  out.validate();
  return {std::move(out), plan};
}

/// Concrete circuit and observable of one QT coordinate.
inline std::pair<Circuit, PauliObservable> instantiate(const QuantumTensor& qt,
                                                       const std::vector<std::size_t>& coord) {
  if (coord.size() != qt.indices.size()) throw ValidationError("instantiate: coordinate rank");
  std::map<std::string, const Instantiation*> chosen;
  for (std::size_t j = 0; j < coord.size(); ++j) {
    const QtIndex& idx = qt.indices[j];
    if (coord[j] >= idx.dim) throw ValidationError("instantiate: coordinate out of range");
    for (std::size_t k = 0; k < idx.slot_labels.size(); ++k)
      chosen[idx.slot_labels[k]] = &qt.slots.at(idx.slot_labels[k])[idx.rows[coord[j]][k]];
  }
  Circuit c(qt.blueprint.num_qubits());
  PauliObservable obs = qt.observable();
  for (const Op& op : qt.blueprint.ops()) {
    if (op.kind != GateKind::PLACEHOLDER) {
      c.add(op.kind, op.qubits, op.param);
      continue;
    }
    auto it = chosen.find(op.slot);
    if (it == chosen.end()) throw ValidationError("instantiate: slot '" + op.slot + "' has no index");
    for (GateKind g : it->second->gates) c.add(g, op.qubits);
    if (it->second->observable) obs.paulis[static_cast<std::size_t>(op.qubits[0])] = it->second->observable;
  }
  return {std::move(c), std::move(obs)};
}

/// Exact expectation, or a shot-based estimate with the given budget.
struct EvalMode {
  enum class Kind { Exact, Shots } kind = Kind::Exact;
  std::uint64_t shots = 20000;

  static EvalMode exact() { return {}; }
  static EvalMode with_shots(std::uint64_t n) { return {Kind::Shots, n}; }
};

/// Backend running concrete subcircuits.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual int max_qubits() const = 0;
  virtual double exact(const Circuit& c, const PauliObservable& obs) const = 0;
  virtual double sampled(const Circuit& c, const PauliObservable& obs, std::uint64_t shots,
                         std::uint64_t seed) const = 0;
};

class SimulatorExecutor final : public Executor {
 public:
  explicit SimulatorExecutor(SimulatorOptions opt = {}) : opt_(opt) {}
  int max_qubits() const override { return opt_.max_qubits; }
  double exact(const Circuit& c, const PauliObservable& obs) const override {
    return exact_expectation(c, obs, opt_);
  }
  double sampled(const Circuit& c, const PauliObservable& obs, std::uint64_t shots,
                 std::uint64_t seed) const override {
    return sample_expectation(c, obs, shots, seed, opt_);
  }

 private:
  SimulatorOptions opt_;
};

namespace detail {

inline std::vector<std::size_t> unravel(const QuantumTensor& qt, std::size_t flat) {
  std::vector<std::size_t> coord(qt.indices.size());
  for (std::size_t j = qt.indices.size(); j-- > 0;) {
    coord[j] = flat % qt.indices[j].dim;
    flat /= qt.indices[j].dim;
  }
  return coord;
}

inline std::string coord_string(const std::vector<std::size_t>& coord) {
  std::string s = "(";
  for (std::size_t j = 0; j < coord.size(); ++j) s += (j ? "," : "") + std::to_string(coord[j]);
  return s + ")";
}

inline double evaluate_coordinate(const QuantumTensor& qt, std::size_t flat, const Executor& ex,
                                  const EvalMode& mode, std::uint64_t seed) {
  const auto coord = unravel(qt, flat);
  try {
    auto [c, obs] = instantiate(qt, coord);
    if (mode.kind == EvalMode::Kind::Exact) return ex.exact(c, obs);
    double share = 1.0;
    for (std::size_t j = 0; j < coord.size(); ++j) share *= qt.indices[j].shot_fraction(coord[j]);
    const auto shots = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::llround(static_cast<double>(mode.shots) * share)));
    return ex.sampled(c, obs, shots, derive_seed(seed, {static_cast<std::uint64_t>(flat)}));
  } catch (const std::exception& e) {
    throw EvaluationError(qt.name + " at coordinate " + coord_string(coord) + ": " + e.what());
  }
}

}  // namespace detail

/// Evaluates every coordinate of `qt`; entries are raw expectations (signs
/// stay in the CTs). Coordinates run in parallel with per-coordinate seeds.
inline Tensor evaluate_qt(const QuantumTensor& qt, const Executor& executor, const EvalMode& mode,
                          std::uint64_t seed = 0, std::size_t threads = default_thread_count()) {
  if (qt.blueprint.num_qubits() > executor.max_qubits())
    throw CapacityError(qt.name + " needs " + std::to_string(qt.blueprint.num_qubits()) +
                        " qubits, executor cap is " + std::to_string(executor.max_qubits()));
  Tensor out{qt.name, qt.tensor_indices(), std::vector<double>(qt.num_coordinates()),
             TensorRole::Result};
  parallel_for(
      out.data.size(),
      [&](std::size_t flat) { out.data[flat] = detail::evaluate_coordinate(qt, flat, executor, mode, seed); },
      threads);
  return out;
}

/// All QTs of `htn` in one parallel fan-out over (QT, coordinate) jobs.
inline std::vector<Tensor> evaluate_all(const HybridTensorNetwork& htn, const Executor& executor,
                                        const EvalMode& mode, std::uint64_t seed = 0,
                                        std::size_t threads = default_thread_count()) {
  std::vector<Tensor> out;
  std::vector<std::pair<std::size_t, std::size_t>> jobs;
  for (std::size_t k = 0; k < htn.qts.size(); ++k) {
    const QuantumTensor& qt = htn.qts[k];
    if (qt.blueprint.num_qubits() > executor.max_qubits())
      throw CapacityError(qt.name + " needs " + std::to_string(qt.blueprint.num_qubits()) +
                          " qubits, executor cap is " + std::to_string(executor.max_qubits()));
    out.push_back({qt.name, qt.tensor_indices(), std::vector<double>(qt.num_coordinates()),
                   TensorRole::Result});
    for (std::size_t f = 0; f < out.back().data.size(); ++f) jobs.emplace_back(k, f);
  }
  parallel_for(
      jobs.size(),
      [&](std::size_t j) {
        const auto [k, f] = jobs[j];
        out[k].data[f] = detail::evaluate_coordinate(htn.qts[k], f, executor, mode,
                                                     derive_seed(seed, {static_cast<std::uint64_t>(k)}));
      },
      threads);
  return out;
}

// ---- JSON ----

inline nlohmann::ordered_json htn_to_json(const HybridTensorNetwork& htn) {
  using J = nlohmann::ordered_json;
  J doc;
  doc["qts"] = J::array();
  for (const QuantumTensor& qt : htn.qts) {
    J q;
    q["name"] = qt.name;
    q["circuit"] = J::parse(serialize_circuit(qt.blueprint));
    q["source_qubits"] = qt.source_qubits;
    J slots = J::object();
    for (const auto& [label, options] : qt.slots) {
      J list = J::array();
      for (const Instantiation& inst : options) {
        J o;
        o["gates"] = J::array();
        for (GateKind g : inst.gates) o["gates"].push_back(std::string(gate_name(g)));
        if (inst.observable) o["observable"] = std::string(1, inst.observable);
        list.push_back(std::move(o));
      }
      slots[label] = std::move(list);
    }
    q["slots"] = std::move(slots);
    q["indices"] = J::array();
    for (const QtIndex& i : qt.indices) {
      J ij;
      ij["name"] = i.name;
      ij["dim"] = i.dim;
      ij["slots"] = i.slot_labels;
      ij["rows"] = i.rows;
      if (!i.weights.empty()) ij["weights"] = i.weights;
      q["indices"].push_back(std::move(ij));
    }
    doc["qts"].push_back(std::move(q));
  }
  doc["cts"] = J::array();
  for (const Tensor& t : htn.cts) {
    J c;
    c["name"] = t.name;
    c["role"] = t.role == TensorRole::WireCoefficient ? "wire" : "gate";
    c["indices"] = J::array();
    for (const Index& i : t.indices) c["indices"].push_back({{"name", i.name}, {"dim", i.dim}});
    c["data"] = t.data;
    doc["cts"].push_back(std::move(c));
  }
  return doc;
}

inline std::string serialize_htn(const HybridTensorNetwork& htn) { return htn_to_json(htn).dump(); }

inline HybridTensorNetwork htn_from_json(const nlohmann::ordered_json& doc) {
  try {
    HybridTensorNetwork htn;
    for (const auto& q : doc.at("qts")) {
      QuantumTensor qt;
      qt.name = q.at("name").get<std::string>();
      qt.blueprint = circuit_from_json(q.at("circuit"));
      if (q.contains("source_qubits")) qt.source_qubits = q.at("source_qubits").get<std::vector<int>>();
      for (const auto& [label, list] : q.at("slots").items()) {
        std::vector<Instantiation> options;
        for (const auto& o : list) {
          Instantiation inst;
          for (const auto& g : o.at("gates")) {
            auto kind = gate_from_name(g.get<std::string>());
            if (!kind) throw ParseError("unknown gate '" + g.get<std::string>() + "' in slot " + label);
            inst.gates.push_back(*kind);
          }
          if (o.contains("observable")) {
            const auto p = o.at("observable").get<std::string>();
            if (p.size() != 1 || !is_pauli_string(p)) throw ParseError("bad slot observable '" + p + "'");
            inst.observable = p[0];
          }
          options.push_back(std::move(inst));
        }
        qt.slots.emplace(label, std::move(options));
      }
      for (const auto& ij : q.at("indices")) {
        QtIndex i;
        i.name = ij.at("name").get<std::string>();
        i.dim = ij.at("dim").get<std::size_t>();
        i.slot_labels = ij.at("slots").get<std::vector<std::string>>();
        i.rows = ij.at("rows").get<std::vector<std::vector<std::size_t>>>();
        if (ij.contains("weights")) i.weights = ij.at("weights").get<std::vector<double>>();
        qt.indices.push_back(std::move(i));
      }
      htn.qts.push_back(std::move(qt));
    }
    for (const auto& c : doc.at("cts")) {
      Tensor t;
      t.name = c.at("name").get<std::string>();
      const auto role = c.at("role").get<std::string>();
      if (role != "gate" && role != "wire") throw ParseError("unknown CT role '" + role + "'");
      t.role = role == "wire" ? TensorRole::WireCoefficient : TensorRole::GateCoefficient;
      for (const auto& ij : c.at("indices"))
        t.indices.push_back({ij.at("name").get<std::string>(), ij.at("dim").get<std::size_t>()});
      t.data = c.at("data").get<std::vector<double>>();
      htn.cts.push_back(std::move(t));
    }
    htn.validate();
    return htn;
  } catch (const ParseError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed h-TN: ") + e.what());
  } catch (const ValidationError& e) {
    throw ParseError(std::string("invalid h-TN: ") + e.what());
  }
}

inline HybridTensorNetwork parse_htn(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("h-TN is not valid JSON: ") + e.what());
  }
  return htn_from_json(doc);
}

}  // namespace knitgrid
