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
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "knitgrid/error.hpp"

namespace knitgrid {

enum class GateKind {
  H, X, Y, Z, S, SDG, RX, RY, RZ, CZ, RZZ,
  MEAS, PREP0, PREP1, PREPPLUS, PREPI, PLACEHOLDER
};

inline constexpr std::array<std::pair<GateKind, std::string_view>, 17> kGateNames{{
    {GateKind::H, "h"},         {GateKind::X, "x"},         {GateKind::Y, "y"},
    {GateKind::Z, "z"},         {GateKind::S, "s"},         {GateKind::SDG, "sdg"},
    {GateKind::RX, "rx"},       {GateKind::RY, "ry"},       {GateKind::RZ, "rz"},
    {GateKind::CZ, "cz"},       {GateKind::RZZ, "rzz"},     {GateKind::MEAS, "meas"},
    {GateKind::PREP0, "prep0"}, {GateKind::PREP1, "prep1"}, {GateKind::PREPPLUS, "prepplus"},
    {GateKind::PREPI, "prepi"}, {GateKind::PLACEHOLDER, "placeholder"},
}};

inline std::string_view gate_name(GateKind k) {
  for (const auto& [kind, name] : kGateNames)
    if (kind == k) return name;
  return "?";
}

inline std::optional<GateKind> gate_from_name(std::string_view name) {
  for (const auto& [kind, n] : kGateNames)
    if (n == name) return kind;
  return std::nullopt;
}

constexpr bool is_two_qubit(GateKind k) { return k == GateKind::CZ || k == GateKind::RZZ; }
constexpr bool is_cuttable(GateKind k) { return is_two_qubit(k); }
constexpr bool is_parametric(GateKind k) {
  return k == GateKind::RX || k == GateKind::RY || k == GateKind::RZ || k == GateKind::RZZ;
}
/// Single-qubit unitary gates (what the error model counts as 1q gates).
constexpr bool is_single_qubit_gate(GateKind k) {
  switch (k) {
    case GateKind::H: case GateKind::X: case GateKind::Y: case GateKind::Z:
    case GateKind::S: case GateKind::SDG: case GateKind::RX: case GateKind::RY:
    case GateKind::RZ:
      return true;
    default:
      return false;
  }
}

struct Op {
  std::size_t index = 0;
  GateKind kind = GateKind::H;
  std::vector<int> qubits;
  std::optional<double> param;
  /// Slot label, PLACEHOLDER only.
  std::string slot;

  friend bool operator==(const Op&, const Op&) = default;
};

/// Pauli string; character i acts on qubit i.
struct PauliObservable {
  std::string paulis;

  std::size_t size() const { return paulis.size(); }
  friend bool operator==(const PauliObservable&, const PauliObservable&) = default;
};

inline bool is_pauli_string(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; });
}

/// Restriction of `obs` to `qubit_subset`, in subset order.
inline PauliObservable tensor_factor(const PauliObservable& obs, std::span<const int> qubit_subset) {
  if (qubit_subset.empty()) throw ValidationError("tensor_factor: empty qubit subset");
  PauliObservable out;
  out.paulis.reserve(qubit_subset.size());
  for (int q : qubit_subset) {
    if (q < 0 || static_cast<std::size_t>(q) >= obs.size())
      throw ValidationError("tensor_factor: qubit " + std::to_string(q) + " out of range");
    out.paulis.push_back(obs.paulis[static_cast<std::size_t>(q)]);
  }
  return out;
}

/// Ordered gate list over `num_qubits` qubits plus a Pauli observable.
/// Immutable in practice once built: builders append, nothing rewrites.
class Circuit {
 public:
  Circuit() = default;
  explicit Circuit(int num_qubits)
      : num_qubits_(num_qubits), observable_{std::string(static_cast<std::size_t>(std::max(num_qubits, 0)), 'I')} {
    if (num_qubits < 1) throw ValidationError("circuit needs at least one qubit");
  }

  int num_qubits() const { return num_qubits_; }
  const std::vector<Op>& ops() const { return ops_; }
  const PauliObservable& observable() const { return observable_; }
  const std::vector<std::pair<std::string, std::string>>& meta() const { return meta_; }

  void set_observable(PauliObservable obs) {
    if (obs.size() != static_cast<std::size_t>(num_qubits_) || !is_pauli_string(obs.paulis))
      throw ValidationError("observable '" + obs.paulis + "' does not match " +
                            std::to_string(num_qubits_) + " qubits");
    observable_ = std::move(obs);
  }
  void set_observable(std::string paulis) { set_observable(PauliObservable{std::move(paulis)}); }

  void add_meta(std::string key, std::string value) {
    meta_.emplace_back(std::move(key), std::move(value));
  }

  /// Appends a validated op and returns its index.
  std::size_t add(GateKind kind, std::vector<int> qubits, std::optional<double> param = std::nullopt,
                  std::string slot = {}) {
    Op op{ops_.size(), kind, std::move(qubits), param, std::move(slot)};
    check_op(op);
    ops_.push_back(std::move(op));
    return ops_.back().index;
  }

  // Convenience builders.
  std::size_t h(int q) { return add(GateKind::H, {q}); }
  std::size_t x(int q) { return add(GateKind::X, {q}); }
  std::size_t y(int q) { return add(GateKind::Y, {q}); }
  std::size_t z(int q) { return add(GateKind::Z, {q}); }
  std::size_t s(int q) { return add(GateKind::S, {q}); }
  std::size_t sdg(int q) { return add(GateKind::SDG, {q}); }
  std::size_t rx(int q, double t) { return add(GateKind::RX, {q}, t); }
  std::size_t ry(int q, double t) { return add(GateKind::RY, {q}, t); }
  std::size_t rz(int q, double t) { return add(GateKind::RZ, {q}, t); }
  std::size_t cz(int a, int b) { return add(GateKind::CZ, {a, b}); }
  std::size_t rzz(int a, int b, double t) { return add(GateKind::RZZ, {a, b}, t); }
  std::size_t meas(int q) { return add(GateKind::MEAS, {q}); }

  friend bool operator==(const Circuit&, const Circuit&) = default;

 private:
  void check_op(const Op& op) const {
    const std::size_t want = is_two_qubit(op.kind) ? 2 : 1;
    if (op.qubits.size() != want)
      throw ValidationError(std::string(gate_name(op.kind)) + " expects " + std::to_string(want) +
                            " qubit(s)");
    for (int q : op.qubits)
      if (q < 0 || q >= num_qubits_)
        throw ValidationError("qubit index " + std::to_string(q) + " out of range for " +
                              std::string(gate_name(op.kind)));
    if (want == 2 && op.qubits[0] == op.qubits[1])
      throw ValidationError("two-qubit gate on identical qubits");
    if (is_parametric(op.kind) != op.param.has_value())
      throw ValidationError(std::string(gate_name(op.kind)) +
                            (op.param ? " takes no parameter" : " requires a parameter"));
    if (op.kind == GateKind::PLACEHOLDER && op.slot.empty())
      throw ValidationError("placeholder requires a slot label");
    if (op.kind != GateKind::PLACEHOLDER && !op.slot.empty())
      throw ValidationError("slot label only allowed on placeholders");
  }

  int num_qubits_ = 0;
  std::vector<Op> ops_;
  PauliObservable observable_;
  std::vector<std::pair<std::string, std::string>> meta_;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void append_json_string(std::string& out, std::string_view s) {
  out.push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(c);
        }
    }
  }
  out.push_back('"');
}

}  // namespace detail

/// Canonical serialization: compact, fixed field order, 17 significant digits.
inline std::string serialize_circuit(const Circuit& c) {
  std::string out = "{\"qubits\":" + std::to_string(c.num_qubits()) + ",\"ops\":[";
  for (std::size_t i = 0; i < c.ops().size(); ++i) {
    const Op& op = c.ops()[i];
    if (i) out.push_back(',');
    out += "{\"gate\":";
    detail::append_json_string(out, gate_name(op.kind));
    out += ",\"qubits\":[";
    for (std::size_t k = 0; k < op.qubits.size(); ++k) {
      if (k) out.push_back(',');
      out += std::to_string(op.qubits[k]);
    }
    out.push_back(']');
    if (op.param) out += ",\"param\":" + detail::format_double(*op.param);
    if (!op.slot.empty()) {
      out += ",\"slot\":";
      detail::append_json_string(out, op.slot);
    }
    out.push_back('}');
  }
  out += "],\"observable\":";
  detail::append_json_string(out, c.observable().paulis);
  if (!c.meta().empty()) {
    out += ",\"meta\":{";
    for (std::size_t i = 0; i < c.meta().size(); ++i) {
      if (i) out.push_back(',');
      detail::append_json_string(out, c.meta()[i].first);
      out.push_back(':');
      detail::append_json_string(out, c.meta()[i].second);
    }
    out.push_back('}');
  }
  out.push_back('}');
  return out;
}

inline Circuit circuit_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw ParseError("circuit document must be a JSON object");
  for (const auto& [key, _] : doc.items())
    if (key != "qubits" && key != "ops" && key != "observable" && key != "meta")
      throw ParseError("unknown circuit field '" + key + "'");
  if (!doc.contains("qubits") || !doc["qubits"].is_number_integer())
    throw ParseError("'qubits' must be an integer");
  if (!doc.contains("ops") || !doc["ops"].is_array()) throw ParseError("'ops' must be an array");
  if (!doc.contains("observable") || !doc["observable"].is_string())
    throw ParseError("'observable' must be a string");
  try {
    Circuit c(doc["qubits"].get<int>());
    for (const auto& jop : doc["ops"]) {
      if (!jop.is_object() || !jop.contains("gate") || !jop["gate"].is_string() ||
          !jop.contains("qubits") || !jop["qubits"].is_array())
        throw ParseError("op needs 'gate' (string) and 'qubits' (array)");
      for (const auto& [key, _] : jop.items())
        if (key != "gate" && key != "qubits" && key != "param" && key != "slot")
          throw ParseError("unknown op field '" + key + "'");
      const auto name = jop["gate"].get<std::string>();
      auto kind = gate_from_name(name);
      if (!kind) throw ParseError("unknown gate kind '" + name + "'");
      std::vector<int> qubits;
      for (const auto& q : jop["qubits"]) {
        if (!q.is_number_integer()) throw ParseError("qubit indices must be integers");
        qubits.push_back(q.get<int>());
      }
      std::optional<double> param;
      if (jop.contains("param")) {
        if (!jop["param"].is_number()) throw ParseError("'param' must be a number");
        param = jop["param"].get<double>();
      }
      std::string slot;
      if (jop.contains("slot")) {
        if (!jop["slot"].is_string()) throw ParseError("'slot' must be a string");
        slot = jop["slot"].get<std::string>();
      }
      c.add(*kind, std::move(qubits), param, std::move(slot));
    }
    c.set_observable(doc["observable"].get<std::string>());
    if (doc.contains("meta")) {
      if (!doc["meta"].is_object()) throw ParseError("'meta' must be an object");
      for (const auto& [key, value] : doc["meta"].items()) {
        if (!value.is_string()) throw ParseError("meta values must be strings");
        c.add_meta(key, value.get<std::string>());
      }
    }
    return c;
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

inline Circuit parse_circuit(std::string_view text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed circuit JSON: ") + e.what());
  }
  return circuit_from_json(doc);
}

}  // namespace knitgrid
