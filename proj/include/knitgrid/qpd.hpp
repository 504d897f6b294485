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

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"

namespace knitgrid {

enum class CutKind { GateCZ, GateRZZ, Wire };

inline std::string_view cut_kind_name(CutKind k) {
  switch (k) {
    case CutKind::GateCZ: return "cz";
    case CutKind::GateRZZ: return "rzz";
    case CutKind::Wire: return "wire";
  }
  return "?";
}

/// One side of a QPD term: single-qubit ops inserted at the cut site, or, for
/// the upstream side of a wire cut, a Pauli measured on the cut qubit at the
/// end of the subcircuit (`observable` != 0, no gates).
struct Instantiation {
  std::vector<GateKind> gates;
  char observable = 0;

  friend bool operator==(const Instantiation&, const Instantiation&) = default;
};

/// Coefficient matrix of one cut, rows indexed by the upstream (first qubit)
/// instantiations, columns by the downstream ones.
struct QpdSpec {
  CutKind kind = CutKind::GateCZ;
  double theta = 0.0;
  std::vector<Instantiation> inst_a;
  std::vector<Instantiation> inst_b;
  std::vector<double> coeffs;  // row-major, inst_a.size() x inst_b.size()
  /// Sampling 1-norm; sampling_overhead() is gamma^2.
  double gamma = 1.0;
  /// Instance count of the conventional (vector-form) decomposition; feeds
  /// the naive postprocessing cost.
  std::size_t naive_instances = 0;

  std::size_t rows() const { return inst_a.size(); }
  std::size_t cols() const { return inst_b.size(); }
  double coeff(std::size_t a, std::size_t b) const { return coeffs[a * cols() + b]; }

  double coeff_l1() const {
    double s = 0.0;
    for (double c : coeffs) s += std::abs(c);
    return s;
  }
  std::size_t nonzeros() const {
    std::size_t n = 0;
    for (double c : coeffs) n += c != 0.0;
    return n;
  }
};

namespace detail {

inline Instantiation gates(std::initializer_list<GateKind> g) { return {std::vector<GateKind>(g), 0}; }

inline QpdSpec make_spec(CutKind kind, double theta, std::vector<Instantiation> a,
                         std::vector<Instantiation> b, std::vector<double> coeffs, double gamma,
                         std::size_t naive_instances) {
  QpdSpec s{kind, theta, std::move(a), std::move(b), std::move(coeffs), gamma, naive_instances};
  if (s.coeffs.size() != s.rows() * s.cols())
    throw ValidationError("coefficient matrix does not match instantiation lists");
  return s;
}

}  // namespace detail

/// Decomposition of a cuttable gate (CZ, RZZ with parameter).
inline QpdSpec qpd_for(GateKind kind, std::optional<double> param = std::nullopt) {
  using GK = GateKind;
  using detail::gates;
  if (kind == GK::CZ) {
    // [S†, S, S†∘Meas, I, Z] on both sides.
    std::vector<Instantiation> inst{gates({GK::SDG}), gates({GK::S}), gates({GK::MEAS, GK::SDG}),
                                    gates({}), gates({GK::Z})};
    std::vector<double> c(25, 0.0);
    c[0 * 5 + 0] = 0.5;
    c[1 * 5 + 1] = 0.5;
    c[2 * 5 + 3] = 0.5;
    c[2 * 5 + 4] = -0.5;
    c[3 * 5 + 2] = 0.5;
    c[4 * 5 + 2] = -0.5;
    return detail::make_spec(CutKind::GateCZ, 0.0, inst, inst, std::move(c), 3.0, 6);
  }
  if (kind == GK::RZZ) {
    if (!param) throw ValidationError("qpd_for: RZZ requires an angle");
    const double theta = *param;
    const double half = -theta / 2;
    const double cs = std::cos(half) * std::sin(half);
    // [I, Z, Meas, S, S†] on both sides.
    std::vector<Instantiation> inst{gates({}), gates({GK::Z}), gates({GK::MEAS}), gates({GK::S}),
                                    gates({GK::SDG})};
    std::vector<double> c(25, 0.0);
    c[0 * 5 + 0] = std::cos(half) * std::cos(half);
    c[1 * 5 + 1] = std::sin(half) * std::sin(half);
    c[2 * 5 + 3] = -cs;
    c[2 * 5 + 4] = cs;
    c[3 * 5 + 2] = -cs;
    c[4 * 5 + 2] = cs;
    double gamma = 0.0;
    for (double v : c) gamma += std::abs(v);
    return detail::make_spec(CutKind::GateRZZ, theta, inst, inst, std::move(c), gamma, 6);
  }
  throw ValidationError("qpd_for: " + std::string(gate_name(kind)) + " is not cuttable");
}

/// Wire cut: measure A = (I, Z, X, Y) upstream, prepare B = (|0>, |1>, |+>, |i>)
/// downstream.
inline QpdSpec qpd_wire() {
  using GK = GateKind;
  std::vector<Instantiation> a{{{}, 'I'}, {{}, 'Z'}, {{}, 'X'}, {{}, 'Y'}};
  std::vector<Instantiation> b{detail::gates({GK::PREP0}), detail::gates({GK::PREP1}),
                               detail::gates({GK::PREPPLUS}), detail::gates({GK::PREPI})};
  std::vector<double> c{0.5,  0.5,  0.0, 0.0,   //
                        0.5,  -0.5, 0.0, 0.0,   //
                        -0.5, -0.5, 1.0, 0.0,   //
                        -0.5, -0.5, 0.0, 1.0};
  return detail::make_spec(CutKind::Wire, 0.0, std::move(a), std::move(b), std::move(c), 4.0, 8);
}

inline QpdSpec qpd_for(CutKind kind, std::optional<double> param = std::nullopt) {
  switch (kind) {
    case CutKind::GateCZ: return qpd_for(GateKind::CZ);
    case CutKind::GateRZZ: return qpd_for(GateKind::RZZ, param);
    case CutKind::Wire: return qpd_wire();
  }
  throw ValidationError("qpd_for: unknown cut kind");
}

/// Multiplicative factor on the shot budget for fixed precision.
inline double sampling_overhead(const QpdSpec& spec) { return spec.gamma * spec.gamma; }

/// Cost of the brute-force global-coefficient sum: |C| (s + n_g - 1) with
/// |C| the product of per-cut instance counts.
inline double naive_pp_cost(std::span<const std::size_t> instances_per_cut,
                            std::size_t num_subcircuits) {
  if (instances_per_cut.empty()) return 0.0;
  double global = 1.0;
  for (std::size_t n : instances_per_cut) global *= static_cast<double>(n);
  return global * static_cast<double>(num_subcircuits + instances_per_cut.size() - 1);
}

}  // namespace knitgrid
