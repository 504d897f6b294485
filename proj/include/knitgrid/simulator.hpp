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
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "knitgrid/circuit.hpp"
#include "knitgrid/error.hpp"

namespace knitgrid {

using Complex = std::complex<double>;

struct SimulatorOptions {
  int max_qubits = 20;
};

/// Dense statevector. Qubit q is bit q of the amplitude index. Branches of a
/// mid-circuit measurement are kept unnormalized, so norm_weight() is the
/// probability of the branch.
class StateVector {
 public:
  explicit StateVector(int num_qubits)
      : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits, Complex{0.0, 0.0}) {
    amps_[0] = 1.0;
  }

  int num_qubits() const { return num_qubits_; }
  const std::vector<Complex>& amplitudes() const { return amps_; }

  double norm_weight() const {
    double s = 0.0;
    for (const Complex& a : amps_) s += std::norm(a);
    return s;
  }

  /// Row-major 2x2 matrix on qubit q.
  void apply_1q(int q, const std::array<Complex, 4>& m) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const Complex a0 = amps_[i];
        const Complex a1 = amps_[i + stride];
        amps_[i] = m[0] * a0 + m[1] * a1;
        amps_[i + stride] = m[2] * a0 + m[3] * a1;
      }
    }
  }

  void apply_phase_1q(int q, Complex p0, Complex p1) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= (i & bit) ? p1 : p0;
  }

  /// Diagonal two-qubit gate; phases indexed by (bit_a, bit_b) as 2*bit_a + bit_b.
  void apply_phase_2q(int a, int b, const std::array<Complex, 4>& phases) {
    const std::size_t ba = std::size_t{1} << a;
    const std::size_t bb = std::size_t{1} << b;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      amps_[i] *= phases[(i & ba ? 2 : 0) + (i & bb ? 1 : 0)];
  }

  /// Zeroes all amplitudes whose bit q differs from `outcome`.
  void project(int q, int outcome) {
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i)
      if (((i & bit) != 0) != (outcome != 0)) amps_[i] = 0.0;
  }

  /// <psi|P|psi> for an (unnormalized) state.
  Complex pauli_expectation(const PauliObservable& obs) const {
    std::size_t xmask = 0, zmask = 0;
    int num_y = 0;
    for (int q = 0; q < num_qubits_; ++q) {
      const char c = obs.paulis[static_cast<std::size_t>(q)];
      const std::size_t bit = std::size_t{1} << q;
      if (c == 'X' || c == 'Y') xmask |= bit;
      if (c == 'Z' || c == 'Y') zmask |= bit;
      if (c == 'Y') ++num_y;
    }
    static constexpr std::array<Complex, 4> kIPow{Complex{1, 0}, Complex{0, 1}, Complex{-1, 0},
                                                  Complex{0, -1}};
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < amps_.size(); ++i) {
      const double sign = (std::popcount(i & zmask) & 1) ? -1.0 : 1.0;
      acc += std::conj(amps_[i ^ xmask]) * amps_[i] * sign;
    }
    return acc * kIPow[static_cast<std::size_t>(num_y % 4)];
  }

 private:
  int num_qubits_;
  std::vector<Complex> amps_;
};

namespace detail {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline void apply_unitary_op(StateVector& st, const Op& op) {
  using GK = GateKind;
  const int q = op.qubits[0];
  const Complex I{0.0, 1.0};
  switch (op.kind) {
    case GK::H:
      st.apply_1q(q, {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
      return;
    case GK::X:
      st.apply_1q(q, {0.0, 1.0, 1.0, 0.0});
      return;
    case GK::Y:
      st.apply_1q(q, {0.0, -I, I, 0.0});
      return;
    case GK::Z:
      st.apply_phase_1q(q, 1.0, -1.0);
      return;
    case GK::S:
      st.apply_phase_1q(q, 1.0, I);
      return;
    case GK::SDG:
      st.apply_phase_1q(q, 1.0, -I);
      return;
    case GK::RX: {
      const double c = std::cos(*op.param / 2), s = std::sin(*op.param / 2);
      st.apply_1q(q, {c, -I * s, -I * s, c});
      return;
    }
    case GK::RY: {
      const double c = std::cos(*op.param / 2), s = std::sin(*op.param / 2);
      st.apply_1q(q, {c, -s, s, c});
      return;
    }
    case GK::RZ:
      st.apply_phase_1q(q, std::polar(1.0, -*op.param / 2), std::polar(1.0, *op.param / 2));
      return;
    case GK::CZ:
      st.apply_phase_2q(op.qubits[0], op.qubits[1], {1.0, 1.0, 1.0, -1.0});
      return;
    case GK::RZZ: {
      const Complex even = std::polar(1.0, -*op.param / 2);
      const Complex odd = std::polar(1.0, *op.param / 2);
      st.apply_phase_2q(op.qubits[0], op.qubits[1], {even, odd, odd, even});
      return;
    }
    // Preparations act on a fresh |0> qubit.
    case GK::PREP0:
      return;
    case GK::PREP1:
      st.apply_1q(q, {0.0, 1.0, 1.0, 0.0});
      return;
    case GK::PREPPLUS:
      st.apply_1q(q, {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
      return;
    case GK::PREPI:
      st.apply_1q(q, {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
      st.apply_phase_1q(q, 1.0, I);
      return;
    case GK::MEAS:
    case GK::PLACEHOLDER:
      break;
  }
  throw ValidationError("apply_unitary_op: not a unitary op");
}

inline void check_executable(const Circuit& c, const PauliObservable& obs,
                             const SimulatorOptions& opt) {
  if (c.num_qubits() > opt.max_qubits)
    throw CapacityError("circuit has " + std::to_string(c.num_qubits()) +
                        " qubits, simulator cap is " + std::to_string(opt.max_qubits));
  if (obs.size() != static_cast<std::size_t>(c.num_qubits()))
    throw ValidationError("observable length " + std::to_string(obs.size()) +
                          " does not match " + std::to_string(c.num_qubits()) + " qubits");
  for (const Op& op : c.ops())
    if (op.kind == GateKind::PLACEHOLDER)
      throw ValidationError("circuit still contains placeholder '" + op.slot + "'");
}

inline void run_branches(StateVector state, const Circuit& c, std::size_t pos, double sign,
                         const std::function<void(const StateVector&, double)>& leaf) {
  const auto& ops = c.ops();
  for (; pos < ops.size(); ++pos) {
    const Op& op = ops[pos];
    if (op.kind != GateKind::MEAS) {
      apply_unitary_op(state, op);
      continue;
    }
    StateVector one = state;
    state.project(op.qubits[0], 0);
    one.project(op.qubits[0], 1);
    if (one.norm_weight() > 1e-30) run_branches(std::move(one), c, pos + 1, -sign, leaf);
    if (state.norm_weight() <= 1e-30) return;
  }
  leaf(state, sign);
}

}  // namespace detail

/// Visits every measurement branch at the end of the circuit with its sign
/// (-1)^(number of 1 outcomes). Branch states are unnormalized.
inline void for_each_branch(const Circuit& c,
                            const std::function<void(const StateVector&, double)>& visit) {
  detail::run_branches(StateVector(c.num_qubits()), c, 0, 1.0, visit);
}

/// Exact signed expectation: sum over MEAS branches of sign * <psi_b|O|psi_b>.
inline double exact_expectation(const Circuit& c, const PauliObservable& obs,
                                const SimulatorOptions& opt = {}) {
  detail::check_executable(c, obs, opt);
  double total = 0.0;
  for_each_branch(c, [&](const StateVector& st, double sign) {
    total += sign * st.pauli_expectation(obs).real();
  });
  return total;
}

inline double exact_expectation(const Circuit& c, const SimulatorOptions& opt = {}) {
  return exact_expectation(c, c.observable(), opt);
}

/// Probability that a single shot reports +1 (measurement sign folded in).
inline double probability_plus_one(const Circuit& c, const PauliObservable& obs,
                                   const SimulatorOptions& opt = {}) {
  detail::check_executable(c, obs, opt);
  std::size_t support = 0;
  for (std::size_t q = 0; q < obs.size(); ++q)
    if (obs.paulis[q] != 'I') support |= std::size_t{1} << q;
  double p_plus = 0.0;
  for_each_branch(c, [&](const StateVector& branch, double sign) {
    StateVector st = branch;
    for (int q = 0; q < st.num_qubits(); ++q) {
      const char p = obs.paulis[static_cast<std::size_t>(q)];
      if (p == 'X') {
        st.apply_1q(q, {detail::kInvSqrt2, detail::kInvSqrt2, detail::kInvSqrt2, -detail::kInvSqrt2});
      } else if (p == 'Y') {
        st.apply_phase_1q(q, 1.0, Complex{0.0, -1.0});
        st.apply_1q(q, {detail::kInvSqrt2, detail::kInvSqrt2, detail::kInvSqrt2, -detail::kInvSqrt2});
      }
    }
    double even = 0.0, odd = 0.0;
    const auto& amps = st.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i)
      ((std::popcount(i & support) & 1) ? odd : even) += std::norm(amps[i]);
    p_plus += sign > 0 ? even : odd;
  });
  return std::clamp(p_plus, 0.0, 1.0);
}

/// Shot-based estimate of exact_expectation; deterministic given `seed`.
inline double sample_expectation(const Circuit& c, const PauliObservable& obs, std::uint64_t shots,
                                 std::uint64_t seed, const SimulatorOptions& opt = {}) {
  if (shots < 1) throw ValidationError("sample_expectation: shots must be >= 1");
  const double p = probability_plus_one(c, obs, opt);
  std::mt19937_64 rng(seed);
  std::binomial_distribution<std::uint64_t> draw(shots, p);
  const auto plus = static_cast<double>(draw(rng));
  return (2.0 * plus - static_cast<double>(shots)) / static_cast<double>(shots);
}

}  // namespace knitgrid
