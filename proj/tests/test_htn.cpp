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


#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "helpers.hpp"
#include "knitgrid/htn.hpp"
#include "knitgrid/knit.hpp"
#include "oracles.hpp"

namespace {

using namespace knitgrid;

double exact_value(const HybridTensorNetwork& htn) {
  RunConfig cfg;
  cfg.threads = 2;
  return run_htn(htn, cfg).expectation;
}

// Four 2-qubit blocks in a ring of gate cuts, plus qubit 3 migrating from
// block 1 to block 2 halfway (one wire cut).
struct Ring {
  Circuit circuit{8};
  Candidate candidate;
};

Ring ring_of_four() {
  Ring r;
  Circuit& c = r.circuit;
  for (int b = 0; b < 4; ++b) testutil::dense_block(c, 2 * b, 2, 2, 0.3 + 0.2 * b);
  c.cz(1, 2);
  c.cz(3, 4);
  c.cz(5, 6);
  c.rzz(7, 0, 0.4);
  const std::size_t move_at = c.ry(3, 0.8);
  c.cz(3, 5);
  for (int b : {0, 2, 3}) testutil::dense_block(c, 2 * b, 2, 1, 1.1 - 0.1 * b);
  c.rx(2, 0.6);
  c.set_observable("ZIZZIZZI");
  r.candidate = testutil::assign_leaves(c, 4, [&](std::size_t op, int q) {
    if (q == 3 && op >= move_at) return 2;
    return q / 2;
  });
  return r;
}

// Two blocks {0,1} and {2,3} joined by two CZs.
std::pair<Circuit, Candidate> doubly_joined() {
  Circuit c(4);
  testutil::dense_block(c, 0, 2, 2, 0.5);
  testutil::dense_block(c, 2, 2, 2, 0.9);
  c.cz(1, 2);
  testutil::dense_block(c, 0, 2, 1, 1.3);
  c.cz(0, 3);
  testutil::dense_block(c, 2, 2, 1, 0.2);
  c.set_observable("ZZZX");
  Candidate cand = testutil::assign_leaves(c, 2, [](std::size_t, int q) { return q / 2; });
  return {c, cand};
}

std::pair<Circuit, Candidate> single_cz_cut() {
  Circuit c(2);
  c.ry(0, 0.7);
  c.rx(1, 1.9);
  c.cz(0, 1);
  c.ry(0, 0.3);
  c.h(1);
  c.set_observable("ZZ");
  Candidate cand = testutil::assign_leaves(c, 2, [](std::size_t, int q) { return q; });
  return {c, cand};
}

TEST(Htn, NoCutGivesSingleQuantumTensor) {
  Circuit c(3);
  c.h(0);
  c.cz(0, 1);
  c.rzz(1, 2, 0.4);
  c.set_observable("XZZ");
  const Candidate cand = testutil::assign_leaves(c, 1, [](std::size_t, int) { return 0; });
  const auto htn = generate_htn(cand, c);
  ASSERT_EQ(htn.qts.size(), 1u);
  EXPECT_TRUE(htn.cts.empty());
  EXPECT_EQ(htn.qts[0].blueprint.num_qubits(), 3);
  EXPECT_EQ(htn.num_subcircuit_runs(), 1u);

  // No indices: a 0-dim tensor holding the expectation.
  const Tensor t = evaluate_qt(htn.qts[0], SimulatorExecutor{}, EvalMode::exact());
  EXPECT_TRUE(t.indices.empty());
  ASSERT_EQ(t.data.size(), 1u);
  EXPECT_NEAR(t.data[0], oracle::branch_expectation(c), 1e-12);
}

TEST(Htn, CzCutGivesTwoFiveDimIndices) {
  const auto [c, cand] = single_cz_cut();
  const auto htn = generate_htn(cand, c);
  ASSERT_EQ(htn.qts.size(), 2u);
  ASSERT_EQ(htn.cts.size(), 1u);
  for (const auto& qt : htn.qts) {
    ASSERT_EQ(qt.indices.size(), 1u);
    EXPECT_EQ(qt.indices[0].dim, 5u);
    EXPECT_EQ(qt.blueprint.num_qubits(), 1);
  }
  EXPECT_EQ(htn.cts[0].name, "cg2");
  EXPECT_EQ(htn.cts[0].indices[0].name, "g2a");
  EXPECT_EQ(htn.cts[0].volume(), 25u);
  EXPECT_EQ(htn.cts[0].role, TensorRole::GateCoefficient);
  EXPECT_NEAR(exact_value(htn), oracle::branch_expectation(c), 1e-12);
}

TEST(Htn, FourLeafRingTopology) {
  const Ring r = ring_of_four();
  ASSERT_TRUE(r.candidate.feasible) << r.candidate.note;
  EXPECT_EQ(r.candidate.num_gate_cuts, 4u);
  EXPECT_EQ(r.candidate.num_wire_cuts, 1u);
  const auto htn = generate_htn(r.candidate, r.circuit);
  EXPECT_EQ(htn.qts.size(), 4u);
  ASSERT_EQ(htn.cts.size(), 5u);
  std::size_t wires = 0;
  for (const Tensor& t : htn.cts) {
    if (t.role != TensorRole::WireCoefficient) continue;
    ++wires;
    EXPECT_EQ(t.indices[0].dim, 4u);
    EXPECT_EQ(t.indices[1].dim, 4u);
  }
  EXPECT_EQ(wires, 1u);
  // The downstream leaf opens a fresh qubit for the migrated wire.
  std::size_t total_qubits = 0;
  for (const auto& qt : htn.qts) total_qubits += static_cast<std::size_t>(qt.blueprint.num_qubits());
  EXPECT_EQ(total_qubits, 9u);

  // Gate and wire CTs between the same pair stay separate.
  const auto simple = simplify(htn);
  EXPECT_EQ(simple.cts.size(), 5u);
  const double want = oracle::branch_expectation(r.circuit);
  EXPECT_NEAR(exact_value(htn), want, 1e-9);
  EXPECT_NEAR(exact_value(simple), want, 1e-9);
}

TEST(Htn, GenerateRejectsInfeasibleCandidate) {
  auto [c, cand] = single_cz_cut();
  cand.feasible = false;
  EXPECT_THROW(generate_htn(cand, c), InfeasibleError);
}

TEST(Htn, SimplifyFusesPairByKroneckerProduct) {
  const auto [c, cand] = doubly_joined();
  const auto htn = generate_htn(cand, c);
  ASSERT_EQ(htn.cts.size(), 2u);
  const auto simple = simplify(htn);
  ASSERT_EQ(simple.cts.size(), 1u);
  const Tensor& f = simple.cts[0];
  ASSERT_EQ(f.indices.size(), 2u);
  EXPECT_EQ(f.indices[0].dim, 25u);
  EXPECT_EQ(f.indices[1].dim, 25u);
  const Tensor& a = htn.cts[0];
  const Tensor& b = htn.cts[1];
  for (std::size_t i1 = 0; i1 < 5; ++i1)
    for (std::size_t i2 = 0; i2 < 5; ++i2)
      for (std::size_t j1 = 0; j1 < 5; ++j1)
        for (std::size_t j2 = 0; j2 < 5; ++j2)
          EXPECT_EQ(f.data[(i1 * 5 + i2) * 25 + (j1 * 5 + j2)], a.data[i1 * 5 + j1] * b.data[i2 * 5 + j2]);

  for (const auto& qt : simple.qts) {
    ASSERT_EQ(qt.indices.size(), 1u);
    EXPECT_EQ(qt.indices[0].slot_labels.size(), 2u);
    EXPECT_EQ(qt.indices[0].rows.size(), 25u);
  }
  EXPECT_NEAR(exact_value(simple), oracle::branch_expectation(c), 1e-9);
}

TEST(Htn, SimplifyLeavesSingleCtAlone) {
  const auto [c, cand] = single_cz_cut();
  const auto htn = generate_htn(cand, c);
  EXPECT_EQ(serialize_htn(simplify(htn)), serialize_htn(htn));
}

TEST(Htn, KroneckerOfIdentities) {
  Tensor i2{"i", {{"a", 2}, {"b", 2}}, {1, 0, 0, 1}, TensorRole::GateCoefficient};
  Tensor m{"m", {{"c", 2}, {"d", 3}}, {1, 2, 3, 4, 5, 6}, TensorRole::GateCoefficient};
  const auto k = kronecker({&i2, &m});
  ASSERT_EQ(k.size(), 24u);
  EXPECT_EQ(k[0 * 6 + 1], 2.0);
  EXPECT_EQ(k[3 * 6 + 5], 6.0);
  EXPECT_EQ(k[1 * 6 + 5], 0.0);
  EXPECT_EQ(k[3 * 6 + 4], 5.0);
  EXPECT_EQ(k[3 * 6 + 1], 0.0);
}

TEST(Htn, SamplingFrequenciesConcentrate) {
  const auto [c, cand] = single_cz_cut();
  const auto htn = generate_htn(cand, c);
  const std::size_t s = 1'000'000;
  const auto [sampled, plan] = sample_qpd(htn, s, 7);
  const Tensor& orig = htn.cts[0];
  const Tensor& ct = sampled.cts[0];
  ASSERT_EQ(ct.volume(), orig.volume()) << "every row and column has a nonzero";
  double l1 = 0.0;
  for (double v : orig.data) l1 += std::abs(v);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < orig.data.size(); ++i) {
    if (orig.data[i] == 0.0) {
      EXPECT_EQ(ct.data[i], 0.0);
      continue;
    }
    ++nonzero;
    const double freq = std::abs(ct.data[i]) / l1;  // hits / s
    const double want = std::abs(orig.data[i]) / 3.0;
    EXPECT_NEAR(freq, want, 0.01 * want);
    EXPECT_EQ(std::signbit(ct.data[i]), std::signbit(orig.data[i]));
  }
  EXPECT_EQ(nonzero, 6u);
  for (const auto& [name, idx] : plan.indices) {
    double total = 0.0;
    for (double w : idx.weights) total += w;
    EXPECT_EQ(total, static_cast<double>(s)) << name;
  }
}

TEST(Htn, SamplingTruncatesUnhitCoordinates) {
  const auto [c, cand] = single_cz_cut();
  const auto htn = generate_htn(cand, c);
  const auto [sampled, plan] = sample_qpd(htn, 1, 3);
  ASSERT_EQ(sampled.cts[0].volume(), 1u);
  EXPECT_EQ(std::abs(sampled.cts[0].data[0]), 3.0);
  EXPECT_EQ(sampled.num_subcircuit_runs(), 2u);
  for (const auto& qt : sampled.qts) {
    EXPECT_EQ(qt.indices[0].dim, 1u);
    EXPECT_EQ(qt.indices[0].weights, std::vector<double>{1.0});
  }
  EXPECT_NO_THROW(sampled.validate());
}

TEST(Htn, SamplingExhaustiveAndWireOnlyAreIdentity) {
  const auto [c, cand] = single_cz_cut();
  const auto htn = generate_htn(cand, c);
  EXPECT_EQ(serialize_htn(sample_qpd(htn, std::nullopt, 1).first), serialize_htn(htn));
  EXPECT_THROW(sample_qpd(htn, 0, 1), ValidationError);

  Circuit w(2);
  w.h(0);
  w.cz(0, 1);
  w.set_observable("ZZ");
  const Candidate wc = testutil::assign_leaves(w, 2, [](std::size_t op, int) { return op == 0 ? 0 : 1; });
  const auto wire_htn = simplify(generate_htn(wc, w));
  ASSERT_EQ(wire_htn.cts.size(), 1u);
  for (std::size_t s : {1u, 10u, 1000u})
    EXPECT_EQ(serialize_htn(sample_qpd(wire_htn, s, 5).first), serialize_htn(wire_htn));
}

TEST(Htn, LargeSampleEstimateIsNearlyUnbiased) {
  const auto [c, cand] = doubly_joined();
  const auto htn = simplify(generate_htn(cand, c));
  RunConfig cfg;
  cfg.samples = 1'000'000;
  cfg.seed = 11;
  EXPECT_NEAR(run_htn(htn, cfg).expectation, oracle::branch_expectation(c), 0.02);
}

TEST(Htn, WireCutOnPlusState) {
  Circuit w(2);
  w.h(0);
  w.cz(0, 1);
  w.set_observable("ZZ");
  const Candidate wc = testutil::assign_leaves(w, 2, [](std::size_t op, int) { return op == 0 ? 0 : 1; });
  const auto htn = generate_htn(wc, w);
  ASSERT_EQ(htn.qts.size(), 2u);
  const QuantumTensor& up = htn.qts[0];
  ASSERT_EQ(up.indices.size(), 1u);
  EXPECT_EQ(up.indices[0].name, "w0_1a");
  const Tensor t = evaluate_qt(up, SimulatorExecutor{}, EvalMode::exact());
  ASSERT_EQ(t.data.size(), 4u);
  const double want[] = {1, 0, 1, 0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(t.data[i], want[i], 1e-12) << i;
  EXPECT_NEAR(exact_value(htn), oracle::branch_expectation(w), 1e-12);
}

TEST(Htn, ReconstructionMatchesUncutOnRandomCircuits) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const auto sc = testutil::random_scenario(rng);
    const auto htn = generate_htn(sc.candidate, sc.circuit);
    const double want = oracle::branch_expectation(sc.circuit);
    EXPECT_NEAR(exact_value(htn), want, 1e-9) << serialize_circuit(sc.circuit);
    EXPECT_NEAR(exact_value(simplify(htn)), want, 1e-9) << serialize_circuit(sc.circuit);
  }
}

TEST(Htn, ContractionEqualsGlobalInstanceSum) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 8; ++trial) {
    const auto sc = testutil::random_scenario(rng, 2, 6, 1, 3);
    const auto htn = simplify(generate_htn(sc.candidate, sc.circuit));
    EXPECT_NEAR(exact_value(htn), oracle::global_sum(sc.circuit, oracle::cuts_of(sc.candidate)), 1e-9)
        << serialize_circuit(sc.circuit);
  }
}

TEST(Htn, EvaluationIsOrderIndependent) {
  const Ring r = ring_of_four();
  const auto htn = simplify(generate_htn(r.candidate, r.circuit));
  for (const EvalMode mode : {EvalMode::exact(), EvalMode::with_shots(4000)}) {
    const auto one = evaluate_all(htn, SimulatorExecutor{}, mode, 9, 1);
    const auto many = evaluate_all(htn, SimulatorExecutor{}, mode, 9, 8);
    ASSERT_EQ(one.size(), many.size());
    for (std::size_t k = 0; k < one.size(); ++k) {
      EXPECT_EQ(one[k].data, many[k].data);
      EXPECT_EQ(evaluate_qt(htn.qts[k], SimulatorExecutor{}, mode, derive_seed(9, {k}), 3).data, one[k].data);
    }
  }
}

class FailingExecutor final : public Executor {
 public:
  int max_qubits() const override { return 20; }
  double exact(const Circuit& c, const PauliObservable&) const override {
    for (const Op& op : c.ops())
      if (op.kind == GateKind::S) throw std::runtime_error("backend refused");
    return 0.0;
  }
  double sampled(const Circuit& c, const PauliObservable& o, std::uint64_t, std::uint64_t) const override {
    return exact(c, o);
  }
};

TEST(Htn, EvaluationFailureNamesCoordinate) {
  const auto [c, cand] = single_cz_cut();
  const auto htn = generate_htn(cand, c);
  try {
    evaluate_qt(htn.qts[0], FailingExecutor{}, EvalMode::exact(), 0, 1);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("qt0 at coordinate (1)"), std::string::npos) << what;
    EXPECT_NE(what.find("backend refused"), std::string::npos) << what;
  }
  EXPECT_THROW(evaluate_qt(htn.qts[0], SimulatorExecutor(SimulatorOptions{0}), EvalMode::exact()),
               CapacityError);
}

TEST(Htn, JsonRoundTrip) {
  const Ring r = ring_of_four();
  const auto htn = simplify(generate_htn(r.candidate, r.circuit));
  const std::string text = serialize_htn(htn);
  const auto back = parse_htn(text);
  EXPECT_EQ(serialize_htn(back), text);
  EXPECT_EQ(exact_value(back), exact_value(htn));

  const auto [sampled, plan] = sample_qpd(htn, 50, 4);
  EXPECT_EQ(serialize_htn(parse_htn(serialize_htn(sampled))), serialize_htn(sampled));
}

TEST(Htn, JsonRejectsMalformedInput) {
  EXPECT_THROW(parse_htn("{"), ParseError);
  EXPECT_THROW(parse_htn("[]"), ParseError);
  EXPECT_THROW(parse_htn(R"({"qts": [], "cts": 3})"), ParseError);
}

}  // namespace
