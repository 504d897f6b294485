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
#include <set>

#include "helpers.hpp"
#include "knitgrid/optimizer.hpp"
#include "knitgrid/simulator.hpp"

namespace {

using namespace knitgrid;

std::set<int> leaf_qubits(const Candidate& c, std::size_t leaf) {
  std::set<int> qs;
  for (std::size_t g : c.tree.node(leaf).groups)
    for (std::size_t v : c.ir.groups()[g]) qs.insert(c.ir.vertices()[v].qubit);
  return qs;
}

TEST(EstimateError, EmptyFragmentIsErrorFree) { EXPECT_DOUBLE_EQ(estimate_error(Circuit(2)), 0.0); }

TEST(EstimateError, MatchesLonghandProduct) {
  Circuit c(2);
  for (int i = 0; i < 10; ++i) c.cz(0, 1);
  for (int i = 0; i < 5; ++i) c.h(i % 2);
  double keep = 1.0;
  for (int i = 0; i < 10; ++i) keep *= 0.999;
  for (int i = 0; i < 5; ++i) keep *= 0.9999;
  EXPECT_NEAR(estimate_error(c), 1.0 - keep, 1e-15);
  EXPECT_NEAR(estimate_error(c), 0.0104500, 5e-8);
  Circuit one(2);
  one.cz(0, 1);
  EXPECT_NEAR(estimate_error(one), 0.001, 1e-15);
}

TEST(EstimateError, PlaceholdersCountAsSingleQubitGates) {
  Circuit c(1);
  c.add(GateKind::PLACEHOLDER, {0}, std::nullopt, "g0a");
  c.meas(0);
  EXPECT_NEAR(estimate_error(c), 1e-4, 1e-15);
}

TEST(TreeCost, SingleLeafIsFree) {
  const Circuit c = testutil::two_clusters();
  const IrGraph ir = build_ir(c);
  std::vector<std::size_t> all(ir.num_groups());
  std::iota(all.begin(), all.end(), 0);
  EXPECT_DOUBLE_EQ(tree_cost(ContractionTree(all), ir), 0.0);
}

TEST(TreeCost, OneCzCutCostsTwentyFive) {
  const Circuit c = testutil::two_clusters();
  const IrGraph ir = compress(build_ir(c), Compression::Wire);
  std::vector<std::vector<std::size_t>> leaves(2);
  for (std::size_t g = 0; g < ir.num_groups(); ++g)
    leaves[ir.vertices()[ir.groups()[g][0]].qubit < 3 ? 0 : 1].push_back(g);
  const Candidate cand = make_candidate(c, ir, leaves);
  EXPECT_DOUBLE_EQ(cand.pp_cost, 25.0);
  EXPECT_EQ(cand.num_gate_cuts, 1u);
  EXPECT_EQ(cand.num_wire_cuts, 0u);
  EXPECT_DOUBLE_EQ(cand.naive_cost(), 12.0);
}

TEST(TreeCost, RejectsTreesThatDoNotPartitionTheIr) {
  const Circuit c = testutil::two_clusters();
  const IrGraph ir = build_ir(c);
  EXPECT_THROW(tree_cost(ContractionTree({0, 1}), ir), ValidationError);
}

TEST(TreeCost, SplittingALeafNeverLowersCost) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    auto s = testutil::random_scenario(rng, 3, 7, 1, 4);
    ContractionTree tree = s.candidate.tree;
    double before = tree_cost(tree, s.candidate.ir);
    for (std::size_t leaf : tree.leaves()) {
      const auto groups = tree.node(leaf).groups;
      if (groups.size() < 2) continue;
      const std::vector<std::size_t> l(groups.begin(), groups.begin() + static_cast<long>(groups.size() / 2));
      const std::vector<std::size_t> r(groups.begin() + static_cast<long>(groups.size() / 2), groups.end());
      tree.split(leaf, l, r);
      const double after = tree_cost(tree, s.candidate.ir);
      EXPECT_GE(after, before + 1.0);
      before = after;
    }
  }
}

TEST(OptimizeOnce, SmallCircuitNeedsNoCut) {
  const Circuit c = testutil::two_clusters();
  Hyperparams p;
  p.max_qubits = 6;
  const Candidate cand = optimize_once(c, p);
  EXPECT_TRUE(cand.feasible);
  EXPECT_EQ(cand.num_leaves, 1u);
  EXPECT_DOUBLE_EQ(cand.pp_cost, 0.0);
  EXPECT_DOUBLE_EQ(cand.est_error, estimate_error(c));
}

TEST(OptimizeOnce, TwoClustersSplitAtTheBridge) {
  const Circuit c = testutil::two_clusters();
  Hyperparams p;
  p.max_qubits = 3;
  p.compression = Compression::OneQubit;
  p.partition.imbalance = 0.3;
  const Candidate cand = optimize_once(c, p);
  ASSERT_TRUE(cand.feasible) << cand.note;
  EXPECT_EQ(cand.num_leaves, 2u);
  EXPECT_EQ(cand.num_cuts(), 1u);
  EXPECT_EQ(cand.num_gate_cuts, 1u);

  // Exhaustive oracle over qubit-level bisections (wire-compressed graph):
  // the cheapest one with both sides at most 3 qubits cuts exactly one edge.
  const IrGraph ir = compress(build_ir(c), Compression::Wire);
  const std::size_t n = ir.num_groups();
  ASSERT_LE(n, 24u);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_cuts = 0;
  for (std::uint32_t m = 1; m + 1 < (1u << n); ++m) {
    std::vector<std::vector<std::size_t>> sides(2);
    for (std::size_t g = 0; g < n; ++g) sides[(m >> g) & 1].push_back(g);
    if (leaf_stats(ir, sides[0]).qubits > 3 || leaf_stats(ir, sides[1]).qubits > 3) continue;
    double w = 0.0;
    std::size_t cuts = 0;
    for (const IrEdge& e : ir.edges())
      if (((m >> ir.group_of(e.u)) & 1) != ((m >> ir.group_of(e.v)) & 1)) w += e.weight, ++cuts;
    if (w < best) best = w, best_cuts = cuts;
  }
  EXPECT_EQ(best_cuts, 1u);
}

TEST(OptimizeOnce, ThreeClusterWalkthrough) {
  // S1 = {0,1} is as heavy as S2 = {2,3} and S3 = {4,5} together; S1 touches
  // S2 and S3 once each, S2 and S3 share two gates.
  Circuit c(6);
  testutil::dense_block(c, 0, 2, 10, 0.3);
  testutil::dense_block(c, 2, 2, 4, 0.5);
  testutil::dense_block(c, 4, 2, 4, 0.7);
  c.cz(1, 2);
  c.cz(0, 5);
  c.cz(3, 4);
  c.cz(2, 5);
  testutil::dense_block(c, 2, 2, 1, 0.2);
  testutil::dense_block(c, 4, 2, 1, 0.4);
  Hyperparams p;
  p.max_qubits = 3;
  p.compression = Compression::OneQubit;
  p.next_leaf = NextLeaf::MostQubits;
  p.partition.num_parts = 2;
  p.partition.imbalance = 0.1;
  const Candidate cand = optimize_once(c, p);
  ASSERT_TRUE(cand.feasible) << cand.note;
  ASSERT_EQ(cand.num_leaves, 3u);
  const auto& root = cand.tree.node(cand.tree.root());
  const auto& l = cand.tree.node(*root.left);
  const auto& r = cand.tree.node(*root.right);
  ASSERT_NE(l.is_leaf(), r.is_leaf());
  const std::size_t single = l.is_leaf() ? *root.left : *root.right;
  EXPECT_EQ(leaf_qubits(cand, single), (std::set<int>{0, 1}));
  const auto& pair = cand.tree.node(l.is_leaf() ? *root.right : *root.left);
  ASSERT_FALSE(pair.is_leaf());
  std::set<std::set<int>> sides{leaf_qubits(cand, *pair.left), leaf_qubits(cand, *pair.right)};
  EXPECT_EQ(sides, (std::set<std::set<int>>{{2, 3}, {4, 5}}));
}

TEST(OptimizeOnce, OverheadLimitUndoesTheLastSplit) {
  const Circuit c = testutil::two_clusters();
  Hyperparams p;
  p.max_qubits = 3;
  p.max_overhead = 1.0;
  const Candidate cand = optimize_once(c, p);
  EXPECT_FALSE(cand.feasible);
  EXPECT_EQ(cand.num_leaves, 1u);
  EXPECT_LE(cand.pp_cost, 1.0);
}

TEST(OptimizeOnce, UnpartitionableLeafIsInfeasible) {
  Circuit c(3);
  c.h(0);
  c.h(1);
  c.h(2);
  Hyperparams p;
  p.max_qubits = 1;
  p.compression = Compression::Wire;
  EXPECT_TRUE(optimize_once(c, p).feasible);
  Hyperparams tight = p;
  tight.termination = [](const LeafStats& s) { return s.ops == 0; };
  const Candidate cand = optimize_once(c, tight);
  EXPECT_FALSE(cand.feasible);
  EXPECT_FALSE(cand.note.empty());
}

TEST(OptimizeOnce, HyperparamValidation) {
  const Circuit c = testutil::two_clusters();
  Hyperparams p;
  p.max_overhead = 0.0;
  EXPECT_THROW(optimize_once(c, p), ValidationError);
  p = {};
  p.partition.num_parts = 1;
  EXPECT_THROW(optimize_once(c, p), ValidationError);
  p = {};
  p.partition.imbalance = 0.7;
  EXPECT_THROW(optimize_once(c, p), ValidationError);
}

TEST(OptimizeOnce, ClusterChainCostIsLinear) {
  std::vector<double> cost;
  for (int k = 2; k <= 10; ++k) {
    Hyperparams p;
    p.max_qubits = 2;
    p.compression = Compression::Wire;
    p.partition.imbalance = 0.5;
    const Candidate cand = optimize_once(testutil::cluster_chain(k), p);
    ASSERT_TRUE(cand.feasible) << k << ": " << cand.note;
    EXPECT_EQ(cand.num_gate_cuts, static_cast<std::size_t>(k));
    cost.push_back(cand.pp_cost);
  }
  // caterpillar over the chain: 25 + 125 (k - 1) ... minus end effects
  for (std::size_t i = 0; i < cost.size(); ++i) EXPECT_DOUBLE_EQ(cost[i], 125.0 * (i + 2) - 100.0);
}

TEST(Pareto, DominanceExample) {
  const std::vector<std::pair<double, double>> pts{{10, 0.5}, {20, 0.1}, {30, 0.1}};
  EXPECT_EQ(pareto_indices(pts), (std::vector<std::size_t>{0, 1}));
  const std::vector<std::pair<double, double>> dup{{5, 0.2}, {5, 0.2}, {4, 0.3}};
  EXPECT_EQ(pareto_indices(dup), (std::vector<std::size_t>{2, 0}));
}

TEST(Pareto, KneeSelection) {
  EXPECT_EQ(knee_index({{0, 1}, {1, 0}, {0.5, 0.5}}), 2u);
  EXPECT_EQ(knee_index({{7, 0.3}}), 0u);
  EXPECT_EQ(knee_index({{3, 0.3}, {3, 0.1}, {3, 0.2}}), 1u);
  // symmetric tie: lower cost wins
  EXPECT_EQ(knee_index({{1, 0}, {0, 1}}), 1u);
  EXPECT_THROW(knee_index({}), ValidationError);
}

TEST(Hyperopt, SingleTrialFrontIsThatCandidate) {
  const Circuit c = testutil::two_clusters();
  SearchSpace s = SearchSpace::with_limits(3, 1e12);
  const auto all = run_trials(c, 1, s, 5);
  ASSERT_TRUE(all[0].feasible) << all[0].note;
  const auto front = hyperopt(c, 1, s, 5);
  ASSERT_EQ(front.size(), 1u);
  EXPECT_EQ(front[0].pp_cost, all[0].pp_cost);
  EXPECT_EQ(front[0].tree, all[0].tree);
}

TEST(Hyperopt, BrickCircuitFrontIsNonDominatedAndReproducible) {
  const int n = 40;
  Circuit c(n);
  for (int layer = 0; layer < 4; ++layer) {
    for (int q = 0; q < n; ++q) c.ry(q, 0.1 * (q + layer));
    for (int q = layer % 2; q + 1 < n; q += 2) c.cz(q, q + 1);
  }
  SearchSpace s = SearchSpace::with_limits(15, 1e12);
  s.sweep_termination();
  const auto front = hyperopt(c, 50, s, 77, 4);
  ASSERT_FALSE(front.empty());
  for (std::size_t i = 0; i < front.size(); ++i) {
    EXPECT_TRUE(front[i].feasible);
    EXPECT_LE(front[i].pp_cost, s.max_overhead);
    if (i) {
      EXPECT_LE(front[i - 1].pp_cost, front[i].pp_cost);
    }
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (i == j) continue;
      const bool dominates = front[j].pp_cost <= front[i].pp_cost && front[j].est_error <= front[i].est_error &&
                             (front[j].pp_cost < front[i].pp_cost || front[j].est_error < front[i].est_error);
      EXPECT_FALSE(dominates) << j << " dominates " << i;
    }
  }
  const auto again = hyperopt(c, 50, s, 77, 1);
  ASSERT_EQ(again.size(), front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    EXPECT_EQ(again[i].trial_id, front[i].trial_id);
    EXPECT_EQ(again[i].tree, front[i].tree);
  }
  EXPECT_EQ(pareto_csv(again), pareto_csv(front));
}

TEST(Hyperopt, InfeasibleEverywhereThrows) {
  const Circuit c = testutil::two_clusters();
  EXPECT_THROW(hyperopt(c, 5, SearchSpace::with_limits(3, 1.0), 1), InfeasibleError);
  EXPECT_THROW(hyperopt(c, 0, SearchSpace::with_limits(3, 1e9), 1), ValidationError);
}

TEST(Hyperopt, CsvHasOneRowPerCandidate) {
  const Circuit c = testutil::two_clusters();
  const auto front = hyperopt(c, 10, SearchSpace::with_limits(3, 1e12), 2);
  const std::string csv = pareto_csv(front);
  EXPECT_EQ(csv.rfind("trial_id,pp_cost,est_error,num_leaves,num_cuts,", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), front.size() + 1);
}

TEST(SearchSpace, SweepAddsStricterThresholds) {
  SearchSpace s = SearchSpace::with_limits(16, 1e9);
  s.sweep_termination();
  EXPECT_EQ(s.termination_qubits, (std::vector<int>{16, 12, 8, 4, 2, 1}));
  const Hyperparams p = sample_hyperparams(s, 3, 4);
  EXPECT_EQ(p.qubit_cap, 16);
  EXPECT_EQ(p.partition.seed, sample_hyperparams(s, 3, 4).partition.seed);
}

}  // namespace
