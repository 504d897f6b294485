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

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <future>
#include <optional>
#include <string_view>
#include <string>
#include <vector>

#include "json.hpp"
#include "knitgrid/circuit.hpp"
#include "knitgrid/htn.hpp"
#include "knitgrid/optimizer.hpp"
#include "knitgrid/parallel.hpp"
#include "knitgrid/path.hpp"
#include "knitgrid/rng.hpp"

namespace knitgrid {

/// Which Pareto point compile() hands to the code generator.
enum class Selection { Knee, MinCost };

inline std::string_view selection_name(Selection s) { return s == Selection::Knee ? "knee" : "min-cost"; }

inline std::optional<Selection> selection_from_name(std::string_view s) {
  if (s == "knee") return Selection::Knee;
  if (s == "min-cost") return Selection::MinCost;
  return std::nullopt;
}

struct RunConfig {
  int max_qubits = 15;
  double max_overhead = 1e12;
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  EvalMode mode;
  /// QPD samples per gate CT; nullopt is exhaustive.
  std::optional<std::size_t> samples;
  std::optional<Compression> compression;
  /// Also search stricter termination thresholds (denser Pareto front).
  bool sweep_termination = false;
  Selection selection = Selection::Knee;
  std::size_t threads = default_thread_count();

  void validate() const {
    if (max_qubits < 1) throw ValidationError("max_qubits must be >= 1");
    if (trials < 1) throw ValidationError("trials must be >= 1");
    if (!(max_overhead > 0.0)) throw ValidationError("max_overhead must be > 0");
    if (samples && *samples < 1) throw ValidationError("samples must be >= 1");
    if (mode.kind == EvalMode::Kind::Shots && mode.shots < 1) throw ValidationError("shots must be >= 1");
  }

  SearchSpace search_space() const {
    SearchSpace s = SearchSpace::with_limits(max_qubits, max_overhead);
    if (compression) s.compressions = {*compression};
    if (sweep_termination) s.sweep_termination();
    return s;
  }

  SimulatorOptions simulator() const { return {std::max(20, max_qubits)}; }
};

struct PhaseTimes {
  double compile = 0.0;
  double evaluate = 0.0;
  double path = 0.0;
  double contract = 0.0;
};

struct KnitResult {
  double expectation = 0.0;
  /// Multiplications of the executed contraction path.
  double pp_cost_flops = 0.0;
  std::size_t num_subcircuit_runs = 0;
  PhaseTimes phase_times_ms;
};

struct CompileResult {
  std::vector<Candidate> front;
  Candidate chosen;
  HybridTensorNetwork htn;
  double compile_ms = 0.0;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// hyperopt -> selection -> h-TN -> simplify.
inline CompileResult compile(const Circuit& circuit, const RunConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  CompileResult out;
  out.front = hyperopt(circuit, cfg.trials, cfg.search_space(), cfg.seed, cfg.threads);
  // The front is sorted by cost, so its first point is the cheapest.
  out.chosen = cfg.selection == Selection::Knee ? select_knee(out.front) : out.front.front();
  out.htn = simplify(generate_htn(out.chosen, circuit));
  out.compile_ms = detail::ms_since(t0);
  return out;
}

/// sample -> (evaluate || find_path) -> contract.
inline KnitResult run_htn(const HybridTensorNetwork& htn, const RunConfig& cfg,
                          const Executor& executor) {
  cfg.validate();
  KnitResult r;
  auto [sampled, plan] = sample_qpd(htn, cfg.samples, derive_seed(cfg.seed, {1}));
  (void)plan;
  r.num_subcircuit_runs = sampled.num_subcircuit_runs();

  const auto shapes = sampled.shapes();
  auto path_job = std::async(std::launch::async, [&shapes, seed = cfg.seed] {
    const auto t0 = std::chrono::steady_clock::now();
    ContractionPath p = find_path(shapes, derive_seed(seed, {2}));
    return std::pair{std::move(p), detail::ms_since(t0)};
  });
  const auto t_eval = std::chrono::steady_clock::now();
  std::vector<Tensor> tensors;
  try {
    tensors = evaluate_all(sampled, executor, cfg.mode, derive_seed(cfg.seed, {3}), cfg.threads);
  } catch (...) {
    path_job.wait();
    throw;
  }
  r.phase_times_ms.evaluate = detail::ms_since(t_eval);
  auto [path, path_ms] = path_job.get();
  r.phase_times_ms.path = path_ms;

  const auto t_con = std::chrono::steady_clock::now();
  tensors.insert(tensors.end(), sampled.cts.begin(), sampled.cts.end());
  const ContractionResult res = contract(std::move(tensors), path);
  r.phase_times_ms.contract = detail::ms_since(t_con);
  r.expectation = res.value;
  r.pp_cost_flops = res.flops;
  return r;
}

inline KnitResult run_htn(const HybridTensorNetwork& htn, const RunConfig& cfg) {
  return run_htn(htn, cfg, SimulatorExecutor(cfg.simulator()));
}

/// Multiplications the contraction will perform, from index metadata only
/// (no subcircuit is run). Matches KnitResult::pp_cost_flops.
inline double planned_flops(const HybridTensorNetwork& htn, const RunConfig& cfg) {
  const auto sampled = sample_qpd(htn, cfg.samples, derive_seed(cfg.seed, {1})).first;
  const auto shapes = sampled.shapes();
  return path_flops(shapes, find_path(shapes, derive_seed(cfg.seed, {2})));
}

/// End-to-end knitting of `circuit`'s observable expectation.
inline KnitResult knit(const Circuit& circuit, const RunConfig& cfg) {
  const CompileResult c = compile(circuit, cfg);
  KnitResult r = run_htn(c.htn, cfg);
  r.phase_times_ms.compile = c.compile_ms;
  return r;
}

/// KnitResult as JSON; `timings = false` zeroes the wall times so output is
/// byte-reproducible.
inline std::string knit_result_json(const KnitResult& r, bool timings = true) {
  nlohmann::ordered_json j;
  j["expectation"] = r.expectation;
  j["pp_cost_flops"] = r.pp_cost_flops;
  j["num_subcircuit_runs"] = r.num_subcircuit_runs;
  const PhaseTimes t = timings ? r.phase_times_ms : PhaseTimes{};
  j["phase_times_ms"] = {{"compile", t.compile}, {"evaluate", t.evaluate}, {"path", t.path},
                         {"contract", t.contract}};
  return j.dump();
}

}  // namespace knitgrid
