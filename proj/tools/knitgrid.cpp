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


// knitgrid command-line driver: compile, run, knit, bench, pareto.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "knitgrid.hpp"

namespace {

using namespace knitgrid;

class IoError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write '" + path + "'");
}

// Text to `path`, or stdout when empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(path, text);
  }
}

struct Flags {
  RunConfig cfg;
  std::string mode = "exact";
  std::uint64_t shots = 20000;
  std::string samples = "exhaustive";
  std::string compression;
  std::string select = "knee";
  std::string out;
  bool no_timings = false;
  std::size_t threads = 0;

  RunConfig resolve() const {
    RunConfig c = cfg;
    if (mode == "exact") c.mode = EvalMode::exact();
    else if (mode == "shots") c.mode = EvalMode::with_shots(shots);
    else throw ValidationError("--mode must be exact or shots");
    if (samples != "exhaustive") {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(samples, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != samples.size()) throw ValidationError("--samples must be an integer or 'exhaustive'");
      c.samples = static_cast<std::size_t>(v);
    }
    if (!compression.empty()) {
      auto m = compression_from_name(compression);
      if (!m) throw ValidationError("--compression must be none, 1q, 2q or wire");
      c.compression = *m;
    }
    auto sel = selection_from_name(select);
    if (!sel) throw ValidationError("--select must be knee or min-cost");
    c.selection = *sel;
    if (threads > 0) c.threads = threads;
    c.validate();
    return c;
  }
};

void add_compile_flags(CLI::App* app, Flags& f) {
  app->add_option("--max-qubits", f.cfg.max_qubits, "Largest subcircuit width")->capture_default_str();
  app->add_option("--max-overhead", f.cfg.max_overhead, "Cap on postprocessing cost")->capture_default_str();
  app->add_option("--trials", f.cfg.trials, "Hyperparameter trials")->capture_default_str();
  app->add_option("--compression", f.compression, "Force IR compression: none, 1q, 2q, wire");
  app->add_option("--select", f.select, "Pareto point to compile: knee or min-cost")->capture_default_str();
  app->add_flag("--sweep-termination", f.cfg.sweep_termination,
                "Also search stricter leaf-size thresholds");
}

void add_run_flags(CLI::App* app, Flags& f) {
  app->add_option("--mode", f.mode, "exact or shots")->capture_default_str();
  app->add_option("--shots", f.shots, "Shot budget per quantum tensor")->capture_default_str();
  app->add_option("--samples", f.samples, "QPD samples per gate tensor, or 'exhaustive'")->capture_default_str();
}

void add_common_flags(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.cfg.seed, "Seed for every random choice")->capture_default_str();
  app->add_option("--threads", f.threads, "Worker threads (default: KNITGRID_THREADS or hardware)");
  app->add_option("--out", f.out, "Output file (default: stdout)");
  app->add_flag("--no-timings", f.no_timings, "Write zero wall times (byte-reproducible output)");
}

std::string compile_report(const CompileResult& r, bool timings) {
  const Candidate& c = r.chosen;
  nlohmann::ordered_json j;
  j["pp_cost"] = c.pp_cost;
  j["naive_pp_cost"] = c.naive_cost();
  j["est_error"] = c.est_error;
  j["cuts"] = c.num_cuts();
  j["gate_cuts"] = c.num_gate_cuts;
  j["wire_cuts"] = c.num_wire_cuts;
  j["subcircuits"] = c.num_leaves;
  j["subcircuit_qubits"] = c.leaf_qubits;
  j["tree"] = c.tree.to_string();
  j["trial_id"] = c.trial_id;
  j["front_size"] = r.front.size();
  j["pareto_csv"] = pareto_csv(r.front);
  j["compile_ms"] = timings ? r.compile_ms : 0.0;
  return j.dump(2) + "\n";
}

int cmd_compile(const std::string& path, const Flags& f, const std::string& htn_out) {
  const RunConfig cfg = f.resolve();
  const Circuit c = parse_circuit(read_file(path));
  const CompileResult r = compile(c, cfg);
  write_file(htn_out, serialize_htn(r.htn) + "\n");
  emit(f.out, compile_report(r, !f.no_timings));
  return 0;
}

int cmd_run(const std::string& path, const Flags& f) {
  const RunConfig cfg = f.resolve();
  const HybridTensorNetwork htn = parse_htn(read_file(path));
  emit(f.out, knit_result_json(run_htn(htn, cfg), !f.no_timings) + "\n");
  return 0;
}

int cmd_knit(const std::string& path, const Flags& f) {
  const RunConfig cfg = f.resolve();
  const Circuit c = parse_circuit(read_file(path));
  emit(f.out, knit_result_json(knit(c, cfg), !f.no_timings) + "\n");
  return 0;
}

int cmd_pareto(const std::string& path, const Flags& f) {
  const RunConfig cfg = f.resolve();
  const Circuit c = parse_circuit(read_file(path));
  emit(f.out, pareto_csv(hyperopt(c, cfg.trials, cfg.search_space(), cfg.seed, cfg.threads)));
  return 0;
}

struct BenchFlags {
  std::string family;
  std::vector<int> qubits{20};
  BenchOptions opt;
  std::string emit_dir;
};

int cmd_bench(const BenchFlags& b, const Flags& f) {
  const auto family = bench_family_from_name(b.family);
  if (!family) throw ValidationError("unknown benchmark family '" + b.family + "'");
  const RunConfig cfg = f.resolve();
  if (!b.emit_dir.empty()) std::filesystem::create_directories(b.emit_dir);
  std::ostringstream csv;
  csv << "family,n,seed,cuts,subcircuits,pp_cost_ours,pp_cost_naive,est_error,compile_ms\n";
  for (int n : b.qubits) {
    BenchOptions o = b.opt;
    o.qubits = n;
    const Circuit c = make_benchmark(*family, o);
    if (!b.emit_dir.empty())
      write_file(b.emit_dir + "/" + b.family + "_" + std::to_string(n) + ".json", serialize_circuit(c) + "\n");
    const CompileResult r = compile(c, cfg);
    csv << b.family << ',' << n << ',' << o.seed << ',' << r.chosen.num_cuts() << ','
        << r.chosen.num_leaves << ',' << detail::format_double(planned_flops(r.htn, cfg)) << ','
        << detail::format_double(r.chosen.naive_cost()) << ',' << detail::format_double(r.chosen.est_error)
        << ',' << detail::format_double(f.no_timings ? 0.0 : r.compile_ms) << '\n';
  }
  emit(f.out, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knitgrid: cut, knit and contract quantum circuits"};
  app.require_subcommand(1);

  Flags f;
  std::string input, htn_out;
  BenchFlags bench;

  auto* compile_cmd = app.add_subcommand("compile", "Circuit JSON -> h-TN JSON plus compile report");
  compile_cmd->add_option("circuit", input, "Circuit JSON file")->required();
  compile_cmd->add_option("--htn", htn_out, "Where to write the h-TN")->required();
  add_compile_flags(compile_cmd, f);
  add_common_flags(compile_cmd, f);

  auto* run_cmd = app.add_subcommand("run", "Evaluate and contract an h-TN file");
  run_cmd->add_option("htn", input, "h-TN JSON file")->required();
  add_run_flags(run_cmd, f);
  add_common_flags(run_cmd, f);

  auto* knit_cmd = app.add_subcommand("knit", "compile + run");
  knit_cmd->add_option("circuit", input, "Circuit JSON file")->required();
  add_compile_flags(knit_cmd, f);
  add_run_flags(knit_cmd, f);
  add_common_flags(knit_cmd, f);

  auto* pareto_cmd = app.add_subcommand("pareto", "Pareto front of a circuit as CSV");
  pareto_cmd->add_option("circuit", input, "Circuit JSON file")->required();
  add_compile_flags(pareto_cmd, f);
  add_common_flags(pareto_cmd, f);

  auto* bench_cmd = app.add_subcommand("bench", "Generate benchmark circuits and tabulate costs");
  bench_cmd->add_option("family", bench.family, "vqe, qml, qaoa1 or qaoa2")->required();
  bench_cmd->add_option("-n,--qubits", bench.qubits, "Circuit sizes")->capture_default_str();
  bench_cmd->add_option("--layers", bench.opt.layers, "Entangling layers / QAOA rounds")->capture_default_str();
  bench_cmd->add_option("--cluster-size", bench.opt.cluster_size, "QAOA nodes per cluster")->capture_default_str();
  bench_cmd->add_option("--inter-edges", bench.opt.inter_edges, "qaoa2 edges between adjacent clusters")
      ->capture_default_str();
  bench_cmd->add_option("--emit-dir", bench.emit_dir, "Also write each circuit as JSON here");
  add_compile_flags(bench_cmd, f);
  add_common_flags(bench_cmd, f);

  CLI11_PARSE(app, argc, argv);
  bench.opt.seed = f.cfg.seed;

  try {
    if (compile_cmd->parsed()) return cmd_compile(input, f, htn_out);
    if (run_cmd->parsed()) return cmd_run(input, f);
    if (knit_cmd->parsed()) return cmd_knit(input, f);
    if (pareto_cmd->parsed()) return cmd_pareto(input, f);
    if (bench_cmd->parsed()) return cmd_bench(bench, f);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
