// Command-line front end: reproducible experiments over span programs,
// evaluation trees, hard-distribution oracles, and the NAND walk.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "spantree/json_io.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace spantree;

struct FunctionFlags {
  std::string kind = "nand";
  int arity = 2;
  int h = 2;
  std::string file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--kind", kind, "nand | threshold | negated_threshold")
        ->default_str("nand");
    cmd->add_option("--arity", arity, "function arity");
    cmd->add_option("--threshold", h, "threshold parameter h");
    cmd->add_option("--fn", file, "function spec JSON file (overrides --kind)");
  }

  DirectFunctionSpec resolve() const {
    if (!file.empty()) return function_from_json(load_json_file(file));
    if (kind == "nand") return DirectFunctionSpec::nand_fn();
    if (kind == "threshold") return DirectFunctionSpec::threshold_fn(arity, h);
    if (kind == "negated_threshold") return DirectFunctionSpec::negated_threshold_fn(arity, h);
    throw ConfigError("unknown --kind: " + kind);
  }
};

void write_manifest(const std::string& out_path, const std::string& subcommand, Json config,
                    std::uint64_t seed) {
  Json manifest;
  manifest["tool"] = "spantree";
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["seed"] = seed;
  manifest["config"] = std::move(config);
  write_text_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

EvalTree load_tree(const std::string& path) { return tree_from_json(load_json_file(path)); }

DirectFunctionSpec load_tree_function(const std::string& path, const FunctionFlags& flags) {
  const Json j = load_json_file(path);
  std::optional<DirectFunctionSpec> fallback;
  try {
    fallback = flags.resolve();
  } catch (const std::exception&) {
    fallback = std::nullopt;
  }
  return tree_function_from_json(j, fallback);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"span-program evaluation-tree toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  std::string out = "out.json";
  int jobs = 0;
  app.add_option("--seed", seed, "base seed for all randomized work")->capture_default_str();
  app.add_option("--out", out, "output file path")->capture_default_str();
  app.add_option("--jobs", jobs, "worker threads (0 = hardware default)")->capture_default_str();

  // analyze-fn
  auto* analyze_cmd = app.add_subcommand("analyze-fn", "span program, witness sizes, omega");
  FunctionFlags analyze_fn;
  analyze_fn.attach(analyze_cmd);
  bool skip_normalize = false;
  analyze_cmd->add_flag("--raw", skip_normalize, "analyze the unnormalized program");

  // annotate
  auto* annotate_cmd = app.add_subcommand("annotate", "value/trivial/strong/fault-depth report");
  FunctionFlags annotate_fn;
  annotate_fn.attach(annotate_cmd);
  std::string annotate_tree;
  int annotate_k = -1;
  annotate_cmd->add_option("--tree", annotate_tree, "tree JSON file")->required();
  annotate_cmd->add_option("--k", annotate_k, "also check the k-fault condition");

  // complexity
  auto* complexity_cmd = app.add_subcommand("complexity", "subformula bounds and query estimate");
  FunctionFlags complexity_fn;
  complexity_fn.attach(complexity_cmd);
  std::string complexity_tree;
  int complexity_k = 0;
  bool weighted = false;
  ComplexityParams params;
  complexity_cmd->add_option("--tree", complexity_tree, "tree JSON file")->required();
  complexity_cmd->add_option("--k", complexity_k, "fault budget k")->required();
  complexity_cmd->add_option("--c1", params.c1, "additive constant")->capture_default_str();
  complexity_cmd->add_option("--c2", params.c2, "energy coupling")->capture_default_str();
  complexity_cmd->add_option("--c-energy", params.c_energy, "energy prefactor")
      ->capture_default_str();
  complexity_cmd->add_option("--c-prime", params.c_prime, "induction constant")
      ->capture_default_str();
  complexity_cmd->add_flag("--weighted", weighted, "use cost-weighted witness sizes");

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "seed or materialize a hard-distribution tree");
  FunctionFlags sample_fn;
  sample_fn.attach(sample_cmd);
  int sample_n = 8, sample_k = 1, forced_root = -1;
  bool sample_explicit = false;
  std::uint64_t probes = 0;
  sample_cmd->add_option("--n", sample_n, "per-level height")->capture_default_str();
  sample_cmd->add_option("--k", sample_k, "recursion levels")->capture_default_str();
  sample_cmd->add_option("--forced-root", forced_root, "-1 free, 0/1 conditioned")
      ->capture_default_str();
  sample_cmd->add_flag("--explicit", sample_explicit, "materialize the full leaf vector");
  sample_cmd->add_option("--probe", probes, "emit a transcript of this many seeded queries");

  // bench-classical
  auto* bench_cmd = app.add_subcommand("bench-classical", "query-vs-success CSV curves");
  std::string grid_path;
  std::uint64_t trials = 100;
  bench_cmd->add_option("--grid", grid_path, "grid config JSON")->required();
  bench_cmd->add_option("--trials", trials, "trials per cell")->capture_default_str();

  // walk-spectrum
  auto* spectrum_cmd = app.add_subcommand("walk-spectrum", "walk Hamiltonian eigenvalues");
  FunctionFlags spectrum_fn;
  spectrum_fn.attach(spectrum_cmd);
  std::string spectrum_tree, edges_out;
  spectrum_cmd->add_option("--tree", spectrum_tree, "tree JSON file")->required();
  spectrum_cmd->add_option("--edges", edges_out, "also write the graph edge list here");

  // propagate
  auto* propagate_cmd = app.add_subcommand("propagate", "eigenvalue-ratio recursion report");
  FunctionFlags propagate_fn;
  propagate_fn.attach(propagate_cmd);
  std::string propagate_tree;
  Real energy = 1e-3, a_leaf = 1.0, b_leaf = 1.0;
  propagate_cmd->add_option("--tree", propagate_tree, "tree JSON file")->required();
  propagate_cmd->add_option("--energy", energy, "walk energy E")->capture_default_str();
  propagate_cmd->add_option("--a-leaf", a_leaf, "1-valued leaf complexity")->capture_default_str();
  propagate_cmd->add_option("--b-leaf", b_leaf, "0-valued leaf complexity")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    if (jobs <= 0) jobs = 1;

    if (analyze_cmd->parsed()) {
      const auto fn = analyze_fn.resolve();
      auto program = build_program(fn);
      if (!skip_normalize) program = normalize_trivial(program);
      const auto analysis = analyze(program);
      Json result;
      result["function"] = to_json(fn);
      result["program"] = to_json(program);
      result["analysis"] = to_json(analysis);
      result["omega"] = analysis.omega;
      write_text_file(out, result.dump(2) + "\n");
      write_manifest(out, "analyze-fn",
                     Json{{"function", to_json(fn)}, {"raw", skip_normalize}}, seed);
      std::cout << fn.name() << ": omega = " << analysis.omega << "\n";
    } else if (annotate_cmd->parsed()) {
      const auto fn = load_tree_function(annotate_tree, annotate_fn);
      const auto tree = load_tree(annotate_tree);
      const auto analysis = analyze(normalize_trivial(build_program(fn)));
      const auto annotation = annotate(analysis, tree);
      Json result = to_json(annotation);
      result["root_value"] = annotation.value[0];
      if (annotate_k >= 0)
        result["k_fault_ok"] = validate_k_fault(annotation, static_cast<std::uint32_t>(annotate_k));
      write_text_file(out, result.dump(2) + "\n");
      write_manifest(out, "annotate",
                     Json{{"tree", annotate_tree}, {"function", to_json(fn)}, {"k", annotate_k}},
                     seed);
      std::cout << "max fault depth = " << annotation.max_fault_depth() << "\n";
    } else if (complexity_cmd->parsed()) {
      const auto fn = load_tree_function(complexity_tree, complexity_fn);
      const auto tree = load_tree(complexity_tree);
      auto program = normalize_trivial(build_program(fn));
      const auto analysis = analyze(program);
      const auto annotation = annotate(analysis, tree);
      const auto report = weighted
                              ? complexity_bound_weighted(program, analysis, annotation, params,
                                                          complexity_k)
                              : complexity_bound(analysis, annotation, params, complexity_k);
      Json result = to_json(report);
      result["max_fault_depth"] = annotation.max_fault_depth();
      write_text_file(out, result.dump(2) + "\n");
      write_manifest(out, "complexity",
                     Json{{"tree", complexity_tree},
                          {"k", complexity_k},
                          {"c1", params.c1},
                          {"c2", params.c2},
                          {"c_energy", params.c_energy},
                          {"c_prime", params.c_prime},
                          {"weighted", weighted}},
                     seed);
      std::cout << "query_estimate = " << report.query_estimate
                << " (energy " << report.energy << ")\n";
    } else if (sample_cmd->parsed()) {
      const auto fn = sample_fn.resolve();
      const auto spec = make_hard_dist_spec(fn, sample_n, sample_k);
      std::optional<int> root;
      if (forced_root == 0 || forced_root == 1) root = forced_root;
      auto oracle = sample_hard_tree(spec, seed, root);
      Json result =
          sample_explicit ? tree_to_json(materialize(*oracle)) : lazy_tree_to_json(spec, seed, root);
      write_text_file(out, result.dump(2) + "\n");
      if (probes > 0) {
        std::uint64_t h = splitmix64(seed ^ 0x50524f4245u);
        for (std::uint64_t q = 0; q < probes; ++q) {
          Path path(spec.total_depth());
          for (auto& digit : path) {
            h = splitmix64(h);
            digit = static_cast<std::uint8_t>(h % fn.arity);
          }
          oracle->query(path);
        }
        write_text_file(out + ".transcript.jsonl", transcript_jsonl(oracle->transcript()));
      }
      write_manifest(out, "sample",
                     Json{{"n", sample_n},
                          {"k", sample_k},
                          {"function", to_json(fn)},
                          {"forced_root", forced_root},
                          {"explicit", sample_explicit},
                          {"probes", probes}},
                     seed);
      std::cout << "true root = " << oracle->true_root() << ", distinct queries = "
                << oracle->query_count() << "\n";
    } else if (bench_cmd->parsed()) {
      const auto grid = grid_from_json(load_json_file(grid_path));
      const auto rows = run_benchmark(grid, trials, seed, jobs);
      write_text_file(out, benchmark_csv(rows));
      write_manifest(out, "bench-classical",
                     Json{{"grid", grid_path}, {"trials", trials}, {"jobs", jobs}}, seed);
      std::cout << "wrote " << rows.size() << " rows\n";
    } else if (spectrum_cmd->parsed()) {
      const auto fn = load_tree_function(spectrum_tree, spectrum_fn);
      const auto tree = load_tree(spectrum_tree);
      const auto graph = build_walk_graph(fn, tree);
      const auto report = hamiltonian_spectrum(graph);
      write_text_file(out, spectrum_csv(report));
      if (!edges_out.empty()) write_text_file(edges_out, edge_list_text(graph));
      write_manifest(out, "walk-spectrum", Json{{"tree", spectrum_tree}}, seed);
      std::cout << graph.node_count << " nodes, root gap = " << report.root_gap
                << ", max residual = " << report.max_residual << "\n";
    } else if (propagate_cmd->parsed()) {
      const auto fn = load_tree_function(propagate_tree, propagate_fn);
      const auto tree = load_tree(propagate_tree);
      const auto state = propagate_ratios(fn, tree, energy, a_leaf, b_leaf);
      Json result = to_json(state);
      result["root_ratio"] = state.root_ratio();
      result["root_complexity"] = state.root_complexity();
      write_text_file(out, result.dump(2) + "\n");
      write_manifest(out, "propagate",
                     Json{{"tree", propagate_tree},
                          {"energy", energy},
                          {"a_leaf", a_leaf},
                          {"b_leaf", b_leaf}},
                     seed);
      std::cout << "root ratio = " << state.root_ratio() << "\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
