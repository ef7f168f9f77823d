#include "spantree/json_io.hpp"

#include <fstream>
#include <sstream>

namespace spantree {

namespace {

std::string kind_name(FunctionKind kind) {
  switch (kind) {
    case FunctionKind::Threshold: return "threshold";
    case FunctionKind::NegatedThreshold: return "negated_threshold";
    case FunctionKind::Custom: return "custom";
  }
  return "custom";
}

}  // namespace

Json to_json(const DirectFunctionSpec& spec) {
  Json j;
  j["arity"] = spec.arity;
  j["kind"] = kind_name(spec.kind);
  j["h"] = spec.threshold;
  j["truth_table"] = spec.truth_table;
  j["polarity"] = std::vector<bool>(spec.polarity.begin(), spec.polarity.end());
  return j;
}

DirectFunctionSpec function_from_json(const Json& j) {
  const std::string kind = j.value("kind", "custom");
  const int arity = j.at("arity").get<int>();
  if (kind == "nand") return DirectFunctionSpec::nand_fn();
  if (kind == "threshold") return DirectFunctionSpec::threshold_fn(arity, j.at("h").get<int>());
  if (kind == "negated_threshold")
    return DirectFunctionSpec::negated_threshold_fn(arity, j.at("h").get<int>());
  if (kind == "custom") {
    std::optional<std::vector<bool>> polarity;
    if (j.contains("polarity")) polarity = j.at("polarity").get<std::vector<bool>>();
    return DirectFunctionSpec::custom_fn(arity, j.at("truth_table").get<std::vector<std::uint8_t>>(),
                                         polarity);
  }
  throw ConfigError("unknown function kind: " + kind);
}

Json to_json(const SpanProgram& program) {
  Json j;
  j["rows"] = program.matrix.rows();
  j["cols"] = program.matrix.cols();
  std::vector<Real> data;
  data.reserve(program.matrix.size());
  for (Index r = 0; r < program.matrix.rows(); ++r)
    for (Index c = 0; c < program.matrix.cols(); ++c) data.push_back(program.matrix(r, c));
  j["matrix"] = data;
  j["polarity"] = std::vector<bool>(program.polarity.begin(), program.polarity.end());
  j["normalized"] = program.normalized;
  return j;
}

SpanProgram program_from_json(const Json& j) {
  SpanProgram program;
  const Index rows = j.at("rows").get<Index>();
  const Index cols = j.at("cols").get<Index>();
  const auto data = j.at("matrix").get<std::vector<Real>>();
  if (static_cast<Index>(data.size()) != rows * cols)
    throw ConfigError("program matrix size mismatch");
  program.matrix.resize(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) program.matrix(r, c) = data[r * cols + c];
  program.polarity = j.at("polarity").get<std::vector<bool>>();
  program.normalized = j.value("normalized", false);
  return program;
}

Json to_json(const GadgetDistribution& gadgets) {
  Json j;
  j["arity"] = gadgets.arity;
  j["n0"] = gadgets.n0;
  j["k0"] = gadgets.k0;
  for (int r = 0; r < 2; ++r) {
    Json side = Json::array();
    for (const auto& t : gadgets.trees[r]) {
      Json entry;
      entry["leaves"] = t.leaves;
      entry["weight"] = {t.weight.num, t.weight.den};
      side.push_back(entry);
    }
    j[r == 0 ? "r0" : "r1"] = side;
  }
  return j;
}

GadgetDistribution gadgets_from_json(const Json& j) {
  GadgetDistribution gadgets;
  gadgets.arity = j.at("arity").get<int>();
  gadgets.n0 = j.at("n0").get<int>();
  gadgets.k0 = j.at("k0").get<int>();
  for (int r = 0; r < 2; ++r) {
    for (const auto& entry : j.at(r == 0 ? "r0" : "r1")) {
      WeightedGadgetTree t;
      t.leaves = entry.at("leaves").get<std::vector<std::uint8_t>>();
      const auto w = entry.at("weight");
      t.weight = Rational(w.at(0).get<std::int64_t>(), w.at(1).get<std::int64_t>());
      gadgets.trees[r].push_back(std::move(t));
    }
  }
  return gadgets;
}

Json to_json(const HardDistSpec& spec) {
  Json j;
  j["function"] = to_json(spec.function);
  j["n0"] = spec.n0;
  j["k0"] = spec.k0;
  j["n"] = spec.n;
  j["k"] = spec.k;
  j["gadgets"] = to_json(spec.gadgets);
  return j;
}

HardDistSpec hard_dist_from_json(const Json& j) {
  HardDistSpec spec;
  spec.function = function_from_json(j.at("function"));
  spec.n0 = j.at("n0").get<int>();
  spec.k0 = j.at("k0").get<int>();
  spec.n = j.at("n").get<int>();
  spec.k = j.at("k").get<int>();
  spec.gadgets = gadgets_from_json(j.at("gadgets"));
  spec.validate();
  return spec;
}

Json tree_to_json(const EvalTree& tree) {
  if (tree.is_lazy()) throw ConfigError("cannot serialize a lazy tree as explicit leaves");
  Json j;
  j["arity"] = tree.arity();
  j["depth"] = tree.depth();
  j["leaves"] = tree.explicit_leaves();
  return j;
}

Json lazy_tree_to_json(const HardDistSpec& spec, std::uint64_t seed,
                       std::optional<int> forced_root) {
  Json j;
  j["distribution"] = to_json(spec);
  j["seed"] = seed;
  if (forced_root) j["forced_root"] = *forced_root;
  return j;
}

EvalTree tree_from_json(const Json& j) {
  if (j.contains("distribution")) {
    const HardDistSpec spec = hard_dist_from_json(j.at("distribution"));
    std::optional<int> forced_root;
    if (j.contains("forced_root")) forced_root = j.at("forced_root").get<int>();
    return EvalTree(sample_hard_tree(spec, j.at("seed").get<std::uint64_t>(), forced_root));
  }
  return EvalTree(j.at("arity").get<int>(), j.at("depth").get<int>(),
                  j.at("leaves").get<std::vector<std::uint8_t>>());
}

DirectFunctionSpec tree_function_from_json(const Json& j,
                                           const std::optional<DirectFunctionSpec>& fallback) {
  if (j.contains("distribution")) return function_from_json(j.at("distribution").at("function"));
  if (j.contains("function")) return function_from_json(j.at("function"));
  if (fallback) return *fallback;
  throw ConfigError("tree file carries no function; pass one explicitly");
}

Json to_json(const FunctionAnalysis& analysis) {
  Json j;
  j["omega"] = analysis.omega;
  j["arity"] = analysis.spec.arity;
  Json table = Json::array();
  for (std::size_t x = 0; x < analysis.per_input.size(); ++x) {
    const auto& entry = analysis.per_input[x];
    Json row;
    row["input"] = x;
    row["value"] = entry.value;
    row["wsize"] = entry.wsize;
    row["trivial"] = entry.trivial;
    row["strong"] = std::vector<bool>(entry.strong.begin(), entry.strong.end());
    table.push_back(row);
  }
  j["per_input"] = table;
  return j;
}

Json to_json(const TreeAnnotation& annotation) {
  Json j;
  j["arity"] = annotation.arity;
  j["depth"] = annotation.depth;
  j["value"] = annotation.value;
  j["trivial"] = annotation.trivial;
  j["strong_mask"] = annotation.strong_mask;
  j["fault_depth"] = annotation.fault_depth;
  j["max_fault_depth"] = annotation.max_fault_depth();
  return j;
}

Json to_json(const ComplexityReport& report) {
  Json j;
  j["energy"] = report.energy;
  j["query_estimate"] = report.query_estimate;
  j["omega"] = report.omega;
  j["k"] = report.k;
  j["node_bound"] = report.node_bound;
  j["induction_violations"] = report.induction_violations;
  return j;
}

Json to_json(const RatioState& state) {
  Json j;
  j["energy"] = state.energy;
  j["ratio"] = state.ratio;
  j["complexity"] = state.complexity;
  j["sign_class"] = state.sign_class;
  return j;
}

std::string transcript_jsonl(const std::vector<LazyTreeOracle::TranscriptEntry>& transcript) {
  std::ostringstream out;
  for (const auto& entry : transcript) {
    Json j;
    j["path"] = entry.path;
    j["bit"] = entry.bit;
    j["counter"] = entry.counter;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<BenchmarkCell> grid_from_json(const Json& j) {
  const Json& cells = j.is_array() ? j : j.at("cells");
  std::vector<BenchmarkCell> grid;
  for (const auto& item : cells) {
    BenchmarkCell cell;
    cell.algorithm = item.at("algorithm").get<std::string>();
    cell.n = item.at("n").get<int>();
    cell.k = item.at("k").get<int>();
    cell.budget = item.value("budget", std::uint64_t(0));
    if (item.contains("function")) cell.function = function_from_json(item.at("function"));
    grid.push_back(std::move(cell));
  }
  return grid;
}

std::string spectrum_csv(const SpectrumReport& report) {
  std::ostringstream out;
  out << "eigenvalue,root_support\n";
  out.precision(17);
  for (Index i = 0; i < report.eigenvalues.size(); ++i)
    out << report.eigenvalues(i) << ',' << (report.root_support[i] ? 1 : 0) << '\n';
  return out.str();
}

std::string edge_list_text(const WalkGraph& graph) {
  std::ostringstream out;
  for (const auto& [a, b] : graph.edges) out << a << ' ' << b << '\n';
  return out.str();
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << contents;
}

}  // namespace spantree
