#ifndef SPANTREE_JSON_IO_HPP
#define SPANTREE_JSON_IO_HPP

#include <json.hpp>

#include <memory>
#include <string>

#include "spantree/boolean_tree.hpp"
#include "spantree/classical_solver.hpp"
#include "spantree/hard_distribution.hpp"
#include "spantree/nand_walk.hpp"
#include "spantree/span_program.hpp"

namespace spantree {

using Json = nlohmann::json;

Json to_json(const DirectFunctionSpec& spec);
DirectFunctionSpec function_from_json(const Json& j);

Json to_json(const SpanProgram& program);
SpanProgram program_from_json(const Json& j);

Json to_json(const GadgetDistribution& gadgets);
GadgetDistribution gadgets_from_json(const Json& j);

Json to_json(const HardDistSpec& spec);
HardDistSpec hard_dist_from_json(const Json& j);

/// Tree files hold either explicit leaves or a seeded distribution handle.
Json tree_to_json(const EvalTree& tree);
Json lazy_tree_to_json(const HardDistSpec& spec, std::uint64_t seed,
                       std::optional<int> forced_root = std::nullopt);
EvalTree tree_from_json(const Json& j);
/// The function backing a tree file: explicit trees need `function` beside
/// the tree (or a caller-supplied default); lazy trees carry their own.
DirectFunctionSpec tree_function_from_json(const Json& j,
                                           const std::optional<DirectFunctionSpec>& fallback);

Json to_json(const FunctionAnalysis& analysis);
Json to_json(const TreeAnnotation& annotation);
Json to_json(const ComplexityReport& report);
Json to_json(const RatioState& state);

std::string transcript_jsonl(const std::vector<LazyTreeOracle::TranscriptEntry>& transcript);

std::vector<BenchmarkCell> grid_from_json(const Json& j);

std::string spectrum_csv(const SpectrumReport& report);
std::string edge_list_text(const WalkGraph& graph);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);

}  // namespace spantree

#endif  // SPANTREE_JSON_IO_HPP
