#include "spantree/nand_walk.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace spantree {

namespace {

constexpr std::uint64_t kMaxWalkNodes = 12000;

void require_nand(const DirectFunctionSpec& spec) {
  if (spec.arity != 2 || spec.truth_table != std::vector<std::uint8_t>{1, 1, 1, 0})
    throw ConfigError("walk gadgets are defined for the NAND function only");
}

}  // namespace

bool WalkGraph::is_bipartite() const {
  std::vector<int> color(node_count, -1);
  std::vector<std::vector<int>> adjacency(node_count);
  for (const auto& [a, b] : edges) {
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  std::vector<int> stack;
  for (int start = 0; start < node_count; ++start) {
    if (color[start] >= 0) continue;
    color[start] = 0;
    stack.push_back(start);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adjacency[v]) {
        if (color[w] < 0) {
          color[w] = 1 - color[v];
          stack.push_back(w);
        } else if (color[w] == color[v]) {
          return false;
        }
      }
    }
  }
  return true;
}

WalkGraph build_walk_graph(const DirectFunctionSpec& spec, const EvalTree& tree) {
  require_nand(spec);
  if (tree.node_count() + tree.leaf_count() + 1 > kMaxWalkNodes)
    throw ConfigError("tree too deep for a dense walk graph");

  WalkGraph graph;
  const std::uint64_t tree_nodes = tree.node_count();
  graph.tree_position.reserve(tree_nodes + 2);
  for (std::uint64_t v = 0; v < tree_nodes; ++v)
    graph.tree_position.push_back(static_cast<std::int64_t>(v));

  for (std::uint64_t v = 0; v < tree_nodes; ++v) {
    if (tree.is_leaf(v)) continue;
    for (int j = 0; j < tree.arity(); ++j)
      graph.edges.push_back({static_cast<int>(v), static_cast<int>(tree.child(v, j))});
  }

  graph.root_tail = static_cast<int>(graph.tree_position.size());
  graph.tree_position.push_back(-1);
  graph.edges.push_back({0, graph.root_tail});

  // 1-valued leaves carry a pendant vertex; 0-valued leaves are bare.
  for (std::uint64_t leaf = tree.leaf_begin(); leaf < tree_nodes; ++leaf) {
    if (tree.value(leaf, spec) != 1) continue;
    const int pendant = static_cast<int>(graph.tree_position.size());
    graph.tree_position.push_back(-2);
    graph.edges.push_back({static_cast<int>(leaf), pendant});
  }

  graph.node_count = static_cast<int>(graph.tree_position.size());
  return graph;
}

SpectrumReport hamiltonian_spectrum(const WalkGraph& graph) {
  Matrix hamiltonian = Matrix::Zero(graph.node_count, graph.node_count);
  for (const auto& [a, b] : graph.edges) {
    hamiltonian(a, b) = -1;
    hamiltonian(b, a) = -1;
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(hamiltonian);
  SpectrumReport report;
  report.eigenvalues = solver.eigenvalues();
  report.eigenvectors = solver.eigenvectors();
  report.root_support.resize(graph.node_count);
  report.root_gap = 0;

  Real best_gap = 0;
  bool found = false;
  for (int i = 0; i < graph.node_count; ++i) {
    const Real lambda = report.eigenvalues(i);
    const Vector v = report.eigenvectors.col(i);
    report.max_residual =
        std::max(report.max_residual, (hamiltonian * v - lambda * v).lpNorm<Eigen::Infinity>());
    const bool supported = std::abs(v(graph.root_tail)) > walk_tolerances::kRootSupport;
    report.root_support[i] = supported;
    if (supported && std::abs(lambda) > walk_tolerances::kZeroEigenvalue &&
        (!found || std::abs(lambda) < best_gap)) {
      best_gap = std::abs(lambda);
      found = true;
    }
  }
  report.root_gap = found ? best_gap : 0;
  return report;
}

RatioState propagate_ratios(const DirectFunctionSpec& spec, const EvalTree& tree, Real energy,
                            Real a_leaf, Real b_leaf) {
  require_nand(spec);
  if (energy <= 0) throw ConfigError("energy must be positive");
  if (a_leaf <= 0 || b_leaf <= 0) throw ConfigError("leaf complexities must be positive");

  const std::uint64_t nodes = tree.node_count();
  RatioState state;
  state.energy = energy;
  state.ratio.assign(nodes, 0);
  state.complexity.assign(nodes, 0);
  state.sign_class.assign(nodes, 0);

  for (std::uint64_t idx = nodes; idx-- > 0;) {
    Real y;
    if (tree.is_leaf(idx)) {
      y = tree.value(idx, spec) == 1 ? a_leaf * energy : -1.0 / (b_leaf * energy);
    } else {
      const Real y1 = state.ratio[tree.child(idx, 0)];
      const Real y2 = state.ratio[tree.child(idx, 1)];
      const Real denominator = y1 + y2 + energy;
      if (std::abs(denominator) <= walk_tolerances::kResonance)
        throw NumericError("ratio recursion hit a resonance: energy too close to an eigenvalue");
      y = -1.0 / denominator;
    }
    state.ratio[idx] = y;
    state.sign_class[idx] = y >= 0 ? 1 : 0;
    const Real complexity = y >= 0 ? y / energy : -1.0 / (y * energy);
    state.complexity[idx] = complexity;
    if (complexity * energy > walk_tolerances::kEnergyValidity)
      throw NumericError("energy validity bound exceeded: complexity * E > 0.1; pick a smaller E");
  }
  return state;
}

ComplexityRuleReport verify_complexity_rules(const DirectFunctionSpec& spec, const EvalTree& tree,
                                             const TreeAnnotation& annotation, Real energy) {
  const RatioState state = propagate_ratios(spec, tree, energy);
  ComplexityRuleReport report;
  report.energy = energy;

  const std::uint64_t nodes = tree.node_count();
  for (std::uint64_t idx = 0; idx < nodes; ++idx) {
    const int height = tree.height(idx);
    const Real scale = std::pow(2.0, annotation.fault_depth[idx]) * (1.0 + 0.5 * height);
    report.fitted_constant = std::max(report.fitted_constant, state.complexity[idx] / scale);
    if (static_cast<int>(state.sign_class[idx]) != static_cast<int>(annotation.value[idx]))
      report.sign_mismatches.push_back(idx);
  }
  report.signs_match_values = report.sign_mismatches.empty();
  return report;
}

}  // namespace spantree
