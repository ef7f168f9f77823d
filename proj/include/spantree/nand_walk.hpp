#ifndef SPANTREE_NAND_WALK_HPP
#define SPANTREE_NAND_WALK_HPP

#include <cstdint>
#include <vector>

#include "spantree/boolean_tree.hpp"
#include "spantree/types.hpp"

namespace spantree {

/// Composed Y-gadget graph of a NAND tree: one vertex per tree node, a tail
/// vertex hanging off the root, and a pendant vertex on every 1-valued leaf.
struct WalkGraph {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  /// Graph vertex -> tree node index; -1 for the root tail, -2 for pendants.
  std::vector<std::int64_t> tree_position;
  int root_tail = 0;

  bool is_bipartite() const;
};

WalkGraph build_walk_graph(const DirectFunctionSpec& spec, const EvalTree& tree);

struct SpectrumReport {
  Vector eigenvalues;              // ascending, of H = -adjacency
  Matrix eigenvectors;             // columns matching eigenvalues
  std::vector<bool> root_support;  // |amplitude at tail| > support threshold
  Real max_residual = 0;           // max ||H v - lambda v||_inf over pairs
  /// Smallest |lambda| above the zero threshold among root-supported pairs.
  Real root_gap = 0;
};

SpectrumReport hamiltonian_spectrum(const WalkGraph& graph);

/// Per-node eigenvalue-ratio data propagated bottom-up at energy E.
struct RatioState {
  Real energy = 0;
  std::vector<Real> ratio;        // amplitude(node) / amplitude(parent side)
  std::vector<Real> complexity;   // a for 1-valued nodes, b for 0-valued ones
  std::vector<std::uint8_t> sign_class;  // 1 when ratio >= 0

  Real root_ratio() const { return ratio.empty() ? 0 : ratio[0]; }
  Real root_complexity() const { return complexity.empty() ? 0 : complexity[0]; }
};

RatioState propagate_ratios(const DirectFunctionSpec& spec, const EvalTree& tree, Real energy,
                            Real a_leaf = 1.0, Real b_leaf = 1.0);

struct ComplexityRuleReport {
  Real energy = 0;
  /// Max over nodes of complexity / (2^fault_depth * (1 + height/2)).
  Real fitted_constant = 0;
  bool signs_match_values = true;
  std::vector<std::uint64_t> sign_mismatches;
};

ComplexityRuleReport verify_complexity_rules(const DirectFunctionSpec& spec, const EvalTree& tree,
                                             const TreeAnnotation& annotation, Real energy);

namespace walk_tolerances {
inline constexpr Real kRootSupport = 1e-9;
inline constexpr Real kZeroEigenvalue = 1e-8;
inline constexpr Real kResonance = 1e-12;
inline constexpr Real kEnergyValidity = 0.1;  // require max complexity * E below this
}  // namespace walk_tolerances

}  // namespace spantree

#endif  // SPANTREE_NAND_WALK_HPP
