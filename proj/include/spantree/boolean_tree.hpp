#ifndef SPANTREE_BOOLEAN_TREE_HPP
#define SPANTREE_BOOLEAN_TREE_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <variant>
#include <vector>

#include "spantree/span_program.hpp"
#include "spantree/types.hpp"

namespace spantree {

/// Leaf source for trees too large to materialize.
class LeafOracle {
 public:
  virtual ~LeafOracle() = default;
  virtual int arity() const = 0;
  virtual int depth() const = 0;
  virtual int query(PathView leaf_path) = 0;
  virtual std::uint64_t query_count() const = 0;
};

/// Complete c-ary evaluation tree with breadth-first node indexing:
/// node 0 is the root and child j of node d is d*c + j + 1.
class EvalTree {
 public:
  EvalTree(int arity, int depth, std::vector<std::uint8_t> leaves);
  EvalTree(std::shared_ptr<LeafOracle> oracle);

  int arity() const { return arity_; }
  int depth() const { return depth_; }
  bool is_lazy() const { return oracle_ != nullptr; }
  std::uint64_t node_count() const { return node_count_; }
  std::uint64_t leaf_count() const { return leaf_count_; }
  std::uint64_t leaf_begin() const { return node_count_ - leaf_count_; }

  std::uint64_t child(std::uint64_t node, int j) const { return node * arity_ + j + 1; }
  bool is_leaf(std::uint64_t node) const { return node >= leaf_begin(); }
  int height(std::uint64_t node) const;
  Path path_of_leaf(std::uint64_t leaf_ordinal) const;

  /// Node value, computed bottom-up on demand and cached.
  int value(std::uint64_t node, const DirectFunctionSpec& spec) const;

  const std::vector<std::uint8_t>& explicit_leaves() const;
  LeafOracle* oracle() const { return oracle_.get(); }

 private:
  int leaf_value(std::uint64_t leaf_ordinal) const;

  int arity_ = 2;
  int depth_ = 0;
  std::uint64_t node_count_ = 1;
  std::uint64_t leaf_count_ = 1;
  std::vector<std::uint8_t> leaves_;
  std::shared_ptr<LeafOracle> oracle_;
  mutable std::vector<std::int8_t> cache_;
};

int eval_tree(const DirectFunctionSpec& spec, const EvalTree& tree);

/// Per-node labels from the function analysis plus the fault-depth counter.
struct TreeAnnotation {
  int arity = 2;
  int depth = 0;
  std::vector<std::uint8_t> value;
  std::vector<std::uint8_t> trivial;       // leaves count as trivial
  std::vector<std::uint16_t> strong_mask;  // bit j set when child j is strong
  std::vector<std::uint32_t> fault_depth;  // the counter of Def-style recursion

  std::uint64_t leaf_begin = 0;

  std::uint32_t max_fault_depth() const;
  std::uint64_t child(std::uint64_t node, int j) const { return node * arity + j + 1; }
  bool is_leaf(std::uint64_t node) const { return node >= leaf_begin; }
};

TreeAnnotation annotate(const FunctionAnalysis& analysis, const EvalTree& tree);
bool validate_k_fault(const TreeAnnotation& annotation, std::uint32_t k);

struct ComplexityParams {
  Real c1 = 1.0;
  Real c2 = 1.0;
  Real c_energy = 0.005;  // 0.01 * min(1, 1/(c2*c_prime)) for the defaults
  Real c_prime = 2.0;

  void validate() const;
};

struct ComplexityReport {
  std::vector<Real> node_bound;  // per-node subformula-complexity bound
  Real energy = 0;
  Real query_estimate = 0;
  Real omega = 0;
  int k = 0;
  /// Nodes where the induction invariant bound fails (empty when it holds).
  std::vector<std::uint64_t> induction_violations;

  Real root_bound() const { return node_bound.empty() ? 0 : node_bound[0]; }
};

ComplexityReport complexity_bound(const FunctionAnalysis& analysis,
                                  const TreeAnnotation& annotation,
                                  const ComplexityParams& params, int k);

/// Tighter variant using cost-weighted witness sizes with child bounds as
/// costs; needs the program itself for the weighted solves.
ComplexityReport complexity_bound_weighted(const SpanProgram& program,
                                           const FunctionAnalysis& analysis,
                                           const TreeAnnotation& annotation,
                                           const ComplexityParams& params, int k);

Real query_estimate(int n, int k, Real omega, const ComplexityParams& params);

/// Random tree with fault-depth at most k everywhere, built top-down by
/// budgeting faults along strong chains.
EvalTree random_kfault_tree(const FunctionAnalysis& analysis, int depth, int k,
                            std::mt19937_64& rng);

}  // namespace spantree

#endif  // SPANTREE_BOOLEAN_TREE_HPP
