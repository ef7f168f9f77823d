#ifndef SPANTREE_HARD_DISTRIBUTION_HPP
#define SPANTREE_HARD_DISTRIBUTION_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "spantree/boolean_tree.hpp"
#include "spantree/span_program.hpp"
#include "spantree/types.hpp"

namespace spantree {

/// The unique all-trivial tree of the given height and root value: children
/// of a 1-valued node carry the all-chi-1 literal bits, children of a
/// 0-valued node the all-chi-0 bits.
EvalTree trivial_tree(const DirectFunctionSpec& spec, int root_value, int height);

/// Child value along the all-trivial descent.
inline int trivial_child_value(const DirectFunctionSpec& spec, int node_value, int digit) {
  const std::uint32_t literals = spec.all_chi_input(node_value);
  return (literals >> digit) & 1u;
}

/// Value reached by descending an all-trivial segment along `path`.
int trivial_descend(const DirectFunctionSpec& spec, int root_value, PathView path);

struct WeightedGadgetTree {
  std::vector<std::uint8_t> leaves;  // depth-n0 explicit leaves
  Rational weight;
};

/// Per root value: a weighted set of depth-n0 fault gadgets whose leaf
/// marginals are exactly uniform.
struct GadgetDistribution {
  int arity = 2;
  int n0 = 0;
  int k0 = 0;
  std::array<std::vector<WeightedGadgetTree>, 2> trees;

  /// Exact rational check that every leaf position has marginal 1/2.
  bool has_uniform_leaf_marginals() const;
};

GadgetDistribution default_gadgets(const FunctionAnalysis& analysis);

/// Parameters of the recursive hard input distribution.
struct HardDistSpec {
  DirectFunctionSpec function;
  GadgetDistribution gadgets;
  int n0 = 0;
  int k0 = 0;
  int n = 0;  // per-level height
  int k = 1;  // number of recursive levels

  int category_count() const { return n - n0; }            // \tilde n
  int per_level_budget() const;                            // floor(log2(n - n0) / 10)
  int total_depth() const { return n * k; }

  void validate() const;
};

HardDistSpec make_hard_dist_spec(const DirectFunctionSpec& function, int n, int k);

/// Lazy, memoized, query-counted oracle over one sampled hard-distribution
/// tree. All randomness is derived by hashing (seed, position), so the
/// sampled tree is a pure function of the seed and replay is independent of
/// query order.
class LazyTreeOracle final : public LeafOracle {
 public:
  LazyTreeOracle(HardDistSpec spec, std::uint64_t seed,
                 std::optional<int> forced_root = std::nullopt);

  int arity() const override { return spec_.function.arity; }
  int depth() const override { return spec_.total_depth(); }
  int query(PathView leaf_path) override;
  std::uint64_t query_count() const override { return transcript_.size(); }

  /// Leaf value without touching the query counter (test/benchmark support).
  int peek(PathView leaf_path) const;

  int true_root() const;
  /// Drawn category of the level-`level` block containing `block_root_path`.
  int category_of_block(int level, PathView block_root_path) const;

  const HardDistSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }

  struct TranscriptEntry {
    Path path;
    int bit;
    std::uint64_t counter;
  };
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  int block_root_value(int level, PathView prefix) const;
  int block_leaf_value(int level, PathView prefix, PathView rel_path) const;
  int gadget_draw(int root_value, PathView abs_path) const;

  HardDistSpec spec_;
  std::uint64_t seed_ = 0;
  std::optional<int> forced_root_;
  std::unordered_map<std::string, std::uint8_t> memo_;
  std::vector<TranscriptEntry> transcript_;
};

std::shared_ptr<LazyTreeOracle> sample_hard_tree(const HardDistSpec& spec, std::uint64_t seed,
                                                 std::optional<int> forced_root = std::nullopt);

/// Materializes the full tree (small depths only); does not count queries.
EvalTree materialize(const LazyTreeOracle& oracle);

/// Exact category/root posterior for a single depth-n block: p(i, r) is the
/// probability that the observed leaves are consistent with category i and
/// block root r, taken over the gadget draws.
class PosteriorTracker {
 public:
  explicit PosteriorTracker(const HardDistSpec& spec);

  /// Records one observed leaf of the block (path relative to the block
  /// root, length n) and updates every category multiplicatively.
  void update(PathView block_path, int observed_bit);

  /// P(leaf at block_path reads 1 | category, root, history), without
  /// recording anything.
  Eigen::ArrayXXd predictive_factors(PathView block_path) const;

  const Eigen::ArrayXXd& category_posterior() const { return p_; }
  Real survival_total() const { return p_.sum(); }                   // S
  Real split_difference() const;                                     // D
  Real confidence() const;
  std::uint64_t update_count() const { return observations_.size(); }

  /// Root-value guess with the larger summed posterior; ties go to 0.
  int best_root() const;
  /// Category with the largest summed posterior; ties go to the smaller one.
  int best_category() const;

 private:
  struct Observation {
    Path path;
    int bit;
    // suffix_desc[j][v]: value reached at the leaf when the node at depth j
    // on this path has value v and everything below is all-trivial descent.
    std::vector<std::array<std::uint8_t, 2>> suffix_desc;
  };
  struct Group {
    std::array<Real, 2> weight = {1.0, 1.0};
    std::vector<std::uint32_t> members;
  };
  struct PathContext {
    Observation obs;
    std::vector<std::array<std::uint8_t, 2>> prefix_value;
    std::vector<std::uint64_t> prefix_hash;
  };

  PathContext make_context(PathView block_path, int bit) const;
  std::array<Real, 2> group_weight_with(const Group* group, const Observation& extra,
                                        int category) const;
  bool consistent(const WeightedGadgetTree& gadget, const Observation& obs, int category) const;

  HardDistSpec spec_;
  int categories_ = 0;
  Eigen::ArrayXXd p_;  // categories x 2
  std::vector<Observation> observations_;
  std::vector<std::unordered_map<std::uint64_t, Group>> groups_;  // per category
};

/// Composition helper for multi-level trees: the survival probability of a
/// top block equals the product over its leaves of the per-leaf root
/// survivals.
Real block_survival_product(std::span<const Real> leaf_root_survivals);

}  // namespace spantree

#endif  // SPANTREE_HARD_DISTRIBUTION_HPP
