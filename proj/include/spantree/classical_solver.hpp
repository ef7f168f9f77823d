#ifndef SPANTREE_CLASSICAL_SOLVER_HPP
#define SPANTREE_CLASSICAL_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "spantree/boolean_tree.hpp"
#include "spantree/hard_distribution.hpp"
#include "spantree/types.hpp"

namespace spantree {

/// Counting oracle over explicit leaves; repeated queries are memoized.
class ExplicitOracle final : public LeafOracle {
 public:
  ExplicitOracle(int arity, int depth, std::vector<std::uint8_t> leaves);
  explicit ExplicitOracle(const EvalTree& tree);

  int arity() const override { return arity_; }
  int depth() const override { return depth_; }
  int query(PathView leaf_path) override;
  std::uint64_t query_count() const override { return count_; }

 private:
  int arity_;
  int depth_;
  std::vector<std::uint8_t> leaves_;
  std::vector<bool> queried_;
  std::uint64_t count_ = 0;
};

struct SolveResult {
  int answer = 0;
  std::uint64_t queries = 0;
  /// (query counter value, confidence) after each tracker update; present
  /// for the split-search solver.
  std::vector<std::pair<std::uint64_t, Real>> confidence_trace;
  /// Split-search only: most probable category of the top block.
  int category = 0;
};

/// Exact randomized short-circuit evaluation: children are queried in random
/// order (or left-to-right when randomize_order is false) and evaluation
/// stops as soon as the partial assignment forces the output.
SolveResult solve_shortcircuit(const DirectFunctionSpec& spec, LeafOracle& oracle,
                               std::mt19937_64& rng, bool randomize_order = true);

/// Noisy binary search for the per-level split depth, driven by the exact
/// category posterior; returns the maximum-posterior root when the budget
/// runs out.
SolveResult solve_splitsearch(const HardDistSpec& spec, LazyTreeOracle& oracle,
                              std::uint64_t budget, std::mt19937_64& rng);

struct BenchmarkCell {
  std::string algorithm;  // "shortcircuit" | "splitsearch"
  DirectFunctionSpec function = DirectFunctionSpec::nand_fn();
  int n = 8;
  int k = 1;
  std::uint64_t budget = 0;  // 0 means unlimited (shortcircuit)
};

struct BenchmarkRow {
  std::string algorithm;
  int n = 0;
  int k = 0;
  std::uint64_t trials = 0;
  std::uint64_t budget = 0;
  Real success = 0;
  Real mean_queries = 0;
  std::uint64_t seed = 0;
};

std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkCell>& grid,
                                        std::uint64_t trials, std::uint64_t seed, int jobs = 1);

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

/// One interval-splitting strategy: given the history of interval sizes
/// (A_0..A_tau), produce the next split fraction in [0, 1].
using DivisionStrategy = std::function<Real(const std::vector<Real>&)>;

struct DivisionProcessResult {
  Real initial = 0;
  int steps = 0;
  std::uint64_t trials = 0;
  std::vector<Real> thresholds;     // the requested F values
  std::vector<Real> probabilities;  // empirical Pr[A_m < F * A_0]
};

DivisionProcessResult simulate_division_process(Real initial, int steps,
                                                const DivisionStrategy& strategy,
                                                std::uint64_t trials,
                                                const std::vector<Real>& thresholds,
                                                std::mt19937_64& rng);

}  // namespace spantree

#endif  // SPANTREE_CLASSICAL_SOLVER_HPP
