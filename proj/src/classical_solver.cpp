#include "spantree/classical_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

namespace spantree {

namespace {

std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

ExplicitOracle::ExplicitOracle(int arity, int depth, std::vector<std::uint8_t> leaves)
    : arity_(arity), depth_(depth), leaves_(std::move(leaves)) {
  if (leaves_.size() != pow_u64(arity_, depth_))
    throw ConfigError("leaf count does not match arity^depth");
  queried_.assign(leaves_.size(), false);
}

ExplicitOracle::ExplicitOracle(const EvalTree& tree)
    : ExplicitOracle(tree.arity(), tree.depth(), tree.explicit_leaves()) {}

int ExplicitOracle::query(PathView leaf_path) {
  if (static_cast<int>(leaf_path.size()) != depth_) throw ConfigError("bad leaf path length");
  std::uint64_t ordinal = 0;
  for (std::uint8_t d : leaf_path) {
    if (d >= arity_) throw ConfigError("leaf path digit out of range");
    ordinal = ordinal * arity_ + d;
  }
  if (!queried_[ordinal]) {
    queried_[ordinal] = true;
    ++count_;
  }
  return leaves_[ordinal];
}

namespace {

struct ShortCircuit {
  const DirectFunctionSpec& spec;
  LeafOracle& oracle;
  std::mt19937_64& rng;
  bool randomize;
  Path path;

  // Output forced iff every completion of the known children agrees.
  bool forced(std::uint32_t known_mask, std::uint32_t known_bits, int& value) const {
    const int c = spec.arity;
    int seen = -1;
    const std::uint32_t full = (1u << c) - 1u;
    const std::uint32_t unknown = full & ~known_mask;
    for (std::uint32_t sub = unknown;; sub = (sub - 1) & unknown) {
      const int v = spec.value(known_bits | sub);
      if (seen < 0) seen = v;
      if (v != seen) return false;
      if (sub == 0) break;
    }
    value = seen;
    return true;
  }

  int evaluate(int height) {
    if (height == 0) return oracle.query(path);
    std::vector<int> order(spec.arity);
    std::iota(order.begin(), order.end(), 0);
    if (randomize) std::shuffle(order.begin(), order.end(), rng);

    std::uint32_t known_mask = 0, known_bits = 0;
    int value = -1;
    for (int j : order) {
      path.push_back(static_cast<std::uint8_t>(j));
      const int child = evaluate(height - 1);
      path.pop_back();
      known_mask |= 1u << j;
      known_bits |= std::uint32_t(child) << j;
      if (forced(known_mask, known_bits, value)) return value;
    }
    return spec.value(known_bits);
  }
};

}  // namespace

SolveResult solve_shortcircuit(const DirectFunctionSpec& spec, LeafOracle& oracle,
                               std::mt19937_64& rng, bool randomize_order) {
  if (oracle.arity() != spec.arity) throw ConfigError("oracle arity does not match function");
  const std::uint64_t before = oracle.query_count();
  ShortCircuit walker{spec, oracle, rng, randomize_order, {}};
  SolveResult result;
  result.answer = walker.evaluate(oracle.depth());
  result.queries = oracle.query_count() - before;
  return result;
}

namespace {

// One level of the split search: drives the exact posterior with leaf pairs
// whose divergence depth brackets the candidate split.
class BlockSearch {
 public:
  BlockSearch(const HardDistSpec& spec, std::function<int(PathView)> observe)
      : spec_(spec), observe_(std::move(observe)), tracker_(spec) {}

  // Runs up to `observations` probes; returns the observations actually used.
  std::uint64_t run(std::uint64_t observations,
                    std::vector<std::pair<std::uint64_t, Real>>* trace,
                    const std::function<std::uint64_t()>& query_counter,
                    const std::function<bool()>& exhausted) {
    const int n = spec_.n;
    std::uint64_t used = 0;
    if (observations == 0 || exhausted()) return 0;

    probe(Path(n, 0), trace, query_counter);
    ++used;

    while (used < observations && !exhausted()) {
      if (tracker_.confidence() >= 1.0 - 1e-12 && category_mass_concentrated()) break;
      probe(best_probe(), trace, query_counter);
      ++used;
    }
    return used;
  }

  const PosteriorTracker& tracker() const { return tracker_; }

 private:
  bool category_mass_concentrated() const {
    const auto& p = tracker_.category_posterior();
    const Real total = p.sum();
    const int best = tracker_.best_category();
    return total > 0 && p(best - 1, 0) + p(best - 1, 1) >= total * (1.0 - 1e-12);
  }

  int quantile_category(Real fraction) const {
    const auto& p = tracker_.category_posterior();
    const Real target = p.sum() * fraction;
    Real acc = 0;
    for (int i = 0; i < p.rows(); ++i) {
      acc += p(i, 0) + p(i, 1);
      if (acc >= target) return i + 1;
    }
    return static_cast<int>(p.rows());
  }

  // Greedy one-step probe selection: among structured candidate divergence
  // depths, maximize the expected information about (category, root).
  Path best_probe() {
    const int n = spec_.n;
    const int n0 = spec_.n0;
    const int median = quantile_category(0.5);
    const int mode = tracker_.best_category();

    std::vector<int> candidates;
    auto add = [&](int h) {
      h = std::clamp(h, 1, n - 1);
      if (std::find(candidates.begin(), candidates.end(), h) == candidates.end())
        candidates.push_back(h);
    };
    add(median + n0);
    for (int off = n0 - 1; off >= 0; --off) add(median + off);
    for (int off = n0 - 1; off >= 0; --off) add(mode + off);
    add(quantile_category(0.25) + n0);
    add(quantile_category(0.75) + n0);
    std::sort(candidates.begin(), candidates.end());

    const auto& p = tracker_.category_posterior();
    const Real total = p.sum();
    Real best_score = -1;
    int best_h = candidates.front();
    Path best;
    for (int h : candidates) {
      Path path = divergent_path(h);
      const Eigen::ArrayXXd f = tracker_.predictive_factors(path);
      const Real p_one = (p * f).sum() / total;
      const Real noise = (p * f.unaryExpr([](Real x) { return binary_entropy(x); })).sum() / total;
      const Real score = binary_entropy(p_one) - noise;
      if (score > best_score + 1e-15) {
        best_score = score;
        best_h = h;
        best = std::move(path);
      }
    }
    ++replica_count_[best_h];
    return best;
  }

  static Real binary_entropy(Real x) {
    if (x <= 0 || x >= 1) return 0;
    return -(x * std::log2(x) + (1 - x) * std::log2(1 - x));
  }

  // Shares the first h digits with the all-zeros reference, differs at h,
  // and encodes the current per-depth replica count below so repeats stay
  // fresh. The counter is bumped only for the probe actually taken.
  Path divergent_path(int h) const {
    const int n = spec_.n;
    const int c = spec_.function.arity;
    Path path(n, 0);
    path[h] = 1;
    const auto it = replica_count_.find(h);
    std::uint64_t replica = it == replica_count_.end() ? 0 : it->second;
    for (int j = n - 1; j > h && replica > 0; --j) {
      path[j] = static_cast<std::uint8_t>(replica % c);
      replica /= c;
    }
    return path;
  }

  void probe(const Path& path, std::vector<std::pair<std::uint64_t, Real>>* trace,
             const std::function<std::uint64_t()>& query_counter) {
    const int bit = observe_(path);
    try {
      tracker_.update(path, bit);
    } catch (const NumericError&) {
      // Noisy recursive observations can exclude everything; restart the
      // posterior from the newest observation alone.
      tracker_ = PosteriorTracker(spec_);
      tracker_.update(path, bit);
    }
    if (trace) trace->push_back({query_counter(), tracker_.confidence()});
  }

  const HardDistSpec& spec_;
  std::function<int(PathView)> observe_;
  PosteriorTracker tracker_;
  std::unordered_map<int, std::uint64_t> replica_count_;
};

struct SplitSearchDriver {
  const HardDistSpec& spec;
  LazyTreeOracle& oracle;

  std::uint64_t remaining;

  int solve_block(int level, const Path& prefix, std::uint64_t budget,
                  std::vector<std::pair<std::uint64_t, Real>>* trace, int* category_out) {
    const int levels_below = spec.k - 1 - level;
    // Observation cap per level: the budget's (levels+1)-th root, so a
    // budget of b^k yields b observations at each of the k levels.
    std::uint64_t observations = std::min<std::uint64_t>(budget, 4096);
    std::uint64_t child_budget = 1;
    if (levels_below > 0) {
      observations = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(
                 std::floor(std::pow(Real(budget), 1.0 / Real(levels_below + 1)))));
      child_budget = std::max<std::uint64_t>(1, budget / observations);
    }

    auto observe = [&](PathView rel) -> int {
      Path full(prefix);
      full.insert(full.end(), rel.begin(), rel.end());
      if (level == spec.k - 1) {
        const std::uint64_t before = oracle.query_count();
        const int bit = oracle.query(full);
        remaining -= std::min<std::uint64_t>(remaining, oracle.query_count() - before);
        return bit;
      }
      return solve_block(level + 1, full, child_budget, nullptr, nullptr);
    };

    BlockSearch search(spec, observe);
    search.run(observations, trace, [&] { return oracle.query_count(); },
               [&] { return remaining == 0; });
    if (category_out) *category_out = search.tracker().best_category();
    return search.tracker().best_root();
  }
};

}  // namespace

SolveResult solve_splitsearch(const HardDistSpec& spec, LazyTreeOracle& oracle,
                              std::uint64_t budget, std::mt19937_64& rng) {
  (void)rng;  // the probe schedule is deterministic
  if (budget == 0) throw ConfigError("split search needs a positive budget");
  const std::uint64_t before = oracle.query_count();
  SplitSearchDriver driver{spec, oracle, budget};
  SolveResult result;
  result.answer = driver.solve_block(0, {}, budget, &result.confidence_trace, &result.category);
  result.queries = oracle.query_count() - before;
  return result;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkCell>& grid,
                                        std::uint64_t trials, std::uint64_t seed, int jobs) {
  if (grid.empty()) throw ConfigError("benchmark grid must not be empty");
  if (jobs < 1) jobs = 1;
  std::vector<BenchmarkRow> rows;
  rows.reserve(grid.size());

  for (std::size_t cell_index = 0; cell_index < grid.size(); ++cell_index) {
    const BenchmarkCell& cell = grid[cell_index];
    const HardDistSpec spec = make_hard_dist_spec(cell.function, cell.n, cell.k);

    std::vector<std::uint8_t> successes(trials, 0);
    std::vector<std::uint64_t> queries(trials, 0);

    auto run_trial = [&](std::uint64_t trial) {
      const std::uint64_t trial_seed =
          splitmix64(seed + 0x9e3779b97f4a7c15ULL * (cell_index + 1) + trial);
      auto oracle = sample_hard_tree(spec, trial_seed);
      std::mt19937_64 rng(splitmix64(trial_seed));
      SolveResult result;
      if (cell.algorithm == "shortcircuit") {
        result = solve_shortcircuit(cell.function, *oracle, rng);
      } else if (cell.algorithm == "splitsearch") {
        result = solve_splitsearch(spec, *oracle, cell.budget == 0 ? ~std::uint64_t(0) : cell.budget, rng);
      } else {
        throw ConfigError("unknown algorithm: " + cell.algorithm);
      }
      successes[trial] = result.answer == oracle->true_root() ? 1 : 0;
      queries[trial] = result.queries;
    };

    if (jobs == 1) {
      for (std::uint64_t t = 0; t < trials; ++t) run_trial(t);
    } else {
      std::vector<std::thread> workers;
      std::atomic<std::uint64_t> next{0};
      for (int w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
          for (std::uint64_t t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) run_trial(t);
        });
      for (auto& worker : workers) worker.join();
    }

    BenchmarkRow row;
    row.algorithm = cell.algorithm;
    row.n = cell.n;
    row.k = cell.k;
    row.trials = trials;
    row.budget = cell.budget;
    row.success = trials == 0 ? 0
                              : Real(std::accumulate(successes.begin(), successes.end(), 0ull)) /
                                    Real(trials);
    row.mean_queries =
        trials == 0 ? 0
                    : Real(std::accumulate(queries.begin(), queries.end(), 0ull)) / Real(trials);
    row.seed = seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "algorithm,n,k,trials,budget,success,mean_queries,seed\n";
  out.precision(12);
  for (const auto& row : rows) {
    out << row.algorithm << ',' << row.n << ',' << row.k << ',' << row.trials << ',' << row.budget
        << ',' << row.success << ',' << row.mean_queries << ',' << row.seed << '\n';
  }
  return out.str();
}

DivisionProcessResult simulate_division_process(Real initial, int steps,
                                                const DivisionStrategy& strategy,
                                                std::uint64_t trials,
                                                const std::vector<Real>& thresholds,
                                                std::mt19937_64& rng) {
  if (initial <= 0) throw ConfigError("initial interval must be positive");
  if (steps < 0) throw ConfigError("step count must be nonnegative");

  DivisionProcessResult result;
  result.initial = initial;
  result.steps = steps;
  result.trials = trials;
  result.thresholds = thresholds;
  result.probabilities.assign(thresholds.size(), 0);

  std::uniform_real_distribution<Real> uniform(0.0, 1.0);
  std::vector<Real> history;
  for (std::uint64_t t = 0; t < trials; ++t) {
    history.assign(1, initial);
    Real interval = initial;
    for (int s = 0; s < steps; ++s) {
      Real p = strategy(history);
      p = std::clamp(p, 0.0, 1.0);
      interval *= uniform(rng) < p ? p : (1.0 - p);
      history.push_back(interval);
    }
    for (std::size_t f = 0; f < thresholds.size(); ++f)
      if (interval < thresholds[f] * initial) result.probabilities[f] += 1;
  }
  for (auto& p : result.probabilities) p /= Real(std::max<std::uint64_t>(trials, 1));
  return result;
}

}  // namespace spantree
