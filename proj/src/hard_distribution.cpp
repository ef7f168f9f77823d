#include "spantree/hard_distribution.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <string>

namespace spantree {

namespace {

constexpr std::uint64_t kRootTag = 0x524f4f54u;
constexpr std::uint64_t kCategoryTag = 0x43415445u;
constexpr std::uint64_t kGadgetTag = 0x47414447u;
constexpr int kMaxGadgetLeafSlots = 20;

std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

EvalTree trivial_tree(const DirectFunctionSpec& spec, int root_value, int height) {
  const std::uint64_t leaf_count = pow_u64(spec.arity, height);
  std::vector<std::uint8_t> leaves(leaf_count);
  Path path(height);
  for (std::uint64_t ordinal = 0; ordinal < leaf_count; ++ordinal) {
    std::uint64_t rest = ordinal;
    for (int d = height - 1; d >= 0; --d) {
      path[d] = static_cast<std::uint8_t>(rest % spec.arity);
      rest /= spec.arity;
    }
    leaves[ordinal] = static_cast<std::uint8_t>(trivial_descend(spec, root_value, path));
  }
  return EvalTree(spec.arity, height, std::move(leaves));
}

int trivial_descend(const DirectFunctionSpec& spec, int root_value, PathView path) {
  int v = root_value;
  for (std::uint8_t digit : path) v = trivial_child_value(spec, v, digit);
  return v;
}

bool GadgetDistribution::has_uniform_leaf_marginals() const {
  const std::uint64_t slots = pow_u64(arity, n0);
  for (int r = 0; r < 2; ++r) {
    if (trees[r].empty()) return false;
    Rational total(0, 1);
    for (const auto& t : trees[r]) total = total + t.weight;
    if (!(total == Rational(1, 1))) return false;
    for (std::uint64_t p = 0; p < slots; ++p) {
      Rational marginal(0, 1);
      for (const auto& t : trees[r])
        if (t.leaves[p]) marginal = marginal + t.weight;
      if (!(marginal == Rational(1, 2))) return false;
    }
  }
  return true;
}

namespace {

bool is_symmetric_function(const DirectFunctionSpec& spec) {
  // A function of the input weight alone is permutation-invariant.
  const int c = spec.arity;
  std::vector<int> lo(c + 1, 1), hi(c + 1, 0);
  for (std::uint32_t x = 0; x < (1u << c); ++x) {
    const int w = std::popcount(x);
    lo[w] = std::min(lo[w], spec.value(x));
    hi[w] = std::max(hi[w], spec.value(x));
  }
  for (int w = 0; w <= c; ++w)
    if (lo[w] != hi[w]) return false;
  return true;
}

// Canonical encoding of an explicit depth-d tree under recursive child
// permutations (meaningful for symmetric functions only).
std::string canonical_encoding(const std::vector<std::uint8_t>& leaves, std::uint64_t offset,
                               std::uint64_t width, int arity) {
  if (width == 1) return std::string(1, static_cast<char>('0' + leaves[offset]));
  std::vector<std::string> children(arity);
  const std::uint64_t child_width = width / arity;
  for (int j = 0; j < arity; ++j)
    children[j] = canonical_encoding(leaves, offset + child_width * j, child_width, arity);
  std::sort(children.begin(), children.end());
  std::string out = "(";
  for (const auto& ch : children) out += ch;
  out += ")";
  return out;
}

struct QualifyingTree {
  std::vector<std::uint8_t> leaves;
  std::uint64_t ones = 0;
};

std::vector<QualifyingTree> enumerate_qualifying(const FunctionAnalysis& analysis, int n0, int k0,
                                                 int root_value) {
  const int arity = analysis.spec.arity;
  const std::uint64_t slots = pow_u64(arity, n0);
  std::vector<QualifyingTree> out;
  for (std::uint64_t bits = 0; bits < (std::uint64_t(1) << slots); ++bits) {
    std::vector<std::uint8_t> leaves(slots);
    std::uint64_t ones = 0;
    for (std::uint64_t p = 0; p < slots; ++p) {
      leaves[p] = (bits >> p) & 1u;
      ones += leaves[p];
    }
    EvalTree tree(arity, n0, leaves);
    if (eval_tree(analysis.spec, tree) != root_value) continue;
    const TreeAnnotation ann = annotate(analysis, tree);
    if (ann.max_fault_depth() > static_cast<std::uint32_t>(k0)) continue;
    out.push_back({std::move(leaves), ones});
  }
  return out;
}

std::optional<std::vector<WeightedGadgetTree>> build_side_symmetric(
    const std::vector<QualifyingTree>& qualifying, int arity, int n0) {
  const std::uint64_t slots = pow_u64(arity, n0);
  // Group into automorphism orbits; an orbit-uniform mixture has the same
  // marginal ones/slots at every leaf position.
  std::map<std::string, std::vector<const QualifyingTree*>> orbits;
  for (const auto& q : qualifying)
    orbits[canonical_encoding(q.leaves, 0, slots, arity)].push_back(&q);

  const Rational half(1, 2);
  // Single orbit hitting 1/2 exactly, if any.
  for (const auto& [key, members] : orbits) {
    const Rational marginal(static_cast<std::int64_t>(members.front()->ones),
                            static_cast<std::int64_t>(slots));
    if (marginal == half) {
      std::vector<WeightedGadgetTree> side;
      const Rational w(1, static_cast<std::int64_t>(members.size()));
      for (const auto* q : members) side.push_back({q->leaves, w});
      return side;
    }
  }
  // Otherwise mix the closest orbits below and above 1/2.
  const std::vector<const QualifyingTree*>* below = nullptr;
  const std::vector<const QualifyingTree*>* above = nullptr;
  Rational below_m(0, 1), above_m(1, 1);
  for (const auto& [key, members] : orbits) {
    const Rational m(static_cast<std::int64_t>(members.front()->ones),
                     static_cast<std::int64_t>(slots));
    if (m.value() < 0.5 && (!below || m.value() > below_m.value())) {
      below = &members;
      below_m = m;
    }
    if (m.value() > 0.5 && (!above || m.value() < above_m.value())) {
      above = &members;
      above_m = m;
    }
  }
  if (!below || !above) return std::nullopt;
  // alpha * below_m + (1 - alpha) * above_m = 1/2
  const Rational gap = above_m - below_m;
  const Rational excess = above_m - half;
  const Rational alpha_exact(excess.num * gap.den, excess.den * gap.num);
  std::vector<WeightedGadgetTree> side;
  const Rational w_below = alpha_exact * Rational(1, static_cast<std::int64_t>(below->size()));
  const Rational w_above =
      (Rational(1, 1) - alpha_exact) * Rational(1, static_cast<std::int64_t>(above->size()));
  for (const auto* q : *below) side.push_back({q->leaves, w_below});
  for (const auto* q : *above) side.push_back({q->leaves, w_above});
  return side;
}

std::optional<std::vector<WeightedGadgetTree>> build_side_complement_pair(
    const std::vector<QualifyingTree>& qualifying) {
  // A tree and its leafwise complement with the same root value give exact
  // 1/2 marginals as a uniform pair.
  for (const auto& q : qualifying) {
    std::vector<std::uint8_t> complement(q.leaves.size());
    for (std::size_t p = 0; p < q.leaves.size(); ++p) complement[p] = 1 - q.leaves[p];
    for (const auto& other : qualifying) {
      if (other.leaves == complement) {
        std::vector<WeightedGadgetTree> side;
        side.push_back({q.leaves, Rational(1, 2)});
        side.push_back({complement, Rational(1, 2)});
        return side;
      }
    }
  }
  return std::nullopt;
}

bool is_nand(const DirectFunctionSpec& spec) {
  return spec.arity == 2 && spec.truth_table == std::vector<std::uint8_t>{1, 1, 1, 0} &&
         spec.polarity == std::vector<bool>{false, false};
}

}  // namespace

GadgetDistribution default_gadgets(const FunctionAnalysis& analysis) {
  const int arity = analysis.spec.arity;

  if (is_nand(analysis.spec)) {
    // The classic depth-2 pairs: root 1 puts the single fault at the root,
    // root 0 puts one fault in each child.
    GadgetDistribution g;
    g.arity = 2;
    g.n0 = 2;
    g.k0 = 1;
    g.trees[1] = {{{1, 1, 0, 0}, Rational(1, 2)}, {{0, 0, 1, 1}, Rational(1, 2)}};
    g.trees[0] = {{{0, 1, 1, 0}, Rational(1, 2)}, {{1, 0, 0, 1}, Rational(1, 2)}};
    if (!g.has_uniform_leaf_marginals())
      throw NumericError("builtin NAND gadget distribution failed the marginal check");
    return g;
  }

  const bool symmetric = is_symmetric_function(analysis.spec);
  for (int n0 = 1; pow_u64(arity, n0) <= kMaxGadgetLeafSlots; ++n0) {
    for (int k0 = 1; k0 <= n0; ++k0) {
      GadgetDistribution g;
      g.arity = arity;
      g.n0 = n0;
      g.k0 = k0;
      bool ok = true;
      for (int r = 0; r < 2 && ok; ++r) {
        const auto qualifying = enumerate_qualifying(analysis, n0, k0, r);
        auto side = symmetric ? build_side_symmetric(qualifying, arity, n0)
                              : build_side_complement_pair(qualifying);
        if (!side) {
          ok = false;
        } else {
          g.trees[r] = std::move(*side);
        }
      }
      if (ok && g.has_uniform_leaf_marginals()) return g;
    }
  }
  throw InfeasibleError("no gadget distribution found for " + analysis.spec.name() +
                        " within the search bounds (leaf slots <= " +
                        std::to_string(kMaxGadgetLeafSlots) + ")");
}

int HardDistSpec::per_level_budget() const {
  const int categories = category_count();
  return (std::bit_width(static_cast<unsigned>(categories)) - 1) / 10;
}

void HardDistSpec::validate() const {
  validate_spec(function);
  if (k < 1) throw ConfigError("level count k must be at least 1");
  if (n0 < 1 || gadgets.n0 != n0 || gadgets.k0 != k0 || gadgets.arity != function.arity)
    throw ConfigError("gadget distribution does not match the spec parameters");
  if (n < 4 * n0) throw ConfigError("per-level height n must be at least 4*n0");
  if (category_count() <= 1)
    throw ConfigError("n - n0 must be at least 2 for a non-degenerate category draw");
  if (!gadgets.has_uniform_leaf_marginals())
    throw ConfigError("gadget distribution does not have exactly uniform leaf marginals");
}

HardDistSpec make_hard_dist_spec(const DirectFunctionSpec& function, int n, int k) {
  const FunctionAnalysis analysis = analyze(normalize_trivial(build_program(function)));
  HardDistSpec spec;
  spec.function = function;
  spec.gadgets = default_gadgets(analysis);
  spec.n0 = spec.gadgets.n0;
  spec.k0 = spec.gadgets.k0;
  spec.n = n;
  spec.k = k;
  spec.validate();
  return spec;
}

LazyTreeOracle::LazyTreeOracle(HardDistSpec spec, std::uint64_t seed,
                               std::optional<int> forced_root)
    : spec_(std::move(spec)), seed_(seed), forced_root_(forced_root) {
  spec_.validate();
}

int LazyTreeOracle::block_root_value(int level, PathView prefix) const {
  if (level == 0) {
    if (forced_root_) return *forced_root_;
    return static_cast<int>(hash_path(seed_ ^ kRootTag, {}) & 1u);
  }
  const int n = spec_.n;
  return block_leaf_value(level - 1, prefix.first((level - 1) * n), prefix.subspan((level - 1) * n, n));
}

int LazyTreeOracle::category_of_block(int level, PathView block_root_path) const {
  const std::uint64_t h = hash_path(seed_ ^ kCategoryTag, block_root_path);
  return 1 + static_cast<int>(h % static_cast<std::uint64_t>(spec_.category_count()));
}

int LazyTreeOracle::gadget_draw(int root_value, PathView abs_path) const {
  const auto& side = spec_.gadgets.trees[root_value];
  const std::uint64_t u = hash_path(seed_ ^ kGadgetTag, abs_path);
  Rational cumulative(0, 1);
  for (std::size_t idx = 0; idx + 1 < side.size(); ++idx) {
    cumulative = cumulative + side[idx].weight;
    const unsigned __int128 threshold =
        (static_cast<unsigned __int128>(cumulative.num) << 64) /
        static_cast<unsigned __int128>(cumulative.den);
    if (u < static_cast<std::uint64_t>(threshold)) return static_cast<int>(idx);
  }
  return static_cast<int>(side.size() - 1);
}

int LazyTreeOracle::block_leaf_value(int level, PathView prefix, PathView rel_path) const {
  const int n = spec_.n;
  const int n0 = spec_.n0;
  const int root = block_root_value(level, prefix);
  const int split = category_of_block(level, prefix);

  int v = root;
  for (int j = 0; j < split; ++j) v = trivial_child_value(spec_.function, v, rel_path[j]);

  Path gadget_path(prefix.begin(), prefix.end());
  gadget_path.insert(gadget_path.end(), rel_path.begin(), rel_path.begin() + split);
  const auto& gadget = spec_.gadgets.trees[v][gadget_draw(v, gadget_path)];

  std::uint64_t slot = 0;
  for (int j = split; j < split + n0; ++j)
    slot = slot * spec_.function.arity + rel_path[j];
  v = gadget.leaves[slot];

  for (int j = split + n0; j < n; ++j) v = trivial_child_value(spec_.function, v, rel_path[j]);
  return v;
}

int LazyTreeOracle::peek(PathView leaf_path) const {
  const int total = spec_.total_depth();
  if (static_cast<int>(leaf_path.size()) != total)
    throw ConfigError("leaf path must have length k*n");
  for (std::uint8_t d : leaf_path)
    if (d >= spec_.function.arity) throw ConfigError("leaf path digit out of range");
  const int n = spec_.n;
  return block_leaf_value(spec_.k - 1, leaf_path.first((spec_.k - 1) * n),
                          leaf_path.subspan((spec_.k - 1) * n, n));
}

int LazyTreeOracle::query(PathView leaf_path) {
  const int bit = peek(leaf_path);  // validates the path
  std::string key(leaf_path.begin(), leaf_path.end());
  auto [it, inserted] = memo_.try_emplace(std::move(key), static_cast<std::uint8_t>(bit));
  (void)it;
  if (inserted)
    transcript_.push_back({Path(leaf_path.begin(), leaf_path.end()), bit, transcript_.size() + 1});
  return bit;
}

int LazyTreeOracle::true_root() const { return block_root_value(0, {}); }

std::shared_ptr<LazyTreeOracle> sample_hard_tree(const HardDistSpec& spec, std::uint64_t seed,
                                                 std::optional<int> forced_root) {
  return std::make_shared<LazyTreeOracle>(spec, seed, forced_root);
}

EvalTree materialize(const LazyTreeOracle& oracle) {
  const int depth = oracle.depth();
  const int arity = oracle.arity();
  const std::uint64_t leaf_count = pow_u64(arity, depth);
  if (leaf_count > (std::uint64_t(1) << 22))
    throw ConfigError("tree too large to materialize explicitly");
  std::vector<std::uint8_t> leaves(leaf_count);
  Path path(depth);
  for (std::uint64_t ordinal = 0; ordinal < leaf_count; ++ordinal) {
    std::uint64_t rest = ordinal;
    for (int d = depth - 1; d >= 0; --d) {
      path[d] = static_cast<std::uint8_t>(rest % arity);
      rest /= arity;
    }
    leaves[ordinal] = static_cast<std::uint8_t>(oracle.peek(path));
  }
  return EvalTree(arity, depth, std::move(leaves));
}

PosteriorTracker::PosteriorTracker(const HardDistSpec& spec)
    : spec_(spec), categories_(spec.category_count()) {
  spec_.validate();
  p_ = Eigen::ArrayXXd::Ones(categories_, 2);
  groups_.resize(categories_);
}

bool PosteriorTracker::consistent(const WeightedGadgetTree& gadget, const Observation& obs,
                                  int category) const {
  std::uint64_t slot = 0;
  for (int j = category; j < category + spec_.n0; ++j)
    slot = slot * spec_.function.arity + obs.path[j];
  const int gadget_leaf = gadget.leaves[slot];
  return obs.suffix_desc[category + spec_.n0][gadget_leaf] == obs.bit;
}

PosteriorTracker::PathContext PosteriorTracker::make_context(PathView block_path, int bit) const {
  const int n = spec_.n;
  if (static_cast<int>(block_path.size()) != n)
    throw ConfigError("tracked path must be relative to the block root (length n)");
  for (std::uint8_t d : block_path)
    if (d >= spec_.function.arity) throw ConfigError("path digit out of range");

  PathContext ctx;
  ctx.obs.path.assign(block_path.begin(), block_path.end());
  ctx.obs.bit = bit;
  ctx.obs.suffix_desc.assign(n + 1, {0, 1});
  for (int j = n - 1; j >= 0; --j)
    for (int v = 0; v < 2; ++v)
      ctx.obs.suffix_desc[j][v] =
          ctx.obs.suffix_desc[j + 1][trivial_child_value(spec_.function, v, block_path[j])];

  // Value at depth j of the all-trivial top segment, for both root values.
  ctx.prefix_value.resize(n + 1);
  ctx.prefix_value[0] = {0, 1};
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < 2; ++r)
      ctx.prefix_value[j + 1][r] = static_cast<std::uint8_t>(
          trivial_child_value(spec_.function, ctx.prefix_value[j][r], block_path[j]));

  ctx.prefix_hash.resize(n + 1);
  ctx.prefix_hash[0] = splitmix64(0x5052454649585348ULL);
  for (int j = 0; j < n; ++j)
    ctx.prefix_hash[j + 1] = hash_combine(ctx.prefix_hash[j], block_path[j] + 1u);
  return ctx;
}

std::array<Real, 2> PosteriorTracker::group_weight_with(const Group* group,
                                                        const Observation& extra,
                                                        int category) const {
  std::array<Real, 2> weight = {0, 0};
  for (int v = 0; v < 2; ++v) {
    for (const auto& gadget : spec_.gadgets.trees[v]) {
      if (!consistent(gadget, extra, category)) continue;
      bool all = true;
      if (group)
        for (std::uint32_t m : group->members)
          if (!consistent(gadget, observations_[m], category)) {
            all = false;
            break;
          }
      if (all) weight[v] += gadget.weight.value();
    }
  }
  return weight;
}

void PosteriorTracker::update(PathView block_path, int observed_bit) {
  PathContext ctx = make_context(block_path, observed_bit);

  const std::uint32_t obs_index = static_cast<std::uint32_t>(observations_.size());
  observations_.push_back(ctx.obs);

  for (int i = 1; i <= categories_; ++i) {
    Group& group = groups_[i - 1][ctx.prefix_hash[i]];
    const std::array<Real, 2> old = group.weight;
    const std::array<Real, 2> fresh =
        group_weight_with(group.members.empty() ? nullptr : &group, observations_[obs_index], i);
    group.members.push_back(obs_index);
    group.weight = fresh;
    for (int r = 0; r < 2; ++r) {
      if (p_(i - 1, r) <= 0) continue;
      const int v = ctx.prefix_value[i][r];
      p_(i - 1, r) = old[v] > 0 ? p_(i - 1, r) * (group.weight[v] / old[v]) : 0.0;
    }
  }

  if (survival_total() <= 0)
    throw NumericError("observations exclude every category/root pair: the oracle is not a "
                       "single-level hard-distribution block");
}

Eigen::ArrayXXd PosteriorTracker::predictive_factors(PathView block_path) const {
  PathContext ctx = make_context(block_path, 1);
  Eigen::ArrayXXd factors = Eigen::ArrayXXd::Zero(categories_, 2);
  for (int i = 1; i <= categories_; ++i) {
    const auto& bucket = groups_[i - 1];
    const auto it = bucket.find(ctx.prefix_hash[i]);
    const Group* group = it == bucket.end() ? nullptr : &it->second;
    const std::array<Real, 2> cur = group ? group->weight : std::array<Real, 2>{1.0, 1.0};
    const std::array<Real, 2> with_one = group_weight_with(group, ctx.obs, i);
    for (int r = 0; r < 2; ++r) {
      const int v = ctx.prefix_value[i][r];
      factors(i - 1, r) = cur[v] > 0 ? with_one[v] / cur[v] : 0.0;
    }
  }
  return factors;
}

Real PosteriorTracker::split_difference() const {
  return (p_.col(0) - p_.col(1)).abs().sum();
}

Real PosteriorTracker::confidence() const {
  const Real s = survival_total();
  if (s <= 0) throw NumericError("all trees excluded; confidence undefined");
  return std::abs(p_.col(0).sum() - p_.col(1).sum()) / s;
}

int PosteriorTracker::best_root() const {
  return p_.col(1).sum() > p_.col(0).sum() ? 1 : 0;
}

int PosteriorTracker::best_category() const {
  int best = 1;
  Real best_mass = -1;
  for (int i = 0; i < categories_; ++i) {
    const Real mass = p_(i, 0) + p_(i, 1);
    if (mass > best_mass) {
      best_mass = mass;
      best = i + 1;
    }
  }
  return best;
}

Real block_survival_product(std::span<const Real> leaf_root_survivals) {
  Real product = 1;
  for (Real p : leaf_root_survivals) product *= p;
  return product;
}

}  // namespace spantree
