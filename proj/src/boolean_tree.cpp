#include "spantree/boolean_tree.hpp"

#include <algorithm>
#include <cmath>

namespace spantree {

namespace {

std::uint64_t pow_u64(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

std::uint64_t complete_tree_nodes(int arity, int depth) {
  // 1 + c + ... + c^depth
  std::uint64_t total = 0, level = 1;
  for (int d = 0; d <= depth; ++d) {
    total += level;
    level *= arity;
  }
  return total;
}

}  // namespace

EvalTree::EvalTree(int arity, int depth, std::vector<std::uint8_t> leaves)
    : arity_(arity), depth_(depth), leaves_(std::move(leaves)) {
  if (arity_ < 2) throw ConfigError("tree arity must be at least 2");
  if (depth_ < 0) throw ConfigError("tree depth must be nonnegative");
  leaf_count_ = pow_u64(arity_, depth_);
  node_count_ = complete_tree_nodes(arity_, depth_);
  if (leaves_.size() != leaf_count_)
    throw ConfigError("expected " + std::to_string(leaf_count_) + " leaves, got " +
                      std::to_string(leaves_.size()));
  cache_.assign(node_count_, -1);
}

EvalTree::EvalTree(std::shared_ptr<LeafOracle> oracle)
    : arity_(oracle->arity()), depth_(oracle->depth()), oracle_(std::move(oracle)) {
  if (depth_ > 62) throw ConfigError("lazy tree too deep for dense node indexing");
  leaf_count_ = pow_u64(arity_, depth_);
  node_count_ = complete_tree_nodes(arity_, depth_);
  cache_.assign(node_count_, -1);
}

int EvalTree::height(std::uint64_t node) const {
  int level = 0;
  std::uint64_t first_of_level = 0, level_size = 1;
  while (node > first_of_level + level_size - 1) {
    first_of_level += level_size;
    level_size *= arity_;
    ++level;
  }
  return depth_ - level;
}

Path EvalTree::path_of_leaf(std::uint64_t leaf_ordinal) const {
  Path path(depth_);
  for (int d = depth_ - 1; d >= 0; --d) {
    path[d] = static_cast<std::uint8_t>(leaf_ordinal % arity_);
    leaf_ordinal /= arity_;
  }
  return path;
}

int EvalTree::leaf_value(std::uint64_t leaf_ordinal) const {
  if (oracle_) {
    const Path path = path_of_leaf(leaf_ordinal);
    return oracle_->query(path);
  }
  return leaves_[leaf_ordinal];
}

int EvalTree::value(std::uint64_t node, const DirectFunctionSpec& spec) const {
  if (spec.arity != arity_) throw ConfigError("function arity does not match tree arity");
  if (cache_[node] >= 0) return cache_[node];
  int v;
  if (is_leaf(node)) {
    v = leaf_value(node - leaf_begin());
  } else {
    std::uint32_t bits = 0;
    for (int j = 0; j < arity_; ++j)
      bits |= std::uint32_t(value(child(node, j), spec)) << j;
    v = spec.value(bits);
  }
  cache_[node] = static_cast<std::int8_t>(v);
  return v;
}

const std::vector<std::uint8_t>& EvalTree::explicit_leaves() const {
  if (oracle_) throw ConfigError("tree is lazy; no explicit leaves");
  return leaves_;
}

int eval_tree(const DirectFunctionSpec& spec, const EvalTree& tree) {
  return tree.value(0, spec);
}

std::uint32_t TreeAnnotation::max_fault_depth() const {
  std::uint32_t out = 0;
  for (std::uint32_t f : fault_depth) out = std::max(out, f);
  return out;
}

TreeAnnotation annotate(const FunctionAnalysis& analysis, const EvalTree& tree) {
  const int arity = tree.arity();
  if (analysis.spec.arity != arity) throw ConfigError("analysis arity does not match tree");

  TreeAnnotation ann;
  ann.arity = arity;
  ann.depth = tree.depth();
  ann.leaf_begin = tree.leaf_begin();
  const std::uint64_t nodes = tree.node_count();
  ann.value.resize(nodes);
  ann.trivial.assign(nodes, 1);
  ann.strong_mask.assign(nodes, 0);
  ann.fault_depth.assign(nodes, 0);

  for (std::uint64_t node = 0; node < nodes; ++node)
    ann.value[node] = static_cast<std::uint8_t>(tree.value(node, analysis.spec));

  // Bottom-up pass; reverse BFS order visits children before parents.
  for (std::uint64_t idx = nodes; idx-- > 0;) {
    if (ann.is_leaf(idx)) continue;
    std::uint32_t bits = 0;
    for (int j = 0; j < arity; ++j) bits |= std::uint32_t(ann.value[ann.child(idx, j)]) << j;
    const InputClassification& cls = analysis.per_input[bits];
    ann.trivial[idx] = cls.trivial ? 1 : 0;
    std::uint16_t mask = 0;
    std::uint32_t strong_max = 0;
    bool any_strong = false;
    for (int j = 0; j < arity; ++j) {
      if (!cls.strong[j]) continue;
      mask |= std::uint16_t(1) << j;
      any_strong = true;
      strong_max = std::max(strong_max, ann.fault_depth[ann.child(idx, j)]);
    }
    if (!any_strong)
      throw NumericError("classification table has an input with no strong child; "
                         "the function is not direct");
    ann.strong_mask[idx] = mask;
    ann.fault_depth[idx] = cls.trivial ? strong_max : strong_max + 1;
  }
  return ann;
}

bool validate_k_fault(const TreeAnnotation& annotation, std::uint32_t k) {
  return annotation.max_fault_depth() <= k;
}

void ComplexityParams::validate() const {
  if (c1 < 0 || c2 < 0) throw ConfigError("c1 and c2 must be nonnegative");
  if (c_energy <= 0) throw ConfigError("c_energy must be positive");
  if (c_prime < 1) throw ConfigError("c_prime must be at least 1");
  if (c2 * c_energy * c_prime >= 1 || c_prime * c_energy >= 1)
    throw ConfigError("smallness conditions violated: need c2*c_energy*c_prime < 1 and "
                      "c_prime*c_energy < 1");
}

namespace {

ComplexityReport complexity_bound_impl(const SpanProgram* program,
                                       const FunctionAnalysis& analysis,
                                       const TreeAnnotation& annotation,
                                       const ComplexityParams& params, int k) {
  params.validate();
  if (annotation.depth < 1) throw ConfigError("complexity bound needs depth >= 1");
  if (k < static_cast<int>(annotation.max_fault_depth()))
    throw ConfigError("k must dominate the annotation's maximum fault depth");

  const int arity = annotation.arity;
  const int n = annotation.depth;
  const std::uint64_t nodes = annotation.value.size();

  ComplexityReport report;
  report.omega = analysis.omega;
  report.k = k;
  report.energy = params.c_energy / (Real(n) * Real(n) * std::pow(analysis.omega, k));
  report.query_estimate = 1.0 / report.energy;
  report.node_bound.assign(nodes, 1.0);

  for (std::uint64_t idx = nodes; idx-- > 0;) {
    if (annotation.is_leaf(idx)) continue;
    std::uint32_t bits = 0;
    for (int j = 0; j < arity; ++j)
      bits |= std::uint32_t(annotation.value[annotation.child(idx, j)]) << j;

    Real strong_max = 0, all_max = 0;
    for (int j = 0; j < arity; ++j) {
      const Real zj = report.node_bound[annotation.child(idx, j)];
      all_max = std::max(all_max, zj);
      if (annotation.strong_mask[idx] & (1u << j)) strong_max = std::max(strong_max, zj);
    }

    if (program == nullptr) {
      report.node_bound[idx] = params.c1 + analysis.per_input[bits].wsize * strong_max *
                                               (1.0 + params.c2 * report.energy * all_max);
    } else {
      Vector costs(arity);
      for (int j = 0; j < arity; ++j) costs(j) = report.node_bound[annotation.child(idx, j)];
      const Real weighted = witness_size(*program, bits, costs).value;
      report.node_bound[idx] = params.c1 + weighted * (1.0 + params.c2 * report.energy * all_max);
    }
  }

  // Induction invariant: bound <= c' * height * omega^fault_depth * (1 + c2*c*c'/n)^height
  // for internal nodes; leaves only need bound <= c'.
  const Real growth = 1.0 + params.c2 * params.c_energy * params.c_prime / Real(n);
  std::uint64_t first_of_level = 0, level_size = 1;
  int level = 0;
  for (std::uint64_t idx = 0; idx < nodes; ++idx) {
    if (idx >= first_of_level + level_size) {
      first_of_level += level_size;
      level_size *= arity;
      ++level;
    }
    const int height = n - level;
    const Real z = report.node_bound[idx];
    const Real limit = height == 0
                           ? params.c_prime
                           : params.c_prime * Real(height) *
                                 std::pow(analysis.omega, annotation.fault_depth[idx]) *
                                 std::pow(growth, height);
    if (z > limit * (1.0 + 1e-12)) report.induction_violations.push_back(idx);
  }
  return report;
}

}  // namespace

ComplexityReport complexity_bound(const FunctionAnalysis& analysis,
                                  const TreeAnnotation& annotation,
                                  const ComplexityParams& params, int k) {
  return complexity_bound_impl(nullptr, analysis, annotation, params, k);
}

ComplexityReport complexity_bound_weighted(const SpanProgram& program,
                                           const FunctionAnalysis& analysis,
                                           const TreeAnnotation& annotation,
                                           const ComplexityParams& params, int k) {
  return complexity_bound_impl(&program, analysis, annotation, params, k);
}

Real query_estimate(int n, int k, Real omega, const ComplexityParams& params) {
  if (n < 1 || k < 0 || omega < 1) throw ConfigError("query_estimate needs n >= 1, k >= 0, omega >= 1");
  return Real(n) * Real(n) * std::pow(omega, k) / params.c_energy;
}

namespace {

void fill_kfault_subtree(const FunctionAnalysis& analysis, std::vector<std::uint8_t>& leaves,
                         std::uint64_t leaf_offset, std::uint64_t width, int height, int value,
                         int budget, int global_k, std::mt19937_64& rng) {
  if (height == 0) {
    leaves[leaf_offset] = static_cast<std::uint8_t>(value);
    return;
  }
  const int arity = analysis.spec.arity;

  // Candidate child patterns grouped by whether they cost a fault.
  std::vector<std::uint32_t> trivial_inputs, fault_inputs;
  for (std::uint32_t bits = 0; bits < analysis.per_input.size(); ++bits) {
    if (analysis.per_input[bits].value != value) continue;
    (analysis.per_input[bits].trivial ? trivial_inputs : fault_inputs).push_back(bits);
  }

  const bool allow_fault = budget >= 1 && !fault_inputs.empty();
  std::uint32_t bits;
  if (allow_fault && std::uniform_real_distribution<Real>(0, 1)(rng) < 0.45) {
    bits = fault_inputs[std::uniform_int_distribution<std::size_t>(0, fault_inputs.size() - 1)(rng)];
  } else if (!trivial_inputs.empty()) {
    bits = trivial_inputs[std::uniform_int_distribution<std::size_t>(0, trivial_inputs.size() - 1)(rng)];
  } else {
    if (!allow_fault)
      throw InfeasibleError("no trivial input realizes the requested value; cannot respect budget");
    bits = fault_inputs[std::uniform_int_distribution<std::size_t>(0, fault_inputs.size() - 1)(rng)];
  }

  const InputClassification& cls = analysis.per_input[bits];
  const std::uint64_t child_width = width / arity;
  for (int j = 0; j < arity; ++j) {
    const int child_value = (bits >> j) & 1u;
    const int child_budget = cls.trivial ? budget : (cls.strong[j] ? budget - 1 : global_k);
    fill_kfault_subtree(analysis, leaves, leaf_offset + child_width * j, child_width, height - 1,
                        child_value, child_budget, global_k, rng);
  }
}

}  // namespace

EvalTree random_kfault_tree(const FunctionAnalysis& analysis, int depth, int k,
                            std::mt19937_64& rng) {
  const int arity = analysis.spec.arity;
  const std::uint64_t leaf_count = pow_u64(arity, depth);
  std::vector<std::uint8_t> leaves(leaf_count, 0);
  const int root_value = std::uniform_int_distribution<int>(0, 1)(rng);
  fill_kfault_subtree(analysis, leaves, 0, leaf_count, depth, root_value, k, k, rng);
  return EvalTree(arity, depth, std::move(leaves));
}

}  // namespace spantree
