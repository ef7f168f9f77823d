#include "spantree/span_program.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>

#include "spantree/min_norm.hpp"

namespace spantree {

namespace {

constexpr int kMaxArity = 12;

std::vector<std::uint8_t> threshold_table(int arity, int h) {
  std::vector<std::uint8_t> table(1u << arity);
  for (std::uint32_t x = 0; x < table.size(); ++x)
    table[x] = std::popcount(x) >= h ? 1 : 0;
  return table;
}

std::vector<std::uint8_t> negate_table(std::vector<std::uint8_t> table) {
  for (auto& v : table) v = 1 - v;
  return table;
}

// g(chi) = f(x(chi)) for a fixed polarity assignment.
std::uint32_t chi_to_input(std::uint32_t chi, const std::vector<bool>& polarity) {
  std::uint32_t x = 0;
  for (std::size_t j = 0; j < polarity.size(); ++j) {
    const std::uint32_t bit = (chi >> j) & 1u;
    x |= (polarity[j] ? bit : 1u - bit) << j;
  }
  return x;
}

bool is_monotone_in_chi(const std::vector<std::uint8_t>& table, int arity,
                        const std::vector<bool>& polarity) {
  const std::uint32_t full = (1u << arity) - 1u;
  if (table[chi_to_input(0, polarity)] != 0) return false;
  if (table[chi_to_input(full, polarity)] != 1) return false;
  for (std::uint32_t chi = 0; chi <= full; ++chi) {
    const int v = table[chi_to_input(chi, polarity)];
    for (int j = 0; j < arity; ++j) {
      if ((chi >> j) & 1u) continue;
      const int up = table[chi_to_input(chi | (1u << j), polarity)];
      if (up < v) return false;
    }
  }
  return true;
}

// Detects whether g(chi) is a threshold function of |chi|; returns h if so.
std::optional<int> threshold_of_chi(const std::vector<std::uint8_t>& table, int arity,
                                    const std::vector<bool>& polarity) {
  const std::uint32_t full = (1u << arity) - 1u;
  std::vector<int> lo(arity + 1, 1), hi(arity + 1, 0);
  for (std::uint32_t chi = 0; chi <= full; ++chi) {
    const int v = table[chi_to_input(chi, polarity)];
    const int w = std::popcount(chi);
    lo[w] = std::min(lo[w], v);
    hi[w] = std::max(hi[w], v);
  }
  for (int w = 0; w <= arity; ++w)
    if (lo[w] != hi[w]) return std::nullopt;
  for (int h = 1; h <= arity; ++h) {
    bool match = true;
    for (int w = 0; w <= arity; ++w)
      if (lo[w] != (w >= h ? 1 : 0)) match = false;
    if (match) return h;
  }
  return std::nullopt;
}

Matrix vandermonde_program(int arity, int h) {
  Matrix a(h, arity);
  for (int j = 0; j < arity; ++j) {
    Real power = 1;
    for (int m = 0; m < h; ++m) {
      a(m, j) = power;
      power *= Real(j + 1);
    }
  }
  return a;
}

}  // namespace

DirectFunctionSpec DirectFunctionSpec::nand_fn() { return negated_threshold_fn(2, 2); }

DirectFunctionSpec DirectFunctionSpec::threshold_fn(int arity, int h) {
  DirectFunctionSpec spec;
  spec.arity = arity;
  spec.kind = FunctionKind::Threshold;
  spec.threshold = h;
  spec.polarity.assign(arity, true);
  if (arity >= 1 && h >= 1 && h <= arity) spec.truth_table = threshold_table(arity, h);
  validate_spec(spec);
  return spec;
}

DirectFunctionSpec DirectFunctionSpec::negated_threshold_fn(int arity, int h) {
  DirectFunctionSpec spec;
  spec.arity = arity;
  spec.kind = FunctionKind::NegatedThreshold;
  spec.threshold = h;
  spec.polarity.assign(arity, false);
  if (arity >= 1 && h >= 1 && h <= arity) spec.truth_table = negate_table(threshold_table(arity, h));
  validate_spec(spec);
  return spec;
}

DirectFunctionSpec DirectFunctionSpec::custom_fn(int arity, std::vector<std::uint8_t> truth_table,
                                                 std::optional<std::vector<bool>> polarity) {
  DirectFunctionSpec spec;
  spec.arity = arity;
  spec.kind = FunctionKind::Custom;
  spec.threshold = 0;
  spec.truth_table = std::move(truth_table);
  if (arity < 2 || arity > kMaxArity)
    throw ConfigError("arity must be between 2 and " + std::to_string(kMaxArity));
  if (spec.truth_table.size() != (1u << arity))
    throw ConfigError("truth table must have 2^arity entries");
  if (polarity) {
    spec.polarity = std::move(*polarity);
  } else {
    bool found = false;
    for (std::uint32_t p = 0; p < (1u << arity) && !found; ++p) {
      std::vector<bool> candidate(arity);
      for (int j = 0; j < arity; ++j) candidate[j] = (p >> j) & 1u;
      if (is_monotone_in_chi(spec.truth_table, arity, candidate)) {
        spec.polarity = candidate;
        found = true;
      }
    }
    if (!found)
      throw ConfigError("truth table is not direct: no polarity assignment is monotone");
  }
  validate_spec(spec);
  return spec;
}

int DirectFunctionSpec::value_of_children(std::span<const std::uint8_t> child_bits) const {
  std::uint32_t x = 0;
  for (std::size_t j = 0; j < child_bits.size(); ++j) x |= std::uint32_t(child_bits[j] & 1u) << j;
  return value(x);
}

std::uint32_t DirectFunctionSpec::all_chi_input(int b) const {
  std::uint32_t x = 0;
  for (int j = 0; j < arity; ++j) {
    const bool bit = polarity[j] ? (b == 1) : (b == 0);
    x |= std::uint32_t(bit) << j;
  }
  return x;
}

std::string DirectFunctionSpec::name() const {
  switch (kind) {
    case FunctionKind::Threshold:
      return "threshold(" + std::to_string(arity) + "," + std::to_string(threshold) + ")";
    case FunctionKind::NegatedThreshold:
      if (arity == 2 && threshold == 2) return "nand";
      return "negated_threshold(" + std::to_string(arity) + "," + std::to_string(threshold) + ")";
    case FunctionKind::Custom:
      return "custom(" + std::to_string(arity) + ")";
  }
  return "unknown";
}

void validate_spec(const DirectFunctionSpec& spec) {
  if (spec.arity < 2 || spec.arity > kMaxArity)
    throw ConfigError("arity must be between 2 and " + std::to_string(kMaxArity));
  if (spec.kind != FunctionKind::Custom && (spec.threshold < 1 || spec.threshold > spec.arity))
    throw ConfigError("threshold h must lie in 1..arity");
  if (spec.truth_table.size() != (1u << spec.arity))
    throw ConfigError("truth table must have 2^arity entries");
  if (spec.polarity.size() != static_cast<std::size_t>(spec.arity))
    throw ConfigError("polarity must have one flag per input");
  if (!is_monotone_in_chi(spec.truth_table, spec.arity, spec.polarity))
    throw ConfigError("function is not direct under the given polarity");
}

SpanProgram build_program(const DirectFunctionSpec& spec) {
  validate_spec(spec);
  SpanProgram program;
  program.polarity = spec.polarity;

  switch (spec.kind) {
    case FunctionKind::Threshold:
      program.matrix = vandermonde_program(spec.arity, spec.threshold);
      break;
    case FunctionKind::NegatedThreshold:
      // NOT(at least h ones) == at least arity-h+1 zeros: a threshold program
      // over the negated literals.
      program.matrix = vandermonde_program(spec.arity, spec.arity - spec.threshold + 1);
      break;
    case FunctionKind::Custom: {
      const auto h = threshold_of_chi(spec.truth_table, spec.arity, spec.polarity);
      if (!h)
        throw ConfigError(
            "no known direct realization: custom table is not a threshold pattern "
            "under its polarity");
      program.matrix = vandermonde_program(spec.arity, *h);
      break;
    }
  }

  // The Vandermonde choice must reproduce the function exactly; a violation
  // here means the generic-position property failed.
  for (std::uint32_t x = 0; x < (1u << spec.arity); ++x) {
    if (sp_evaluate(program, x) != spec.value(x))
      throw NumericError("built program disagrees with the truth table at input " +
                         std::to_string(x));
  }
  return program;
}

SpanProgram normalize_trivial(const SpanProgram& program) {
  const Index rows = program.matrix.rows();
  const Index cols = program.matrix.cols();
  Vector first_row = program.matrix.row(0).transpose();

  if (rows > 1) {
    const Matrix others = program.matrix.bottomRows(rows - 1).transpose();  // cols x (rows-1)
    Eigen::JacobiSVD<Matrix> svd(others, Eigen::ComputeThinU);
    const Real cutoff = svd.singularValues().size() > 0
                            ? svd.singularValues()(0) * Real(cols) *
                                  Eigen::NumTraits<Real>::epsilon()
                            : Real(0);
    for (Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) <= cutoff) continue;
      const Vector basis = svd.matrixU().col(i);
      first_row -= basis.dot(first_row) * basis;
    }
  }

  const Real norm = first_row.norm();
  if (norm <= tolerances::kFeasibility)
    throw NumericError(
        "degenerate span program: first row lies in the span of the others, so the "
        "program does not represent a non-constant function");

  SpanProgram out = program;
  out.matrix.row(0) = first_row.transpose() / norm;
  out.normalized = true;
  return out;
}

int sp_evaluate(const SpanProgram& program, std::uint32_t input_bits) {
  const int cols = program.arity();
  std::vector<int> columns;
  for (int j = 0; j < cols; ++j)
    if (program.available(input_bits, j)) columns.push_back(j);
  if (columns.empty()) return 0;

  Matrix avail(program.matrix.rows(), static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) avail.col(static_cast<Index>(k)) = program.matrix.col(columns[k]);
  Vector target = Vector::Zero(program.matrix.rows());
  target(0) = 1;

  Eigen::JacobiSVD<Matrix> svd(avail, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector coeff = svd.solve(target);
  const Real residual = (avail * coeff - target).lpNorm<Eigen::Infinity>();
  return residual <= tolerances::kFeasibility ? 1 : 0;
}

WitnessReport witness_size(const SpanProgram& program, std::uint32_t input_bits,
                           const Vector& costs) {
  const int cols = program.arity();
  const Index rows = program.matrix.rows();
  if (costs.size() != cols) throw ConfigError("cost vector length must equal arity");
  if ((costs.array() < 0).any()) throw ConfigError("costs must be nonnegative");

  WitnessReport report;
  report.costs = costs;
  report.branch_true = sp_evaluate(program, input_bits) == 1;

  const Real tol = tolerances::kFeasibility;
  if (report.branch_true) {
    // w reproduces the target through the rows of A and vanishes on
    // unavailable coordinates.
    std::vector<int> zeroed;
    for (int j = 0; j < cols; ++j)
      if (!program.available(input_bits, j)) zeroed.push_back(j);
    Matrix constraints(rows + static_cast<Index>(zeroed.size()), cols);
    Vector target = Vector::Zero(rows + static_cast<Index>(zeroed.size()));
    constraints.topRows(rows) = program.matrix;
    target(0) = 1;
    for (std::size_t k = 0; k < zeroed.size(); ++k) {
      constraints.row(rows + static_cast<Index>(k)).setZero();
      constraints(rows + static_cast<Index>(k), zeroed[k]) = 1;
    }
    auto solved = minimize_weighted_seminorm<Real>(
        Matrix::Identity(cols, cols), Vector::Zero(cols), costs, constraints, target, tol);
    if (!solved)
      throw NumericError("true-branch witness constraints infeasible: program/input mismatch");
    report.witness = solved->image;
    report.value = solved->value;
  } else {
    // w = r0 + sum_i beta_i r_i, vanishing on available coordinates.
    const Vector r0 = program.matrix.row(0).transpose();
    Matrix span_dirs(cols, rows - 1);
    for (Index i = 1; i < rows; ++i) span_dirs.col(i - 1) = program.matrix.row(i).transpose();

    std::vector<int> zeroed;
    for (int j = 0; j < cols; ++j)
      if (program.available(input_bits, j)) zeroed.push_back(j);
    Matrix constraints(static_cast<Index>(zeroed.size()), rows - 1);
    Vector target(static_cast<Index>(zeroed.size()));
    for (std::size_t k = 0; k < zeroed.size(); ++k) {
      constraints.row(static_cast<Index>(k)) = span_dirs.row(zeroed[k]);
      target(static_cast<Index>(k)) = -r0(zeroed[k]);
    }
    auto solved = minimize_weighted_seminorm<Real>(span_dirs, r0, costs, constraints, target, tol);
    if (!solved)
      throw NumericError("false-branch witness constraints infeasible: program/input mismatch");
    report.witness = solved->image;
    report.value = solved->value;
  }
  return report;
}

WitnessReport witness_size(const SpanProgram& program, std::uint32_t input_bits) {
  return witness_size(program, input_bits, Vector::Ones(program.arity()));
}

FunctionAnalysis analyze(const SpanProgram& program) {
  const int arity = program.arity();
  FunctionAnalysis analysis;
  analysis.spec.arity = arity;
  analysis.spec.kind = FunctionKind::Custom;
  analysis.spec.polarity = program.polarity;
  analysis.spec.truth_table.resize(1u << arity);
  analysis.per_input.resize(1u << arity);
  analysis.omega = 0;

  for (std::uint32_t x = 0; x < (1u << arity); ++x) {
    InputClassification& entry = analysis.per_input[x];
    entry.value = sp_evaluate(program, x);
    analysis.spec.truth_table[x] = static_cast<std::uint8_t>(entry.value);
    entry.wsize = witness_size(program, x).value;
    entry.trivial = std::abs(entry.wsize - 1.0) <= tolerances::kTrivialBand;
    entry.strong.resize(arity);
    for (int j = 0; j < arity; ++j) entry.strong[j] = program.available(x, j) == entry.value;
    analysis.omega = std::max(analysis.omega, entry.wsize);
  }
  return analysis;
}

}  // namespace spantree
