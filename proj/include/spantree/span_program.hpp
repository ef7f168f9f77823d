#ifndef SPANTREE_SPAN_PROGRAM_HPP
#define SPANTREE_SPAN_PROGRAM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spantree/types.hpp"

namespace spantree {

enum class FunctionKind { Threshold, NegatedThreshold, Custom };

/// A direct boolean function: one program input vector per input bit.
/// polarity[j] == true means input j enters the program as-is; false means
/// it enters negated.
struct DirectFunctionSpec {
  int arity = 2;
  FunctionKind kind = FunctionKind::NegatedThreshold;
  int threshold = 2;                     // used by threshold kinds
  std::vector<std::uint8_t> truth_table; // 2^arity entries, input bits little-endian
  std::vector<bool> polarity;

  static DirectFunctionSpec nand_fn();
  static DirectFunctionSpec threshold_fn(int arity, int h);
  static DirectFunctionSpec negated_threshold_fn(int arity, int h);
  /// Custom table; polarity searched when not supplied.
  static DirectFunctionSpec custom_fn(int arity, std::vector<std::uint8_t> truth_table,
                                      std::optional<std::vector<bool>> polarity = std::nullopt);

  int value(std::uint32_t input_bits) const { return truth_table[input_bits]; }
  int value_of_children(std::span<const std::uint8_t> child_bits) const;

  /// chi_j for input j under this polarity.
  int available(std::uint32_t input_bits, int j) const {
    const int xj = (input_bits >> j) & 1u;
    return polarity[j] ? xj : 1 - xj;
  }

  /// The literal input making every chi_j equal to b.
  std::uint32_t all_chi_input(int b) const;

  std::string name() const;
};

/// Throws ConfigError when the spec violates the direct-function invariants.
void validate_spec(const DirectFunctionSpec& spec);

/// Matrix A of input column vectors, target fixed to the first basis vector.
struct SpanProgram {
  Matrix matrix;  // C rows, arity columns; columns are the input vectors
  std::vector<bool> polarity;
  bool normalized = false;

  int arity() const { return static_cast<int>(matrix.cols()); }
  int available(std::uint32_t input_bits, int j) const {
    const int xj = (input_bits >> j) & 1u;
    return polarity[j] ? xj : 1 - xj;
  }
};

struct WitnessReport {
  Real value = 0;
  Vector witness;      // length arity
  bool branch_true = false;
  Vector costs;
};

struct InputClassification {
  int value = 0;
  Real wsize = 0;
  bool trivial = false;
  std::vector<bool> strong;  // per input
};

struct FunctionAnalysis {
  DirectFunctionSpec spec;
  Real omega = 0;
  std::vector<InputClassification> per_input;  // indexed by input bits
};

SpanProgram build_program(const DirectFunctionSpec& spec);
SpanProgram normalize_trivial(const SpanProgram& program);
int sp_evaluate(const SpanProgram& program, std::uint32_t input_bits);
WitnessReport witness_size(const SpanProgram& program, std::uint32_t input_bits,
                           const Vector& costs);
WitnessReport witness_size(const SpanProgram& program, std::uint32_t input_bits);
FunctionAnalysis analyze(const SpanProgram& program);

namespace tolerances {
inline constexpr Real kFeasibility = 1e-9;
inline constexpr Real kTrivialBand = 1e-6;  // wsize within this of 1 classifies trivial
}  // namespace tolerances

}  // namespace spantree

#endif  // SPANTREE_SPAN_PROGRAM_HPP
