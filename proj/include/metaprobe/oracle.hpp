#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "metaprobe/transforms.hpp"

namespace metaprobe {

/// Operand values keyed by operand text (whitespace removed).
using Assignment = std::map<std::string, double>;

struct EquivalenceVerdict {
  std::size_t trials = 0;
  std::size_t agreements = 0;
  std::optional<Assignment> counterexample;  // first disagreeing assignment

  bool all_agree() const { return agreements == trials; }
};

/// Runs both programs' controlling comparison on `trials` sampled operand
/// assignments and checks that the same branch text executes in each.
///
/// Non-literal operands are opaque integer variables. Throws
/// UnsupportedOperand when an operand contains a call, and SpanMismatch when
/// the mask spans do not locate a comparison.
EquivalenceVerdict check_equivalence_sampled(const TransformedPair& pair, std::size_t trials,
                                             std::uint64_t seed);

/// Numeric value of a Java literal as the oracle sees it: integers in any
/// radix, chars as code points, booleans as 0/1, null as 0, strings as an
/// opaque constant.
std::optional<double> literal_value(std::string_view text);

}  // namespace metaprobe
