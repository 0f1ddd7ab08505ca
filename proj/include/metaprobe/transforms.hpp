#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metaprobe/sites.hpp"

namespace metaprobe {

enum class TransformKind { BlockSwap, OperandSwap, NonEquivalentBlockSwap };

std::string_view to_string(TransformKind kind);
std::optional<TransformKind> parse_transform_kind(std::string_view text);

/// An original program, its rewritten form and the operator masked in each.
struct TransformedPair {
  std::string pair_id;
  TransformKind transform = TransformKind::BlockSwap;
  std::string original_code;
  std::string transformed_code;
  ComparisonOp original_op = ComparisonOp::EQ;
  ComparisonOp transformed_op = ComparisonOp::EQ;
  ByteSpan original_mask_span;
  ByteSpan transformed_mask_span;
  std::string unit_id;
  TransformSite site;              // located in original_code
  TransformSite transformed_site;  // the same site, located in transformed_code
  bool renamed = false;
  bool refactored = false;
};

/// Deterministic identifier: "<unit>:<transform>@<operator offset>".
std::string make_pair_id(std::string_view unit_id, TransformKind kind,
                         const TransformSite& site);

/// Exchanges then/else verbatim and negates the operator.
TransformedPair block_swap(const SourceUnit& unit, const TransformSite& site);

/// Exchanges the operand texts and mirrors the operator. Throws
/// IneligibleSite when the operand kinds forbid reordering.
TransformedPair operand_swap(const SourceUnit& unit, const TransformSite& site);

/// Exchanges then/else but keeps the operator: a look-alike that changes
/// meaning whenever the branches differ.
TransformedPair non_equivalent_block_swap(const SourceUnit& unit, const TransformSite& site);

/// Ordered original-name -> fresh-name mapping.
using RenameMap = std::vector<std::pair<std::string, std::string>>;

struct RenameResult {
  std::string code;
  RenameMap map;
};

/// Renames formal parameters and local variables to var1, var2, ... in order
/// of first declaration. Throws ShadowingUnsupported when a nested class body
/// redeclares a name that is still in scope.
RenameResult rename_locals(const SourceUnit& unit);

/// Replaces every identifier token whose text is a key of `map` with its
/// value. Scope-blind: intended for undoing rename_locals.
std::string substitute_identifiers(std::string_view code, const RenameMap& map);

RenameMap invert(const RenameMap& map);

struct RefactorResult {
  std::string code;
  TransformSite site;  // points at the comparison inside the new declaration
  std::string variable;
};

/// Hoists the condition of an if-else site into
/// `boolean condition = <cond>;` placed just before the if statement.
RefactorResult refactor_condition(const SourceUnit& unit, const TransformSite& site);

/// First of "condition", "condition1", "condition2", ... absent from `code`.
std::string fresh_condition_name(std::string_view code);

}  // namespace metaprobe
