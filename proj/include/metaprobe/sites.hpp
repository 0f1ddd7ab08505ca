#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metaprobe/common.hpp"
#include "metaprobe/ops.hpp"
#include "metaprobe/syntax.hpp"

namespace metaprobe {

enum class Split { Train, Test };

/// One Java function under study.
struct SourceUnit {
  std::string id;
  std::string code;
  Split split = Split::Test;
};

enum class OperandKind { Variable, Literal, Call, Other };

enum class SiteKind { IfElseBlock, ConditionalComparison };

enum class Enclosing { If, While, For, DoWhile };

std::string_view to_string(Split split);
std::string_view to_string(OperandKind kind);
std::string_view to_string(SiteKind kind);
std::string_view to_string(Enclosing kind);
std::optional<Split> parse_split(std::string_view text);
std::optional<OperandKind> parse_operand_kind(std::string_view text);
std::optional<SiteKind> parse_site_kind(std::string_view text);
std::optional<Enclosing> parse_enclosing(std::string_view text);

struct Operand {
  std::string text;
  OperandKind kind = OperandKind::Other;
  ByteSpan span;

  friend bool operator==(const Operand&, const Operand&) = default;
};

/// A located rewrite opportunity: one comparison that is the whole condition
/// of an if/while/for/do-while statement.
struct TransformSite {
  std::string unit_id;
  SiteKind site_kind = SiteKind::ConditionalComparison;
  ComparisonOp op = ComparisonOp::EQ;
  ByteSpan operator_span;
  ByteSpan condition_span;
  std::optional<ByteSpan> then_span;
  std::optional<ByteSpan> else_span;
  Operand left;
  Operand right;
  Enclosing enclosing = Enclosing::If;
  /// The whole controlling statement (for refactored sites: the hoisted
  /// declaration through the end of the if statement).
  ByteSpan statement_span;

  friend bool operator==(const TransformSite&, const TransformSite&) = default;
};

OperandKind classify_operand(const SyntaxTree& tree, NodeId expr);

/// True when `(left, right)` may trade places without reordering side effects.
bool operand_swap_allowed(OperandKind left, OperandKind right);

/// if-else statements whose condition is a single comparison and whose else
/// branch is not itself an if. Source order.
std::vector<TransformSite> find_block_swap_sites(const SyntaxTree& tree,
                                                 std::string_view unit_id = {});

/// Comparisons forming the whole condition of if/while/for/do-while
/// statements whose operand kinds pass operand_swap_allowed. Source order.
std::vector<TransformSite> find_operand_swap_sites(const SyntaxTree& tree,
                                                   std::string_view unit_id = {});

/// Throws SpanMismatch unless every span of `site` lies within `code` and the
/// operator and operand texts read back as recorded.
void validate_site(std::string_view code, const TransformSite& site);

}  // namespace metaprobe
