#include "metaprobe/transforms.hpp"

#include <algorithm>
#include <cstdio>

#include "edit_set.hpp"
#include "metaprobe/lexer.hpp"

namespace metaprobe {

namespace {

TransformedPair swap_blocks(const SourceUnit& unit, const TransformSite& site,
                            TransformKind kind) {
  validate_site(unit.code, site);
  if (site.site_kind != SiteKind::IfElseBlock)
    throw IneligibleSite("block swap requires an if-else site");
  const std::string_view code = unit.code;
  const ByteSpan then_span = *site.then_span;
  const ByteSpan else_span = *site.else_span;
  const ComparisonOp new_op = kind == TransformKind::BlockSwap ? negate(site.op) : site.op;

  const EditSet edits({
      {site.operator_span, std::string(surface(new_op))},
      {then_span, std::string(else_span.slice(code))},
      {else_span, std::string(then_span.slice(code))},
  });

  TransformedPair pair;
  pair.transform = kind;
  pair.unit_id = unit.id;
  pair.pair_id = make_pair_id(unit.id, kind, site);
  pair.original_code = unit.code;
  pair.transformed_code = edits.apply(code);
  pair.original_op = site.op;
  pair.transformed_op = new_op;
  pair.original_mask_span = site.operator_span;
  pair.site = site;

  TransformSite moved = site;
  moved.op = new_op;
  moved.operator_span = edits.replaced(site.operator_span);
  moved.condition_span = edits.map(site.condition_span);
  moved.left.span = edits.map(site.left.span);
  moved.right.span = edits.map(site.right.span);
  moved.then_span = edits.replaced(then_span);
  moved.else_span = edits.replaced(else_span);
  moved.statement_span = edits.map(site.statement_span);
  pair.transformed_mask_span = moved.operator_span;
  pair.transformed_site = std::move(moved);
  return pair;
}

}  // namespace

std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::BlockSwap: return "block_swap";
    case TransformKind::OperandSwap: return "operand_swap";
    case TransformKind::NonEquivalentBlockSwap: return "non_equivalent_block_swap";
  }
  return "block_swap";
}

std::optional<TransformKind> parse_transform_kind(std::string_view text) {
  for (auto k : {TransformKind::BlockSwap, TransformKind::OperandSwap,
                 TransformKind::NonEquivalentBlockSwap}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::string make_pair_id(std::string_view unit_id, TransformKind kind,
                         const TransformSite& site) {
  char offset[32];
  std::snprintf(offset, sizeof offset, "%06zu", site.operator_span.start);
  return std::string(unit_id) + ":" + std::string(to_string(kind)) + "@" + offset;
}

TransformedPair block_swap(const SourceUnit& unit, const TransformSite& site) {
  return swap_blocks(unit, site, TransformKind::BlockSwap);
}

TransformedPair non_equivalent_block_swap(const SourceUnit& unit, const TransformSite& site) {
  return swap_blocks(unit, site, TransformKind::NonEquivalentBlockSwap);
}

TransformedPair operand_swap(const SourceUnit& unit, const TransformSite& site) {
  validate_site(unit.code, site);
  if (!operand_swap_allowed(site.left.kind, site.right.kind))
    throw IneligibleSite("operand kinds " + std::string(to_string(site.left.kind)) + "/" +
                         std::string(to_string(site.right.kind)) + " may not be reordered");
  const ComparisonOp new_op = mirror(site.op);
  const EditSet edits({
      {site.left.span, site.right.text},
      {site.operator_span, std::string(surface(new_op))},
      {site.right.span, site.left.text},
  });

  TransformedPair pair;
  pair.transform = TransformKind::OperandSwap;
  pair.unit_id = unit.id;
  pair.pair_id = make_pair_id(unit.id, TransformKind::OperandSwap, site);
  pair.original_code = unit.code;
  pair.transformed_code = edits.apply(unit.code);
  pair.original_op = site.op;
  pair.transformed_op = new_op;
  pair.original_mask_span = site.operator_span;
  pair.site = site;

  TransformSite moved = site;
  moved.op = new_op;
  moved.operator_span = edits.replaced(site.operator_span);
  moved.left = {site.right.text, site.right.kind, edits.replaced(site.left.span)};
  moved.right = {site.left.text, site.left.kind, edits.replaced(site.right.span)};
  moved.condition_span = edits.map(site.condition_span);
  if (site.then_span) moved.then_span = edits.map(*site.then_span);
  if (site.else_span) moved.else_span = edits.map(*site.else_span);
  moved.statement_span = edits.map(site.statement_span);
  pair.transformed_mask_span = moved.operator_span;
  pair.transformed_site = std::move(moved);
  return pair;
}

std::string fresh_condition_name(std::string_view code) {
  const auto tokens = lex(code);
  auto taken = [&](std::string_view name) {
    return std::any_of(tokens.begin(), tokens.end(), [&](const Token& t) {
      return t.kind == TokenKind::Identifier && t.text == name;
    });
  };
  std::string name = "condition";
  for (int i = 1; taken(name); ++i) name = "condition" + std::to_string(i);
  return name;
}

RefactorResult refactor_condition(const SourceUnit& unit, const TransformSite& site) {
  validate_site(unit.code, site);
  if (site.site_kind != SiteKind::IfElseBlock)
    throw IneligibleSite("condition refactoring requires an if-else site");
  const std::string_view code = unit.code;

  // The declaration can only go where a statement list allows it.
  const SyntaxTree tree = parse(code);
  NodeId if_node = kNoNode;
  tree.visit([&](NodeId id) {
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::If && n.span == site.statement_span) if_node = id;
  });
  if (if_node == kNoNode) throw SpanMismatch("no if statement at site");
  const NodeId parent = tree.node(if_node).parent;
  const auto parent_kind = parent == kNoNode ? NodeKind::Unit : tree.node(parent).kind;
  if (parent_kind != NodeKind::Block && parent_kind != NodeKind::SwitchCase &&
      parent_kind != NodeKind::Unit)
    throw IneligibleSite("if statement is not directly inside a block");

  const std::string name = fresh_condition_name(code);
  const std::size_t stmt_start = site.statement_span.start;
  std::size_t line_start = stmt_start;
  while (line_start > 0 && code[line_start - 1] != '\n') --line_start;
  const auto lead = code.substr(line_start, stmt_start - line_start);
  const bool own_line = lead.find_first_not_of(" \t") == std::string_view::npos;

  const std::string prefix = "boolean " + name + " = ";
  const std::string condition(site.condition_span.slice(code));
  std::string decl = prefix + condition + ";";
  decl += own_line ? "\n" + std::string(lead) : std::string(" ");

  const EditSet edits({
      {{stmt_start, stmt_start}, decl},
      {site.condition_span, name},
  });

  RefactorResult result;
  result.variable = name;
  result.code = edits.apply(code);

  TransformSite moved = site;
  const std::size_t cond_start = stmt_start + prefix.size();
  auto shift_into_decl = [&](ByteSpan s) {
    return ByteSpan{cond_start + (s.start - site.condition_span.start),
                    cond_start + (s.end - site.condition_span.start)};
  };
  moved.condition_span = {cond_start, cond_start + condition.size()};
  moved.operator_span = shift_into_decl(site.operator_span);
  moved.left.span = shift_into_decl(site.left.span);
  moved.right.span = shift_into_decl(site.right.span);
  moved.then_span = edits.map(*site.then_span);
  moved.else_span = edits.map(*site.else_span);
  moved.statement_span = {stmt_start, edits.map(site.statement_span.end)};
  result.site = std::move(moved);
  return result;
}

std::string substitute_identifiers(std::string_view code, const RenameMap& map) {
  std::vector<Edit> edits;
  for (const auto& t : lex(code)) {
    if (t.kind != TokenKind::Identifier) continue;
    for (const auto& [from, to] : map) {
      if (t.text == from) {
        edits.push_back({t.span, to});
        break;
      }
    }
  }
  return EditSet(std::move(edits)).apply(code);
}

RenameMap invert(const RenameMap& map) {
  RenameMap out;
  out.reserve(map.size());
  for (const auto& [from, to] : map) out.emplace_back(to, from);
  return out;
}

}  // namespace metaprobe
