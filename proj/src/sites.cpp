#include "metaprobe/sites.hpp"

#include <algorithm>

namespace metaprobe {

std::string_view to_string(Split split) {
  return split == Split::Train ? "train" : "test";
}

std::string_view to_string(OperandKind kind) {
  switch (kind) {
    case OperandKind::Variable: return "variable";
    case OperandKind::Literal: return "literal";
    case OperandKind::Call: return "call";
    case OperandKind::Other: return "other";
  }
  return "other";
}

std::string_view to_string(SiteKind kind) {
  return kind == SiteKind::IfElseBlock ? "if_else_block" : "conditional_comparison";
}

std::string_view to_string(Enclosing kind) {
  switch (kind) {
    case Enclosing::If: return "if";
    case Enclosing::While: return "while";
    case Enclosing::For: return "for";
    case Enclosing::DoWhile: return "do_while";
  }
  return "if";
}

std::optional<Split> parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  return std::nullopt;
}

std::optional<OperandKind> parse_operand_kind(std::string_view text) {
  for (auto k : {OperandKind::Variable, OperandKind::Literal, OperandKind::Call,
                 OperandKind::Other}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::optional<SiteKind> parse_site_kind(std::string_view text) {
  if (text == "if_else_block") return SiteKind::IfElseBlock;
  if (text == "conditional_comparison") return SiteKind::ConditionalComparison;
  return std::nullopt;
}

std::optional<Enclosing> parse_enclosing(std::string_view text) {
  for (auto k : {Enclosing::If, Enclosing::While, Enclosing::For, Enclosing::DoWhile}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

namespace {

bool is_numeric_literal(std::string_view text) {
  return !text.empty() && ((text[0] >= '0' && text[0] <= '9') || text[0] == '.');
}

bool contains_invocation(const SyntaxTree& tree, NodeId expr) {
  bool found = false;
  tree.visit(expr, [&](NodeId id) {
    const auto k = tree.node(id).kind;
    if (k == NodeKind::MethodCall || k == NodeKind::New) found = true;
  });
  return found;
}

bool is_connective_or_comparison(const SyntaxTree& tree, NodeId expr) {
  expr = tree.unparen(expr);
  const auto& n = tree.node(expr);
  if (n.kind == NodeKind::Unary) return tree.tokens()[n.token].text == "!";
  if (n.kind != NodeKind::Binary) return false;
  const auto op = tree.tokens()[n.token].text;
  return op == "&&" || op == "||" || parse_op(op).has_value();
}

/// The comparison making up the whole of `cond`, if any.
std::optional<ComparisonOp> single_comparison(const SyntaxTree& tree, NodeId cond) {
  if (cond == kNoNode) return std::nullopt;
  const auto& n = tree.node(cond);
  if (n.kind != NodeKind::Binary) return std::nullopt;
  const auto op = parse_op(tree.tokens()[n.token].text);
  if (!op) return std::nullopt;
  if (is_connective_or_comparison(tree, n.children[0]) ||
      is_connective_or_comparison(tree, n.children[1]))
    return std::nullopt;
  return op;
}

/// Whether placing `stmt` unbraced before an `else` would capture that else.
bool ends_with_open_if(const SyntaxTree& tree, NodeId stmt) {
  while (stmt != kNoNode) {
    const auto& n = tree.node(stmt);
    switch (n.kind) {
      case NodeKind::If:
        if (n.children[2] == kNoNode) return true;
        stmt = n.children[2];
        break;
      case NodeKind::While: stmt = n.children[1]; break;
      case NodeKind::For: stmt = n.children[3]; break;
      case NodeKind::ForEach: stmt = n.children[2]; break;
      case NodeKind::Labeled: stmt = n.children[0]; break;
      default: return false;
    }
  }
  return false;
}

Operand make_operand(const SyntaxTree& tree, NodeId expr) {
  return {std::string(tree.text(expr)), classify_operand(tree, expr), tree.node(expr).span};
}

TransformSite make_site(const SyntaxTree& tree, std::string_view unit_id, NodeId stmt,
                        NodeId cond, ComparisonOp op, Enclosing enclosing) {
  const auto& c = tree.node(cond);
  TransformSite site;
  site.unit_id = std::string(unit_id);
  site.op = op;
  site.operator_span = tree.tokens()[c.token].span;
  site.condition_span = c.span;
  site.left = make_operand(tree, c.children[0]);
  site.right = make_operand(tree, c.children[1]);
  site.enclosing = enclosing;
  site.statement_span = tree.node(stmt).span;
  return site;
}

}  // namespace

OperandKind classify_operand(const SyntaxTree& tree, NodeId expr) {
  const auto& n = tree.node(expr);
  switch (n.kind) {
    case NodeKind::Name:
      return OperandKind::Variable;
    case NodeKind::Literal:
      return OperandKind::Literal;
    case NodeKind::Unary: {
      // A signed numeric constant such as -1 is a literal.
      const auto op = tree.tokens()[n.token].text;
      const auto& inner = tree.node(n.children[0]);
      if ((op == "-" || op == "+") && inner.kind == NodeKind::Literal &&
          is_numeric_literal(tree.tokens()[inner.token].text))
        return OperandKind::Literal;
      break;
    }
    default:
      break;
  }
  return contains_invocation(tree, expr) ? OperandKind::Call : OperandKind::Other;
}

bool operand_swap_allowed(OperandKind left, OperandKind right) {
  using K = OperandKind;
  const bool simple_l = left == K::Variable || left == K::Literal;
  const bool simple_r = right == K::Variable || right == K::Literal;
  if (simple_l && simple_r) return true;
  return (left == K::Call && right == K::Literal) || (left == K::Literal && right == K::Call);
}

std::vector<TransformSite> find_block_swap_sites(const SyntaxTree& tree,
                                                 std::string_view unit_id) {
  std::vector<TransformSite> sites;
  tree.visit([&](NodeId id) {
    const auto& n = tree.node(id);
    if (n.kind != NodeKind::If) return;
    const NodeId cond = n.children[0];
    const NodeId then = n.children[1];
    const NodeId otherwise = n.children[2];
    if (otherwise == kNoNode || tree.node(otherwise).kind == NodeKind::If) return;
    const auto op = single_comparison(tree, cond);
    if (!op) return;
    if (tree.node(otherwise).kind != NodeKind::Block && ends_with_open_if(tree, otherwise))
      return;
    auto site = make_site(tree, unit_id, id, cond, *op, Enclosing::If);
    site.site_kind = SiteKind::IfElseBlock;
    site.then_span = tree.node(then).span;
    site.else_span = tree.node(otherwise).span;
    sites.push_back(std::move(site));
  });
  std::stable_sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
    return a.operator_span.start < b.operator_span.start;
  });
  return sites;
}

std::vector<TransformSite> find_operand_swap_sites(const SyntaxTree& tree,
                                                   std::string_view unit_id) {
  std::vector<TransformSite> sites;
  tree.visit([&](NodeId id) {
    const auto& n = tree.node(id);
    NodeId cond = kNoNode;
    Enclosing enclosing;
    switch (n.kind) {
      case NodeKind::If: cond = n.children[0]; enclosing = Enclosing::If; break;
      case NodeKind::While: cond = n.children[0]; enclosing = Enclosing::While; break;
      case NodeKind::DoWhile: cond = n.children[1]; enclosing = Enclosing::DoWhile; break;
      case NodeKind::For: cond = n.children[1]; enclosing = Enclosing::For; break;
      default: return;
    }
    const auto op = single_comparison(tree, cond);
    if (!op) return;
    auto site = make_site(tree, unit_id, id, cond, *op, enclosing);
    if (!operand_swap_allowed(site.left.kind, site.right.kind)) return;
    sites.push_back(std::move(site));
  });
  std::stable_sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
    return a.operator_span.start < b.operator_span.start;
  });
  return sites;
}

void validate_site(std::string_view code, const TransformSite& site) {
  auto check = [&](ByteSpan span, const char* what) {
    if (!span.fits(code)) throw SpanMismatch(std::string(what) + " span out of range");
  };
  check(site.operator_span, "operator");
  check(site.condition_span, "condition");
  check(site.left.span, "left operand");
  check(site.right.span, "right operand");
  check(site.statement_span, "statement");
  if (site.operator_span.slice(code) != surface(site.op))
    throw SpanMismatch("operator text does not match site");
  if (!site.condition_span.contains(site.operator_span))
    throw SpanMismatch("operator outside condition");
  if (site.left.span.slice(code) != site.left.text ||
      site.right.span.slice(code) != site.right.text)
    throw SpanMismatch("operand text does not match site");
  if (!(site.left.span.end <= site.operator_span.start &&
        site.operator_span.end <= site.right.span.start))
    throw SpanMismatch("operands do not flank operator");
  if (site.site_kind == SiteKind::IfElseBlock) {
    if (!site.then_span || !site.else_span) throw SpanMismatch("block site without branches");
    check(*site.then_span, "then");
    check(*site.else_span, "else");
    if (!(site.condition_span.end <= site.then_span->start &&
          site.then_span->end <= site.else_span->start))
      throw SpanMismatch("branches out of order");
  }
}

}  // namespace metaprobe
