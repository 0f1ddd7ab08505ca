#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "metaprobe/common.hpp"
#include "metaprobe/lexer.hpp"

namespace metaprobe {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;
inline constexpr std::size_t kNoToken = static_cast<std::size_t>(-1);

// Child layout per kind (kNoNode marks an absent optional child):
//   If           [condition, then, else]
//   While        [condition, body]
//   DoWhile      [body, condition]
//   For          [ForInit, condition, ForUpdate, body]
//   ForEach      [Param, iterable, body]
//   Binary       [lhs, rhs]            token = operator
//   Unary        [operand]             token = operator (prefix)
//   Postfix      [operand]             token = operator
//   Assign       [target, value]       token = operator
//   Name         []                    token = identifier
//   FieldAccess  [target]              token = member identifier
//   MethodCall   [target, args...]     token = method identifier
//   Declarator   [initializer]         token = declared identifier
//   Param        [type]                token = declared identifier
//   Binding      [type]                token = pattern variable (instanceof)
//   MethodDecl   [Params, body]        token = method identifier
//   Lambda       [Params, body]
//   Catch        [Param, body]
//   Try          [Resources, block, Catch..., finally]
//   Conditional  [condition, then, else]
//   Switch       [selector, SwitchCase...]  (SwitchExpr likewise)
//   SwitchCase   [CaseLabels, body...]
//   New          [outer, Type, args..., ClassBody?]
enum class NodeKind {
  Unit,
  // declarations
  ClassDecl,
  ClassBody,
  FieldDecl,
  MethodDecl,
  Initializer,
  EnumConstant,
  Params,
  Param,
  Declarator,
  Type,
  // statements
  Block,
  LocalVarDecl,
  LocalClassDecl,
  If,
  While,
  DoWhile,
  For,
  ForInit,
  ForUpdate,
  ForEach,
  Try,
  Resources,
  Catch,
  Switch,
  SwitchCase,
  CaseLabels,
  Return,
  Throw,
  Break,
  Continue,
  Synchronized,
  Labeled,
  Yield,
  Assert,
  ExpressionStmt,
  Empty,
  // expressions
  Name,
  Literal,
  This,
  Super,
  FieldAccess,
  MethodCall,
  New,
  NewArray,
  ArrayInit,
  ArrayAccess,
  Unary,
  Postfix,
  Binary,
  InstanceOf,
  Binding,
  Conditional,
  Assign,
  Cast,
  Lambda,
  MethodRef,
  ClassLiteral,
  Paren,
  SwitchExpr,
};

std::string_view to_string(NodeKind kind);

bool is_statement(NodeKind kind);

struct Node {
  NodeKind kind = NodeKind::Empty;
  ByteSpan span;
  NodeId parent = kNoNode;
  std::size_t token = kNoToken;  // index into SyntaxTree::tokens()
  std::vector<NodeId> children;
};

/// Immutable parse result. Owns its source text; token views point into it.
class SyntaxTree {
 public:
  SyntaxTree() = default;

  std::string_view code() const { return *code_; }
  /// Significant tokens (comments removed) that the tree's token indices
  /// refer to.
  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  NodeId root() const { return root_; }

  std::string_view text(NodeId id) const { return node(id).span.slice(code()); }
  std::string_view token_text(NodeId id) const {
    return tokens_.at(node(id).token).text;
  }
  NodeId child(NodeId id, std::size_t index) const {
    const auto& c = node(id).children;
    return index < c.size() ? c[index] : kNoNode;
  }

  /// Pre-order visit of every node reachable from `from` (in source order).
  void visit(NodeId from, const std::function<void(NodeId)>& fn) const;
  void visit(const std::function<void(NodeId)>& fn) const { visit(root_, fn); }

  /// Strips any number of enclosing parentheses.
  NodeId unparen(NodeId id) const;

 private:
  friend class Parser;
  std::shared_ptr<const std::string> code_ = std::make_shared<const std::string>();
  std::vector<Token> tokens_;
  std::vector<Node> nodes_;
  NodeId root_ = kNoNode;
};

/// Parses a Java compilation fragment: a sequence of type members (methods,
/// fields, classes) or, failing that, a sequence of block statements.
/// Throws SyntaxError carrying the first offending byte offset.
SyntaxTree parse(std::string_view code);

}  // namespace metaprobe
