#include <algorithm>
#include <array>
#include <initializer_list>
#include <optional>
#include <utility>

#include "metaprobe/syntax.hpp"

namespace metaprobe {

namespace {

constexpr std::array<std::string_view, 9> kPrimitiveTypes = {
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void"};

constexpr std::array<std::string_view, 13> kModifiers = {
    "public",   "protected", "private",      "static",    "abstract",
    "final",    "native",    "synchronized", "transient", "volatile",
    "strictfp", "default",   "sealed"};

constexpr std::array<std::string_view, 12> kAssignOps = {
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="};

template <std::size_t N>
bool one_of(std::string_view s, const std::array<std::string_view, N>& set) {
  return std::find(set.begin(), set.end(), s) != set.end();
}

int binary_precedence(std::string_view op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "|") return 3;
  if (op == "^") return 4;
  if (op == "&") return 5;
  if (op == "==" || op == "!=") return 6;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 7;
  if (op == "<<" || op == ">>" || op == ">>>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  return 0;
}

constexpr int kInstanceofPrecedence = 7;

}  // namespace

class Parser {
 public:
  explicit Parser(std::string_view code) {
    tree_.code_ = std::make_shared<const std::string>(code);
    for (const auto& t : lex(*tree_.code_)) {
      if (t.kind != TokenKind::Comment) tree_.tokens_.push_back(t);
    }
  }

  SyntaxTree run() {
    if (toks().empty()) throw SyntaxError(0, "empty input");
    const State begin = save();
    std::optional<SyntaxError> member_error;
    try {
      std::vector<NodeId> members;
      while (!eof()) members.push_back(parse_member());
      tree_.root_ = make(NodeKind::Unit, 0, prev_end_, kNoToken, std::move(members));
    } catch (const SyntaxError& e) {
      member_error = e;
    }
    if (member_error) {
      restore(begin);
      try {
        std::vector<NodeId> stmts;
        while (!eof()) stmts.push_back(parse_block_statement());
        tree_.root_ = make(NodeKind::Unit, 0, prev_end_, kNoToken, std::move(stmts));
      } catch (const SyntaxError& e) {
        throw e.offset() >= member_error->offset() ? e : *member_error;
      }
    }
    link_parents();
    return std::move(tree_);
  }

 private:
  struct State {
    std::size_t pos;
    std::size_t gt_used;
    std::size_t prev_end;
    std::size_t node_count;
  };

  SyntaxTree tree_;
  std::size_t pos_ = 0;
  std::size_t gt_used_ = 0;  // '>' characters already taken from a '>>' token
  std::size_t prev_end_ = 0;

  const std::vector<Token>& toks() const { return tree_.tokens_; }
  bool eof() const { return pos_ >= toks().size(); }

  State save() const { return {pos_, gt_used_, prev_end_, tree_.nodes_.size()}; }
  void restore(const State& s) {
    pos_ = s.pos;
    gt_used_ = s.gt_used;
    prev_end_ = s.prev_end;
    tree_.nodes_.resize(s.node_count);
  }

  std::string_view la(std::size_t k = 0) const {
    const std::size_t i = pos_ + k;
    if (i >= toks().size()) return {};
    if (k == 0 && gt_used_ > 0) return toks()[i].text.substr(gt_used_);
    return toks()[i].text;
  }
  TokenKind kind(std::size_t k = 0) const {
    const std::size_t i = pos_ + k;
    return i < toks().size() ? toks()[i].kind : TokenKind::Other;
  }
  bool at(std::string_view s) const { return !eof() && la() == s; }
  bool at_ident() const { return kind() == TokenKind::Identifier; }
  std::size_t cur_start() const {
    return eof() ? tree_.code_->size() : toks()[pos_].span.start + gt_used_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::string msg = what;
    if (!eof()) msg += " near '" + std::string(la()) + "'";
    throw SyntaxError(cur_start(), msg);
  }

  std::size_t advance() {
    if (eof()) fail("unexpected end of input");
    const std::size_t index = pos_;
    prev_end_ = toks()[pos_].span.end;
    ++pos_;
    gt_used_ = 0;
    return index;
  }
  bool accept(std::string_view s) {
    if (!at(s)) return false;
    advance();
    return true;
  }
  std::size_t expect(std::string_view s) {
    if (!at(s)) fail("expected '" + std::string(s) + "'");
    return advance();
  }
  std::size_t expect_ident() {
    if (!at_ident()) fail("expected identifier");
    return advance();
  }
  void expect_close_angle() {
    const auto text = la();
    if (text.empty() || text.find_first_not_of('>') != std::string_view::npos)
      fail("expected '>'");
    ++gt_used_;
    prev_end_ = toks()[pos_].span.start + gt_used_;
    if (gt_used_ == toks()[pos_].text.size()) {
      ++pos_;
      gt_used_ = 0;
    }
  }

  NodeId make(NodeKind k, std::size_t start, std::size_t end, std::size_t token,
              std::vector<NodeId> children = {}) {
    Node n;
    n.kind = k;
    n.span = {start, std::max(start, end)};
    n.token = token;
    n.children = std::move(children);
    tree_.nodes_.push_back(std::move(n));
    return static_cast<NodeId>(tree_.nodes_.size() - 1);
  }
  NodeId finish(NodeKind k, std::size_t start, std::size_t token = kNoToken,
                std::vector<NodeId> children = {}) {
    return make(k, start, prev_end_, token, std::move(children));
  }

  void link_parents() {
    for (std::size_t i = 0; i < tree_.nodes_.size(); ++i) {
      for (NodeId c : tree_.nodes_[i].children) {
        if (c != kNoNode) tree_.nodes_[static_cast<std::size_t>(c)].parent =
            static_cast<NodeId>(i);
      }
    }
  }

  // ---------------------------------------------------------------- helpers

  void skip_balanced(std::string_view open, std::string_view close) {
    expect(open);
    int depth = 1;
    while (depth > 0) {
      if (eof()) fail("unbalanced '" + std::string(open) + "'");
      if (at(open)) ++depth;
      if (at(close)) --depth;
      advance();
    }
  }

  void parse_annotation() {
    expect("@");
    expect_ident();
    while (at(".") && kind(1) == TokenKind::Identifier) {
      advance();
      advance();
    }
    if (at("(")) skip_balanced("(", ")");
  }

  bool parse_modifiers() {
    bool any = false;
    while (!eof()) {
      if (at("@") && la(1) != "interface") {
        parse_annotation();
      } else if (kind() == TokenKind::Keyword && one_of(la(), kModifiers) &&
                 !(at("default") && (la(1) == ":" || la(1) == "->"))) {
        advance();
      } else if (at("non") && la(1) == "-" && la(2) == "sealed") {
        advance();
        advance();
        advance();
      } else {
        break;
      }
      any = true;
    }
    return any;
  }

  bool at_type_decl_start() const {
    if (at("class") || at("interface") || at("enum")) return true;
    if (at("@") && la(1) == "interface") return true;
    return at("record") && kind(1) == TokenKind::Identifier &&
           (la(2) == "(" || la(2) == "<");
  }

  void parse_type_args() {
    expect("<");
    if (at(">")) {
      expect_close_angle();
      return;
    }
    while (true) {
      while (at("@")) parse_annotation();
      if (accept("?")) {
        if (accept("extends") || accept("super")) parse_type();
      } else {
        parse_type();
      }
      while (accept("&")) parse_type();
      if (!accept(",")) break;
    }
    expect_close_angle();
  }

  void parse_type_params() {
    expect("<");
    while (true) {
      while (at("@")) parse_annotation();
      expect_ident();
      if (accept("extends")) {
        parse_type();
        while (accept("&")) parse_type();
      }
      if (!accept(",")) break;
    }
    expect_close_angle();
  }

  void parse_dims() {
    while (true) {
      while (at("@")) parse_annotation();
      if (at("[") && la(1) == "]") {
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  NodeId parse_type(bool allow_dims = true) {
    while (at("@")) parse_annotation();
    const std::size_t start = cur_start();
    if (kind() == TokenKind::Keyword && one_of(la(), kPrimitiveTypes)) {
      advance();
    } else {
      expect_ident();
      if (at("<")) parse_type_args();
      while (at(".") && (kind(1) == TokenKind::Identifier || la(1) == "@")) {
        advance();
        while (at("@")) parse_annotation();
        expect_ident();
        if (at("<")) parse_type_args();
      }
    }
    if (allow_dims) parse_dims();
    return finish(NodeKind::Type, start);
  }

  // ------------------------------------------------------------ declarations

  NodeId parse_type_decl(std::size_t start) {
    const bool is_enum = at("enum");
    if (at("@")) advance();
    advance();  // class | interface | enum | record
    const std::size_t name = expect_ident();
    if (at("<")) parse_type_params();
    // Header: record components, extends/implements/permits.
    while (!eof() && !at("{")) {
      if (at("(")) {
        skip_balanced("(", ")");
      } else if (at("<")) {
        parse_type_args();
      } else {
        advance();
      }
    }
    const NodeId body = is_enum ? parse_enum_body() : parse_class_body();
    return finish(NodeKind::ClassDecl, start, name, {body});
  }

  NodeId parse_class_body() {
    const std::size_t start = cur_start();
    expect("{");
    std::vector<NodeId> members;
    while (!at("}")) {
      if (eof()) fail("unterminated class body");
      members.push_back(parse_member());
    }
    expect("}");
    return finish(NodeKind::ClassBody, start, kNoToken, std::move(members));
  }

  NodeId parse_enum_body() {
    const std::size_t start = cur_start();
    expect("{");
    std::vector<NodeId> members;
    while (!at(";") && !at("}")) {
      const std::size_t cstart = cur_start();
      while (at("@")) parse_annotation();
      const std::size_t name = expect_ident();
      std::vector<NodeId> parts;
      if (at("(")) parts = parse_arguments();
      if (at("{")) parts.push_back(parse_class_body());
      members.push_back(finish(NodeKind::EnumConstant, cstart, name, std::move(parts)));
      if (!accept(",")) break;
    }
    if (accept(";")) {
      while (!at("}")) {
        if (eof()) fail("unterminated enum body");
        members.push_back(parse_member());
      }
    }
    expect("}");
    return finish(NodeKind::ClassBody, start, kNoToken, std::move(members));
  }

  void parse_throws() {
    if (!accept("throws")) return;
    do {
      parse_type();
    } while (accept(","));
  }

  NodeId parse_params() {
    const std::size_t start = cur_start();
    expect("(");
    std::vector<NodeId> params;
    if (!at(")")) {
      do {
        params.push_back(parse_param());
      } while (accept(","));
    }
    expect(")");
    return finish(NodeKind::Params, start, kNoToken, std::move(params));
  }

  NodeId parse_param() {
    const std::size_t start = cur_start();
    parse_modifiers();
    const NodeId type = parse_type();
    while (at("@")) parse_annotation();
    accept("...");
    if (at("this")) {  // receiver parameter
      advance();
      return finish(NodeKind::Param, start, kNoToken, {type});
    }
    if (kind() == TokenKind::Identifier && la(1) == "." && la(2) == "this") {
      advance();
      advance();
      advance();
      return finish(NodeKind::Param, start, kNoToken, {type});
    }
    const std::size_t name = expect_ident();
    parse_dims();
    return finish(NodeKind::Param, start, name, {type});
  }

  NodeId parse_member() {
    const std::size_t start = cur_start();
    if (accept(";")) return finish(NodeKind::Empty, start);
    if (at("{")) return finish(NodeKind::Initializer, start, kNoToken, {parse_block()});
    if (at("static") && la(1) == "{") {
      advance();
      return finish(NodeKind::Initializer, start, kNoToken, {parse_block()});
    }
    parse_modifiers();
    if (at_type_decl_start()) return parse_type_decl(start);
    if (at("<")) parse_type_params();
    if (at_ident() && la(1) == "(") {  // constructor
      const std::size_t name = advance();
      const NodeId params = parse_params();
      parse_throws();
      const NodeId body = parse_block();
      return finish(NodeKind::MethodDecl, start, name, {params, body});
    }
    if (at_ident() && la(1) == "{") {  // compact record constructor
      const std::size_t name = advance();
      const NodeId params = make(NodeKind::Params, cur_start(), cur_start(), kNoToken);
      const NodeId body = parse_block();
      return finish(NodeKind::MethodDecl, start, name, {params, body});
    }
    const NodeId type = parse_type();
    const std::size_t name = expect_ident();
    if (at("(")) {
      const NodeId params = parse_params();
      parse_dims();
      parse_throws();
      NodeId body = kNoNode;
      if (at("{")) {
        body = parse_block();
      } else if (accept("default")) {
        parse_element_value();
        expect(";");
      } else {
        expect(";");
      }
      return finish(NodeKind::MethodDecl, start, name, {params, body});
    }
    std::vector<NodeId> parts{type};
    parts.push_back(parse_declarator_rest(name));
    while (accept(",")) parts.push_back(parse_declarator_rest(expect_ident()));
    expect(";");
    return finish(NodeKind::FieldDecl, start, kNoToken, std::move(parts));
  }

  void parse_element_value() {
    if (at("@")) {
      parse_annotation();
    } else if (at("{")) {
      skip_balanced("{", "}");
    } else {
      parse_ternary();
    }
  }

  NodeId parse_declarator_rest(std::size_t name) {
    const std::size_t start = toks()[name].span.start;
    parse_dims();
    NodeId init = kNoNode;
    if (accept("=")) init = parse_variable_initializer();
    return finish(NodeKind::Declarator, start, name, {init});
  }

  NodeId parse_variable_initializer() {
    return at("{") ? parse_array_init() : parse_expression();
  }

  NodeId parse_array_init() {
    const std::size_t start = cur_start();
    expect("{");
    std::vector<NodeId> items;
    while (!at("}")) {
      items.push_back(parse_variable_initializer());
      if (!accept(",")) break;
    }
    expect("}");
    return finish(NodeKind::ArrayInit, start, kNoToken, std::move(items));
  }

  // -------------------------------------------------------------- statements

  NodeId parse_block() {
    const std::size_t start = cur_start();
    expect("{");
    std::vector<NodeId> stmts;
    while (!at("}")) {
      if (eof()) fail("unterminated block");
      stmts.push_back(parse_block_statement());
    }
    expect("}");
    return finish(NodeKind::Block, start, kNoToken, std::move(stmts));
  }

  /// Attempts `modifiers Type name` followed by one of `follow`; restores and
  /// returns nullopt otherwise. On success the cursor sits on the name.
  std::optional<NodeId> try_decl_head(std::initializer_list<std::string_view> follow) {
    const State s = save();
    try {
      parse_modifiers();
      if (at_ident() || (kind() == TokenKind::Keyword && one_of(la(), kPrimitiveTypes))) {
        const NodeId type = parse_type();
        if (at_ident() && std::find(follow.begin(), follow.end(), la(1)) != follow.end()) {
          return type;
        }
      }
    } catch (const SyntaxError&) {
    }
    restore(s);
    return std::nullopt;
  }

  NodeId parse_local_var_decl(std::size_t start, NodeId type, bool need_semicolon) {
    std::vector<NodeId> parts{type};
    parts.push_back(parse_declarator_rest(expect_ident()));
    while (accept(",")) parts.push_back(parse_declarator_rest(expect_ident()));
    if (need_semicolon) expect(";");
    return finish(NodeKind::LocalVarDecl, start, kNoToken, std::move(parts));
  }

  bool at_yield_statement() const {
    if (!at("yield")) return false;
    const auto next = la(1);
    if (next.empty()) return false;
    if (one_of(next, kAssignOps)) return false;
    return next != "." && next != "[" && next != "++" && next != "--" &&
           next != ":" && next != "->" && next != ";" && next != "(";
  }

  NodeId parse_block_statement() {
    const std::size_t start = cur_start();
    const auto t = la();
    if (t == "{") return parse_block();
    if (t == ";") {
      advance();
      return finish(NodeKind::Empty, start);
    }
    if (kind() == TokenKind::Keyword) {
      if (t == "if") return parse_if();
      if (t == "while") {
        advance();
        const NodeId cond = parse_par_expression();
        const NodeId body = parse_block_statement();
        return finish(NodeKind::While, start, kNoToken, {cond, body});
      }
      if (t == "do") {
        advance();
        const NodeId body = parse_block_statement();
        expect("while");
        const NodeId cond = parse_par_expression();
        expect(";");
        return finish(NodeKind::DoWhile, start, kNoToken, {body, cond});
      }
      if (t == "for") return parse_for();
      if (t == "try") return parse_try();
      if (t == "switch") return parse_switch(NodeKind::Switch);
      if (t == "return") {
        advance();
        NodeId value = kNoNode;
        if (!at(";")) value = parse_expression();
        expect(";");
        return finish(NodeKind::Return, start, kNoToken, {value});
      }
      if (t == "throw") {
        advance();
        const NodeId value = parse_expression();
        expect(";");
        return finish(NodeKind::Throw, start, kNoToken, {value});
      }
      if (t == "break" || t == "continue") {
        advance();
        std::size_t label = kNoToken;
        if (at_ident()) label = advance();
        expect(";");
        return finish(t == "break" ? NodeKind::Break : NodeKind::Continue, start, label);
      }
      if (t == "synchronized" && la(1) == "(") {
        advance();
        const NodeId lock = parse_par_expression();
        const NodeId body = parse_block();
        return finish(NodeKind::Synchronized, start, kNoToken, {lock, body});
      }
      if (t == "assert") {
        advance();
        std::vector<NodeId> parts{parse_expression()};
        if (accept(":")) parts.push_back(parse_expression());
        expect(";");
        return finish(NodeKind::Assert, start, kNoToken, std::move(parts));
      }
    }
    if (at_yield_statement()) {
      advance();
      const NodeId value = parse_expression();
      expect(";");
      return finish(NodeKind::Yield, start, kNoToken, {value});
    }
    if (at_ident() && la(1) == ":") {
      const std::size_t label = advance();
      advance();
      const NodeId body = parse_block_statement();
      return finish(NodeKind::Labeled, start, label, {body});
    }
    {
      const State s = save();
      parse_modifiers();
      if (at_type_decl_start()) {
        const NodeId decl = parse_type_decl(start);
        return finish(NodeKind::LocalClassDecl, start, kNoToken, {decl});
      }
      restore(s);
    }
    if (auto type = try_decl_head({"=", ";", ",", "["})) {
      return parse_local_var_decl(start, *type, true);
    }
    const NodeId expr = parse_expression();
    expect(";");
    return finish(NodeKind::ExpressionStmt, start, kNoToken, {expr});
  }

  NodeId parse_par_expression() {
    expect("(");
    const NodeId e = parse_expression();
    expect(")");
    return e;
  }

  NodeId parse_if() {
    const std::size_t start = cur_start();
    expect("if");
    const NodeId cond = parse_par_expression();
    const NodeId then = parse_block_statement();
    NodeId otherwise = kNoNode;
    if (accept("else")) otherwise = parse_block_statement();
    return finish(NodeKind::If, start, kNoToken, {cond, then, otherwise});
  }

  NodeId parse_for() {
    const std::size_t start = cur_start();
    expect("for");
    expect("(");
    {
      const std::size_t pstart = cur_start();
      if (auto type = try_decl_head({":"})) {
        const std::size_t name = advance();
        const NodeId param = finish(NodeKind::Param, pstart, name, {*type});
        expect(":");
        const NodeId iterable = parse_expression();
        expect(")");
        const NodeId body = parse_block_statement();
        return finish(NodeKind::ForEach, start, kNoToken, {param, iterable, body});
      }
    }
    NodeId init = kNoNode;
    if (!at(";")) {
      const std::size_t istart = cur_start();
      std::vector<NodeId> parts;
      if (auto type = try_decl_head({"=", ";", ",", "["})) {
        parts.push_back(parse_local_var_decl(istart, *type, false));
      } else {
        do {
          parts.push_back(parse_expression());
        } while (accept(","));
      }
      init = finish(NodeKind::ForInit, istart, kNoToken, std::move(parts));
    }
    expect(";");
    NodeId cond = kNoNode;
    if (!at(";")) cond = parse_expression();
    expect(";");
    NodeId update = kNoNode;
    if (!at(")")) {
      const std::size_t ustart = cur_start();
      std::vector<NodeId> parts;
      do {
        parts.push_back(parse_expression());
      } while (accept(","));
      update = finish(NodeKind::ForUpdate, ustart, kNoToken, std::move(parts));
    }
    expect(")");
    const NodeId body = parse_block_statement();
    return finish(NodeKind::For, start, kNoToken, {init, cond, update, body});
  }

  NodeId parse_try() {
    const std::size_t start = cur_start();
    expect("try");
    NodeId resources = kNoNode;
    if (at("(")) {
      const std::size_t rstart = cur_start();
      advance();
      std::vector<NodeId> items;
      while (!at(")")) {
        const std::size_t istart = cur_start();
        if (auto type = try_decl_head({"="})) {
          const std::size_t name = advance();
          expect("=");
          const NodeId init = parse_expression();
          const NodeId decl =
              make(NodeKind::Declarator, toks()[name].span.start, prev_end_, name, {init});
          items.push_back(finish(NodeKind::LocalVarDecl, istart, kNoToken, {*type, decl}));
        } else {
          items.push_back(parse_expression());
        }
        if (!accept(";")) break;
      }
      expect(")");
      resources = finish(NodeKind::Resources, rstart, kNoToken, std::move(items));
    }
    std::vector<NodeId> parts{resources, parse_block()};
    while (at("catch")) {
      const std::size_t cstart = cur_start();
      advance();
      expect("(");
      const std::size_t pstart = cur_start();
      parse_modifiers();
      const std::size_t tstart = cur_start();
      parse_type();
      while (accept("|")) parse_type();
      const NodeId type = finish(NodeKind::Type, tstart);
      const std::size_t name = expect_ident();
      const NodeId param = finish(NodeKind::Param, pstart, name, {type});
      expect(")");
      const NodeId body = parse_block();
      parts.push_back(finish(NodeKind::Catch, cstart, kNoToken, {param, body}));
    }
    NodeId fin = kNoNode;
    if (accept("finally")) fin = parse_block();
    if (parts.size() == 2 && fin == kNoNode && resources == kNoNode)
      fail("try without catch or finally");
    parts.push_back(fin);
    return finish(NodeKind::Try, start, kNoToken, std::move(parts));
  }

  NodeId parse_case_label() {
    const std::size_t start = cur_start();
    if (at("default")) {
      advance();
      return finish(NodeKind::Literal, start);
    }
    // Type pattern: `case Foo f ->`
    {
      const State s = save();
      try {
        parse_modifiers();
        const NodeId type = parse_type();
        if (at_ident()) {
          const std::size_t name = advance();
          if (at("->") || at(":") || at(",") || at("when")) {
            return finish(NodeKind::Binding, start, name, {type});
          }
        }
      } catch (const SyntaxError&) {
      }
      restore(s);
    }
    return parse_ternary();
  }

  NodeId parse_switch(NodeKind k) {
    const std::size_t start = cur_start();
    expect("switch");
    const NodeId selector = parse_par_expression();
    expect("{");
    std::vector<NodeId> parts{selector};
    while (!at("}")) {
      if (eof()) fail("unterminated switch");
      const std::size_t cstart = cur_start();
      std::vector<NodeId> labels;
      if (accept("default")) {
      } else {
        expect("case");
        do {
          labels.push_back(parse_case_label());
        } while (accept(","));
        if (accept("when")) labels.push_back(parse_expression());
      }
      const NodeId label_node = finish(NodeKind::CaseLabels, cstart, kNoToken, std::move(labels));
      std::vector<NodeId> body{label_node};
      if (accept("->")) {
        if (at("{")) {
          body.push_back(parse_block());
        } else if (at("throw")) {
          body.push_back(parse_block_statement());
        } else {
          const std::size_t estart = cur_start();
          const NodeId e = parse_expression();
          expect(";");
          body.push_back(finish(NodeKind::ExpressionStmt, estart, kNoToken, {e}));
        }
      } else {
        expect(":");
        while (!at("case") && !at("default") && !at("}")) {
          if (eof()) fail("unterminated switch");
          body.push_back(parse_block_statement());
        }
        // `default` may also open a statement such as `default -> ...`; both
        // forms are handled by the loop header.
      }
      parts.push_back(finish(NodeKind::SwitchCase, cstart, kNoToken, std::move(body)));
    }
    expect("}");
    return finish(k, start, kNoToken, std::move(parts));
  }

  // ------------------------------------------------------------- expressions

  bool at_lambda() const {
    if (at_ident() && la(1) == "->") return true;
    if (!at("(")) return false;
    int depth = 0;
    for (std::size_t i = pos_; i < toks().size(); ++i) {
      const auto t = toks()[i].text;
      if (t == "(") ++depth;
      if (t == ")" && --depth == 0) {
        return i + 1 < toks().size() && toks()[i + 1].text == "->";
      }
      if (t == ";" || t == "{" || t == "}") return false;
    }
    return false;
  }

  NodeId parse_lambda() {
    const std::size_t start = cur_start();
    NodeId params;
    if (at_ident()) {
      const std::size_t name = advance();
      const NodeId p = make(NodeKind::Param, toks()[name].span.start, prev_end_, name,
                            {kNoNode});
      params = make(NodeKind::Params, toks()[name].span.start, prev_end_, kNoToken, {p});
    } else {
      const std::size_t pstart = cur_start();
      expect("(");
      std::vector<NodeId> list;
      if (!at(")")) {
        if (at_ident() && (la(1) == "," || la(1) == ")")) {
          do {
            const std::size_t name = expect_ident();
            list.push_back(make(NodeKind::Param, toks()[name].span.start, prev_end_, name,
                                {kNoNode}));
          } while (accept(","));
        } else {
          do {
            list.push_back(parse_param());
          } while (accept(","));
        }
      }
      expect(")");
      params = finish(NodeKind::Params, pstart, kNoToken, std::move(list));
    }
    expect("->");
    const NodeId body = at("{") ? parse_block() : parse_expression();
    return finish(NodeKind::Lambda, start, kNoToken, {params, body});
  }

  NodeId parse_expression() {
    if (at_lambda()) return parse_lambda();
    const std::size_t start = cur_start();
    const NodeId lhs = parse_ternary();
    if (!eof() && kind() == TokenKind::Operator && one_of(la(), kAssignOps)) {
      const std::size_t op = advance();
      const NodeId rhs = parse_expression();
      return finish(NodeKind::Assign, start, op, {lhs, rhs});
    }
    return lhs;
  }

  NodeId parse_ternary() {
    const std::size_t start = cur_start();
    const NodeId cond = parse_binary(1);
    if (!accept("?")) return cond;
    const NodeId then = parse_expression();
    expect(":");
    const NodeId otherwise = at_lambda() ? parse_lambda() : parse_ternary();
    return finish(NodeKind::Conditional, start, kNoToken, {cond, then, otherwise});
  }

  NodeId parse_binary(int min_prec) {
    const std::size_t start = cur_start();
    NodeId lhs = parse_unary();
    while (!eof()) {
      if (at("instanceof")) {
        if (kInstanceofPrecedence < min_prec) break;
        advance();
        accept("final");
        const std::size_t tstart = cur_start();
        const NodeId type = parse_type();
        NodeId target = type;
        if (at_ident()) {
          const std::size_t name = advance();
          target = finish(NodeKind::Binding, tstart, name, {type});
        } else if (at("(")) {
          skip_balanced("(", ")");  // record deconstruction pattern
        }
        lhs = finish(NodeKind::InstanceOf, start, kNoToken, {lhs, target});
        continue;
      }
      if (kind() != TokenKind::Operator) break;
      const int prec = binary_precedence(la());
      if (prec == 0 || prec < min_prec) break;
      const std::size_t op = advance();
      const NodeId rhs = parse_binary(prec + 1);
      lhs = finish(NodeKind::Binary, start, op, {lhs, rhs});
    }
    return lhs;
  }

  bool can_follow_cast(bool primitive) const {
    if (eof()) return false;
    const auto k = kind();
    const auto t = la();
    if (k == TokenKind::Identifier || k == TokenKind::Literal) return true;
    if (t == "(" || t == "!" || t == "~") return true;
    if (k == TokenKind::Keyword &&
        (t == "this" || t == "super" || t == "new" || t == "switch" ||
         one_of(t, kPrimitiveTypes)))
      return true;
    if (primitive && (t == "+" || t == "-" || t == "++" || t == "--")) return true;
    return false;
  }

  std::optional<NodeId> try_cast() {
    const State s = save();
    const std::size_t start = cur_start();
    try {
      advance();  // (
      const bool primitive = kind() == TokenKind::Keyword && one_of(la(), kPrimitiveTypes);
      NodeId type = parse_type();
      bool intersection = false;
      while (accept("&")) {
        parse_type();
        intersection = true;
      }
      expect(")");
      const bool primitive_only = primitive && tree_.nodes_[static_cast<std::size_t>(type)]
                                                       .span.slice(*tree_.code_)
                                                       .find('[') == std::string_view::npos;
      if (intersection || can_follow_cast(primitive_only)) {
        const NodeId operand = at_lambda() ? parse_lambda() : parse_unary();
        return finish(NodeKind::Cast, start, kNoToken, {type, operand});
      }
    } catch (const SyntaxError&) {
    }
    restore(s);
    return std::nullopt;
  }

  NodeId parse_unary() {
    const std::size_t start = cur_start();
    const auto t = la();
    if (kind() == TokenKind::Operator &&
        (t == "++" || t == "--" || t == "+" || t == "-" || t == "!" || t == "~")) {
      const std::size_t op = advance();
      const NodeId operand = parse_unary();
      return finish(NodeKind::Unary, start, op, {operand});
    }
    if (at("(")) {
      if (auto cast = try_cast()) return *cast;
    }
    return parse_postfix(parse_primary());
  }

  std::vector<NodeId> parse_arguments() {
    expect("(");
    std::vector<NodeId> args;
    if (!at(")")) {
      do {
        args.push_back(parse_expression());
      } while (accept(","));
    }
    expect(")");
    return args;
  }

  NodeId parse_creator(NodeId outer, std::size_t start) {
    expect("new");
    if (at("<")) parse_type_args();
    const NodeId type = parse_type();
    const bool has_dims = text_of(type).find('[') != std::string_view::npos;
    if (at("[") || has_dims) {
      std::vector<NodeId> parts{type};
      while (at("[") && la(1) != "]") {
        advance();
        parts.push_back(parse_expression());
        expect("]");
      }
      parse_dims();
      if (at("{")) parts.push_back(parse_array_init());
      return finish(NodeKind::NewArray, start, kNoToken, std::move(parts));
    }
    std::vector<NodeId> parts{outer, type};
    for (NodeId a : parse_arguments()) parts.push_back(a);
    if (at("{")) parts.push_back(parse_class_body());
    return finish(NodeKind::New, start, kNoToken, std::move(parts));
  }

  std::string_view text_of(NodeId id) const {
    return tree_.nodes_[static_cast<std::size_t>(id)].span.slice(*tree_.code_);
  }

  NodeId parse_primary() {
    const std::size_t start = cur_start();
    if (eof()) fail("expected expression");
    const auto t = la();
    const auto k = kind();
    if (k == TokenKind::Literal) {
      const std::size_t tok = advance();
      return finish(NodeKind::Literal, start, tok);
    }
    if (t == "this") {
      const std::size_t tok = advance();
      if (at("(")) {
        auto args = parse_arguments();
        args.insert(args.begin(), kNoNode);
        return finish(NodeKind::MethodCall, start, tok, std::move(args));
      }
      return finish(NodeKind::This, start, tok);
    }
    if (t == "super") {
      const std::size_t tok = advance();
      if (at("(")) {
        auto args = parse_arguments();
        args.insert(args.begin(), kNoNode);
        return finish(NodeKind::MethodCall, start, tok, std::move(args));
      }
      return finish(NodeKind::Super, start, tok);
    }
    if (t == "new") return parse_creator(kNoNode, start);
    if (t == "(") {
      advance();
      const NodeId inner = parse_expression();
      expect(")");
      return finish(NodeKind::Paren, start, kNoToken, {inner});
    }
    if (t == "switch") return parse_switch(NodeKind::SwitchExpr);
    if (k == TokenKind::Keyword && one_of(t, kPrimitiveTypes)) {
      const NodeId type = parse_type();
      if (accept("::")) {
        const std::size_t name = at("new") ? advance() : expect_ident();
        return finish(NodeKind::MethodRef, start, name, {type});
      }
      expect(".");
      expect("class");
      return finish(NodeKind::ClassLiteral, start, kNoToken, {type});
    }
    if (k == TokenKind::Identifier) {
      const std::size_t tok = advance();
      if (at("(")) {
        auto args = parse_arguments();
        args.insert(args.begin(), kNoNode);
        return finish(NodeKind::MethodCall, start, tok, std::move(args));
      }
      return finish(NodeKind::Name, start, tok);
    }
    fail("expected expression");
  }

  NodeId parse_postfix(NodeId e) {
    const std::size_t start = tree_.nodes_[static_cast<std::size_t>(e)].span.start;
    while (!eof()) {
      if (at(".")) {
        advance();
        if (at("new")) {
          e = parse_creator(e, start);
          continue;
        }
        if (at("class")) {
          advance();
          e = finish(NodeKind::ClassLiteral, start, kNoToken, {e});
          continue;
        }
        if (at("this")) {
          const std::size_t tok = advance();
          e = finish(NodeKind::This, start, tok, {e});
          continue;
        }
        if (at("super")) {
          const std::size_t tok = advance();
          if (at("(")) {
            auto args = parse_arguments();
            args.insert(args.begin(), e);
            e = finish(NodeKind::MethodCall, start, tok, std::move(args));
          } else {
            e = finish(NodeKind::Super, start, tok, {e});
          }
          continue;
        }
        if (at("<")) parse_type_args();
        const std::size_t name = expect_ident();
        if (at("(")) {
          auto args = parse_arguments();
          args.insert(args.begin(), e);
          e = finish(NodeKind::MethodCall, start, name, std::move(args));
        } else {
          e = finish(NodeKind::FieldAccess, start, name, {e});
        }
        continue;
      }
      if (at("[")) {
        if (la(1) == "]") {
          parse_dims();
          if (accept("::")) {
            const std::size_t name = at("new") ? advance() : expect_ident();
            e = finish(NodeKind::MethodRef, start, name, {e});
          } else {
            expect(".");
            expect("class");
            e = finish(NodeKind::ClassLiteral, start, kNoToken, {e});
          }
          continue;
        }
        advance();
        const NodeId index = parse_expression();
        expect("]");
        e = finish(NodeKind::ArrayAccess, start, kNoToken, {e, index});
        continue;
      }
      if (at("::")) {
        advance();
        if (at("<")) parse_type_args();
        const std::size_t name = at("new") ? advance() : expect_ident();
        e = finish(NodeKind::MethodRef, start, name, {e});
        continue;
      }
      if (at("++") || at("--")) {
        const std::size_t op = advance();
        e = finish(NodeKind::Postfix, start, op, {e});
        continue;
      }
      // Generic type in a method reference: `List<String>::new`.
      if (at("<") && (tree_.nodes_[static_cast<std::size_t>(e)].kind == NodeKind::Name ||
                      tree_.nodes_[static_cast<std::size_t>(e)].kind == NodeKind::FieldAccess)) {
        const State s = save();
        try {
          parse_type_args();
          parse_dims();
          if (at("::")) continue;
        } catch (const SyntaxError&) {
        }
        restore(s);
      }
      break;
    }
    return e;
  }
};

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Unit: return "Unit";
    case NodeKind::ClassDecl: return "ClassDecl";
    case NodeKind::ClassBody: return "ClassBody";
    case NodeKind::FieldDecl: return "FieldDecl";
    case NodeKind::MethodDecl: return "MethodDecl";
    case NodeKind::Initializer: return "Initializer";
    case NodeKind::EnumConstant: return "EnumConstant";
    case NodeKind::Params: return "Params";
    case NodeKind::Param: return "Param";
    case NodeKind::Declarator: return "Declarator";
    case NodeKind::Type: return "Type";
    case NodeKind::Block: return "Block";
    case NodeKind::LocalVarDecl: return "LocalVarDecl";
    case NodeKind::LocalClassDecl: return "LocalClassDecl";
    case NodeKind::If: return "If";
    case NodeKind::While: return "While";
    case NodeKind::DoWhile: return "DoWhile";
    case NodeKind::For: return "For";
    case NodeKind::ForInit: return "ForInit";
    case NodeKind::ForUpdate: return "ForUpdate";
    case NodeKind::ForEach: return "ForEach";
    case NodeKind::Try: return "Try";
    case NodeKind::Resources: return "Resources";
    case NodeKind::Catch: return "Catch";
    case NodeKind::Switch: return "Switch";
    case NodeKind::SwitchCase: return "SwitchCase";
    case NodeKind::CaseLabels: return "CaseLabels";
    case NodeKind::Return: return "Return";
    case NodeKind::Throw: return "Throw";
    case NodeKind::Break: return "Break";
    case NodeKind::Continue: return "Continue";
    case NodeKind::Synchronized: return "Synchronized";
    case NodeKind::Labeled: return "Labeled";
    case NodeKind::Yield: return "Yield";
    case NodeKind::Assert: return "Assert";
    case NodeKind::ExpressionStmt: return "ExpressionStmt";
    case NodeKind::Empty: return "Empty";
    case NodeKind::Name: return "Name";
    case NodeKind::Literal: return "Literal";
    case NodeKind::This: return "This";
    case NodeKind::Super: return "Super";
    case NodeKind::FieldAccess: return "FieldAccess";
    case NodeKind::MethodCall: return "MethodCall";
    case NodeKind::New: return "New";
    case NodeKind::NewArray: return "NewArray";
    case NodeKind::ArrayInit: return "ArrayInit";
    case NodeKind::ArrayAccess: return "ArrayAccess";
    case NodeKind::Unary: return "Unary";
    case NodeKind::Postfix: return "Postfix";
    case NodeKind::Binary: return "Binary";
    case NodeKind::InstanceOf: return "InstanceOf";
    case NodeKind::Binding: return "Binding";
    case NodeKind::Conditional: return "Conditional";
    case NodeKind::Assign: return "Assign";
    case NodeKind::Cast: return "Cast";
    case NodeKind::Lambda: return "Lambda";
    case NodeKind::MethodRef: return "MethodRef";
    case NodeKind::ClassLiteral: return "ClassLiteral";
    case NodeKind::Paren: return "Paren";
    case NodeKind::SwitchExpr: return "SwitchExpr";
  }
  return "?";
}

bool is_statement(NodeKind kind) {
  switch (kind) {
    case NodeKind::Block:
    case NodeKind::LocalVarDecl:
    case NodeKind::LocalClassDecl:
    case NodeKind::If:
    case NodeKind::While:
    case NodeKind::DoWhile:
    case NodeKind::For:
    case NodeKind::ForEach:
    case NodeKind::Try:
    case NodeKind::Switch:
    case NodeKind::Return:
    case NodeKind::Throw:
    case NodeKind::Break:
    case NodeKind::Continue:
    case NodeKind::Synchronized:
    case NodeKind::Labeled:
    case NodeKind::Yield:
    case NodeKind::Assert:
    case NodeKind::ExpressionStmt:
    case NodeKind::Empty:
      return true;
    default:
      return false;
  }
}

void SyntaxTree::visit(NodeId from, const std::function<void(NodeId)>& fn) const {
  if (from == kNoNode) return;
  std::vector<NodeId> stack{from};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    fn(id);
    const auto& children = node(id).children;
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      if (*it != kNoNode) stack.push_back(*it);
    }
  }
}

NodeId SyntaxTree::unparen(NodeId id) const {
  while (id != kNoNode && node(id).kind == NodeKind::Paren) id = node(id).children.front();
  return id;
}

SyntaxTree parse(std::string_view code) { return Parser(code).run(); }

}  // namespace metaprobe
