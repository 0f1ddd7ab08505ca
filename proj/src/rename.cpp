#include <algorithm>
#include <map>
#include <set>

#include "edit_set.hpp"
#include "metaprobe/lexer.hpp"
#include "metaprobe/transforms.hpp"

namespace metaprobe {

namespace {

struct Binding {
  bool local = false;
};

struct Frame {
  bool class_boundary = false;
  std::map<std::string, Binding, std::less<>> names;
};

/// Scope-aware resolution of simple names to local declarations.
class LocalResolver {
 public:
  explicit LocalResolver(const SyntaxTree& tree) : tree_(tree) {}

  void run() {
    const NodeId root = tree_.root();
    push(false);
    declare_members(root);
    for (NodeId c : tree_.node(root).children) walk(c);
    pop();
  }

  /// Declaration tokens in first-declaration order (may repeat names).
  const std::vector<std::size_t>& declarations() const { return declarations_; }
  const std::vector<std::size_t>& references() const { return references_; }

 private:
  const SyntaxTree& tree_;
  std::vector<Frame> frames_;
  std::vector<std::size_t> declarations_;
  std::vector<std::size_t> references_;

  void push(bool boundary) { frames_.push_back({boundary, {}}); }
  void pop() { frames_.pop_back(); }

  std::string_view tok(std::size_t index) const { return tree_.tokens()[index].text; }

  /// Innermost binding of `name`, and whether a class boundary lies between
  /// the current position and that binding.
  std::pair<const Binding*, bool> lookup(std::string_view name) const {
    bool crossed = false;
    for (auto it = frames_.rbegin(); it != frames_.rend(); ++it) {
      if (auto f = it->names.find(name); f != it->names.end()) return {&f->second, crossed};
      if (it->class_boundary) crossed = true;
    }
    return {nullptr, false};
  }

  void check_shadowing(std::size_t token) const {
    const auto [binding, crossed] = lookup(tok(token));
    if (binding && binding->local && crossed) {
      throw ShadowingUnsupported("'" + std::string(tok(token)) +
                                 "' is redeclared inside a nested class body");
    }
  }

  void declare_local(std::size_t token) {
    if (token == kNoToken) return;
    check_shadowing(token);
    frames_.back().names[std::string(tok(token))] = Binding{true};
    declarations_.push_back(token);
  }

  void declare_member(std::size_t token) {
    if (token == kNoToken) return;
    check_shadowing(token);
    frames_.back().names[std::string(tok(token))] = Binding{false};
  }

  void declare_members(NodeId body) {
    for (NodeId m : tree_.node(body).children) {
      if (m == kNoNode) continue;
      const auto& n = tree_.node(m);
      if (n.kind == NodeKind::FieldDecl) {
        for (std::size_t i = 1; i < n.children.size(); ++i)
          declare_member(tree_.node(n.children[i]).token);
      } else if (n.kind == NodeKind::EnumConstant) {
        declare_member(n.token);
      }
    }
  }

  void walk_children(NodeId id) {
    for (NodeId c : tree_.node(id).children) walk(c);
  }

  void declare_params(NodeId params) {
    for (NodeId p : tree_.node(params).children) declare_local(tree_.node(p).token);
  }

  void walk(NodeId id) {
    if (id == kNoNode) return;
    const auto& n = tree_.node(id);
    switch (n.kind) {
      case NodeKind::Type:
        return;
      case NodeKind::Name: {
        const auto [binding, crossed] = lookup(tok(n.token));
        if (binding && binding->local) references_.push_back(n.token);
        return;
      }
      case NodeKind::ClassBody:
        push(true);
        declare_members(id);
        walk_children(id);
        pop();
        return;
      case NodeKind::MethodDecl:
        push(false);
        declare_params(n.children[0]);
        walk(n.children[1]);
        pop();
        return;
      case NodeKind::Lambda:
        push(false);
        declare_params(n.children[0]);
        walk(n.children[1]);
        pop();
        return;
      case NodeKind::Block:
      case NodeKind::For:
      case NodeKind::SwitchCase:
        push(false);
        walk_children(id);
        pop();
        return;
      case NodeKind::Switch:
      case NodeKind::SwitchExpr:
        walk(n.children[0]);
        push(false);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          // Colon-style groups share one scope; walk their statements inline.
          const NodeId c = n.children[i];
          for (NodeId part : tree_.node(c).children) walk(part);
        }
        pop();
        return;
      case NodeKind::CaseLabels:
        for (NodeId c : n.children) {
          if (c != kNoNode && tree_.node(c).kind != NodeKind::Name) walk(c);
        }
        return;
      case NodeKind::ForEach:
        walk(n.children[1]);
        push(false);
        declare_local(tree_.node(n.children[0]).token);
        walk(n.children[2]);
        pop();
        return;
      case NodeKind::Catch:
        push(false);
        declare_local(tree_.node(n.children[0]).token);
        walk(n.children[1]);
        pop();
        return;
      case NodeKind::Try: {
        push(false);
        walk(n.children[0]);
        walk(n.children[1]);
        pop();
        for (std::size_t i = 2; i < n.children.size(); ++i) walk(n.children[i]);
        return;
      }
      case NodeKind::LocalVarDecl:
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const auto& d = tree_.node(n.children[i]);
          declare_local(d.token);
          walk(d.children[0]);
        }
        return;
      case NodeKind::FieldDecl:
        for (std::size_t i = 1; i < n.children.size(); ++i)
          walk(tree_.node(n.children[i]).children[0]);
        return;
      case NodeKind::Binding:
        declare_local(n.token);
        return;
      case NodeKind::FieldAccess:
      case NodeKind::MethodRef:
      case NodeKind::ClassLiteral:
        walk(n.children.empty() ? kNoNode : n.children[0]);
        return;
      case NodeKind::New:
        walk(n.children[0]);
        for (std::size_t i = 2; i < n.children.size(); ++i) walk(n.children[i]);
        return;
      default:
        walk_children(id);
        return;
    }
  }
};

}  // namespace

RenameResult rename_locals(const SourceUnit& unit) {
  const SyntaxTree tree = parse(unit.code);
  LocalResolver resolver(tree);
  resolver.run();

  std::set<std::string, std::less<>> taken;
  for (const auto& t : lex(unit.code)) {
    if (t.kind == TokenKind::Identifier) taken.emplace(t.text);
  }

  RenameResult result;
  std::map<std::string, std::string, std::less<>> fresh;
  int counter = 0;
  for (std::size_t token : resolver.declarations()) {
    const std::string name(tree.tokens()[token].text);
    if (fresh.count(name)) continue;
    std::string candidate;
    do {
      candidate = "var" + std::to_string(++counter);
    } while (taken.count(candidate));
    fresh.emplace(name, candidate);
    result.map.emplace_back(name, candidate);
  }

  std::vector<Edit> edits;
  auto rename_token = [&](std::size_t token) {
    const auto& t = tree.tokens()[token];
    edits.push_back({t.span, fresh.find(t.text)->second});
  };
  for (std::size_t token : resolver.declarations()) rename_token(token);
  for (std::size_t token : resolver.references()) rename_token(token);
  std::sort(edits.begin(), edits.end(),
            [](const Edit& a, const Edit& b) { return a.span.start < b.span.start; });
  edits.erase(std::unique(edits.begin(), edits.end(),
                          [](const Edit& a, const Edit& b) { return a.span == b.span; }),
              edits.end());
  result.code = EditSet(std::move(edits)).apply(unit.code);
  return result;
}

}  // namespace metaprobe
