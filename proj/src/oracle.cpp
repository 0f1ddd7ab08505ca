#include "metaprobe/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <set>
#include <vector>

#include "metaprobe/random.hpp"

namespace metaprobe {

namespace {

std::string strip_spaces(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

struct Side {
  std::optional<double> literal;  // set for literal operands
  std::string key;                // variable name otherwise
};

/// The comparison at a mask span and the two pieces of code it selects between.
struct Control {
  Side left;
  Side right;
  ComparisonOp op = ComparisonOp::EQ;
  std::string when_true;
  std::string when_false;
};

Side make_side(const SyntaxTree& tree, NodeId expr) {
  const auto kind = classify_operand(tree, expr);
  if (kind == OperandKind::Call)
    throw UnsupportedOperand("operand '" + std::string(tree.text(expr)) + "' contains a call");
  Side side;
  if (kind == OperandKind::Literal) {
    side.literal = literal_value(strip_spaces(tree.text(expr)));
    if (!side.literal)
      throw UnsupportedOperand("literal '" + std::string(tree.text(expr)) + "' has no value");
  } else {
    side.key = strip_spaces(tree.text(expr));
  }
  return side;
}

std::string node_text(const SyntaxTree& tree, NodeId id) {
  return id == kNoNode ? std::string() : std::string(tree.text(id));
}

/// The if statement that tests the boolean declared by `declarator`.
NodeId if_testing_variable(const SyntaxTree& tree, NodeId declarator) {
  const auto name = tree.tokens()[tree.node(declarator).token].text;
  const NodeId decl = tree.node(declarator).parent;
  const NodeId block = decl == kNoNode ? kNoNode : tree.node(decl).parent;
  if (block == kNoNode) return kNoNode;
  const auto& siblings = tree.node(block).children;
  auto it = std::find(siblings.begin(), siblings.end(), decl);
  for (; it != siblings.end(); ++it) {
    const auto& s = tree.node(*it);
    if (s.kind != NodeKind::If) continue;
    const NodeId cond = tree.unparen(s.children[0]);
    if (tree.node(cond).kind == NodeKind::Name && tree.token_text(cond) == name) return *it;
  }
  return kNoNode;
}

Control locate(const SyntaxTree& tree, ByteSpan mask) {
  NodeId cmp = kNoNode;
  tree.visit([&](NodeId id) {
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::Binary && tree.tokens()[n.token].span == mask) cmp = id;
  });
  if (cmp == kNoNode) throw SpanMismatch("no comparison at mask span");
  const auto& c = tree.node(cmp);
  const auto op = parse_op(tree.tokens()[c.token].text);
  if (!op) throw SpanMismatch("mask span is not a comparison operator");

  Control control;
  control.op = *op;
  control.left = make_side(tree, c.children[0]);
  control.right = make_side(tree, c.children[1]);

  NodeId stmt = c.parent;
  if (stmt != kNoNode && tree.node(stmt).kind == NodeKind::Declarator)
    stmt = if_testing_variable(tree, stmt);
  if (stmt == kNoNode) throw SpanMismatch("comparison does not control a statement");
  const auto& s = tree.node(stmt);
  switch (s.kind) {
    case NodeKind::If:
      control.when_true = node_text(tree, s.children[1]);
      control.when_false = node_text(tree, s.children[2]);
      break;
    case NodeKind::While:
      control.when_true = node_text(tree, s.children[1]);
      control.when_false = "<exit>";
      break;
    case NodeKind::For:
      control.when_true = node_text(tree, s.children[3]);
      control.when_false = "<exit>";
      break;
    case NodeKind::DoWhile:
      control.when_true = "<repeat>";
      control.when_false = "<exit>";
      break;
    default:
      throw SpanMismatch("comparison does not control a statement");
  }
  return control;
}

double value_of(const Side& side, const Assignment& values) {
  return side.literal ? *side.literal : values.at(side.key);
}

const std::string& taken(const Control& c, const Assignment& values) {
  return compare(c.op, value_of(c.left, values), value_of(c.right, values)) ? c.when_true
                                                                            : c.when_false;
}

/// Mixed-strategy assignment generator: wide and small uniform values,
/// literal neighbours, all-equal ties and off-by-one pairs.
class Sampler {
 public:
  Sampler(std::vector<std::string> variables, std::vector<double> literals, std::uint64_t seed)
      : variables_(std::move(variables)), literals_(std::move(literals)), rng_(seed) {
    if (literals_.empty()) literals_.push_back(0.0);
  }

  Assignment draw(std::size_t trial) {
    Assignment a;
    switch (trial % 5) {
      case 0:
        for (const auto& v : variables_) a[v] = static_cast<double>(rng_.uniform_int(-1000000, 1000000));
        break;
      case 1:
        for (const auto& v : variables_) a[v] = static_cast<double>(rng_.uniform_int(-3, 3));
        break;
      case 2: {
        const double tie = pick_anchor();
        for (const auto& v : variables_) a[v] = tie;
        break;
      }
      case 3:
        for (const auto& v : variables_)
          a[v] = pick_literal() + static_cast<double>(rng_.uniform_int(-1, 1));
        break;
      default: {
        const double base = pick_anchor();
        for (const auto& v : variables_)
          a[v] = base + static_cast<double>(rng_.uniform_int(-1, 1));
        break;
      }
    }
    return a;
  }

 private:
  std::vector<std::string> variables_;
  std::vector<double> literals_;
  Rng rng_;

  double pick_literal() {
    return literals_[static_cast<std::size_t>(
        rng_.uniform_int(0, static_cast<std::int64_t>(literals_.size()) - 1))];
  }
  double pick_anchor() {
    return rng_.uniform_int(0, 1) ? pick_literal()
                                  : static_cast<double>(rng_.uniform_int(-100, 100));
  }
};

bool is_digit_in(char c, int radix) {
  const int lower = std::tolower(static_cast<unsigned char>(c));
  if (lower >= '0' && lower <= '9') return lower - '0' < radix;
  return radix == 16 && lower >= 'a' && lower <= 'f';
}

std::optional<double> integer_value(std::string digits, int radix) {
  if (digits.empty()) return std::nullopt;
  for (char c : digits) {
    if (!is_digit_in(c, radix)) return std::nullopt;
  }
  errno = 0;
  const unsigned long long v = std::strtoull(digits.c_str(), nullptr, radix);
  if (errno != 0) return std::nullopt;
  // Java int/long literals wrap into the signed range (0xFFFFFFFF == -1).
  return static_cast<double>(static_cast<long long>(v));
}

std::optional<double> char_value(std::string_view body) {
  if (body.empty()) return std::nullopt;
  if (body[0] != '\\') {
    // Decode one UTF-8 code point.
    const auto b0 = static_cast<unsigned char>(body[0]);
    if (b0 < 0x80) return b0;
    int extra = b0 >= 0xF0 ? 3 : b0 >= 0xE0 ? 2 : 1;
    std::uint32_t cp = b0 & (0x3F >> extra);
    for (int i = 1; i <= extra && i < static_cast<int>(body.size()); ++i)
      cp = (cp << 6) | (static_cast<unsigned char>(body[i]) & 0x3F);
    return cp;
  }
  if (body.size() < 2) return std::nullopt;
  switch (body[1]) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case 'b': return '\b';
    case 'f': return '\f';
    case 's': return ' ';
    case '0': case '1': case '2': case '3': case '4': case '5': case '6': case '7':
      return integer_value(std::string(body.substr(1)), 8);
    case 'u': {
      std::size_t i = 1;
      while (i < body.size() && body[i] == 'u') ++i;
      return integer_value(std::string(body.substr(i)), 16);
    }
    default: return static_cast<unsigned char>(body[1]);
  }
}

}  // namespace

std::optional<double> literal_value(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text == "true") return 1.0;
  if (text == "false" || text == "null") return 0.0;
  if (text[0] == '-' || text[0] == '+') {
    const auto inner = literal_value(text.substr(1));
    if (!inner) return std::nullopt;
    return text[0] == '-' ? -*inner : *inner;
  }
  if (text[0] == '"') {
    // Strings compare by identity here; a stable constant per text suffices.
    return static_cast<double>(fnv1a64(text) >> 33);
  }
  if (text[0] == '\'') {
    if (text.size() < 3 || text.back() != '\'') return std::nullopt;
    return char_value(text.substr(1, text.size() - 2));
  }
  std::string s;
  for (char c : text) {
    if (c != '_') s.push_back(c);
  }
  const bool hex = s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  const bool bin = s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B');
  const bool floating =
      !hex && (s.find_first_of(".eE") != std::string::npos ||
               s.back() == 'f' || s.back() == 'F' || s.back() == 'd' || s.back() == 'D');
  if (floating) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) return std::nullopt;
    return v;
  }
  if (s.back() == 'l' || s.back() == 'L') s.pop_back();
  if (hex) return integer_value(s.substr(2), 16);
  if (bin) return integer_value(s.substr(2), 2);
  if (s.size() > 1 && s[0] == '0') return integer_value(s.substr(1), 8);
  return integer_value(s, 10);
}

EquivalenceVerdict check_equivalence_sampled(const TransformedPair& pair, std::size_t trials,
                                             std::uint64_t seed) {
  const SyntaxTree original = parse(pair.original_code);
  const SyntaxTree transformed = parse(pair.transformed_code);
  const Control a = locate(original, pair.original_mask_span);
  const Control b = locate(transformed, pair.transformed_mask_span);

  std::set<std::string> variables;
  std::vector<double> literals;
  for (const Side* side : {&a.left, &a.right, &b.left, &b.right}) {
    if (side->literal) {
      literals.push_back(*side->literal);
    } else {
      variables.insert(side->key);
    }
  }
  std::sort(literals.begin(), literals.end());
  literals.erase(std::unique(literals.begin(), literals.end()), literals.end());

  Sampler sampler({variables.begin(), variables.end()}, std::move(literals), seed);
  EquivalenceVerdict verdict;
  verdict.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    Assignment values = sampler.draw(t);
    if (taken(a, values) == taken(b, values)) {
      ++verdict.agreements;
    } else if (!verdict.counterexample) {
      verdict.counterexample = std::move(values);
    }
  }
  return verdict;
}

}  // namespace metaprobe
