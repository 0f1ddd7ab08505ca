#include "metaprobe/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace metaprobe {

namespace {

constexpr std::array<std::string_view, 50> kKeywords = {
    "abstract",   "assert",    "boolean",   "break",      "byte",
    "case",       "catch",     "char",      "class",      "const",
    "continue",   "default",   "do",        "double",     "else",
    "enum",       "extends",   "final",     "finally",    "float",
    "for",        "goto",      "if",        "implements", "import",
    "instanceof", "int",       "interface", "long",       "native",
    "new",        "package",   "private",   "protected",  "public",
    "return",     "short",     "static",    "strictfp",   "super",
    "switch",     "synchronized", "this",   "throw",      "throws",
    "transient",  "try",       "void",      "volatile",   "while"};

// Longest first so that a linear scan finds the maximal munch.
constexpr std::array<std::string_view, 38> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&",
    "||",   "==",  "!=",  "<=",  ">=",  "+=", "-=", "*=", "/=", "&=",
    "|=",   "^=",  "%=",  "<<",  ">>",  "+",  "-",  "*",  "/",  "%",
    "=",    "<",   ">",   "!",   "~",   "?",  ":",  "&"};

constexpr std::string_view kSingleExtra = "|^";
constexpr std::string_view kPunctuation = "(){}[];,.@";

bool is_ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' ||
         c == '$' || c >= 0x80;
}

bool is_ident_part(unsigned char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::size_t scan_number(std::string_view s, std::size_t i) {
  const std::size_t n = s.size();
  if (s[i] == '0' && i + 1 < n && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
    i += 2;
    while (i < n && (std::isxdigit(static_cast<unsigned char>(s[i])) ||
                     s[i] == '_' || s[i] == '.'))
      ++i;
    if (i < n && (s[i] == 'p' || s[i] == 'P')) {
      ++i;
      if (i < n && (s[i] == '+' || s[i] == '-')) ++i;
      while (i < n && is_digit(s[i])) ++i;
    }
  } else if (s[i] == '0' && i + 1 < n && (s[i + 1] == 'b' || s[i + 1] == 'B')) {
    i += 2;
    while (i < n && (s[i] == '0' || s[i] == '1' || s[i] == '_')) ++i;
  } else {
    while (i < n && (is_digit(s[i]) || s[i] == '_')) ++i;
    if (i + 1 < n && s[i] == '.' && is_digit(s[i + 1])) {
      ++i;
      while (i < n && (is_digit(s[i]) || s[i] == '_')) ++i;
    } else if (i < n && s[i] == '.' &&
               !(i + 1 < n && (is_ident_start(s[i + 1]) || s[i + 1] == '.'))) {
      ++i;  // "1." is a double literal
    }
    if (i < n && (s[i] == 'e' || s[i] == 'E')) {
      std::size_t j = i + 1;
      if (j < n && (s[j] == '+' || s[j] == '-')) ++j;
      if (j < n && is_digit(s[j])) {
        i = j;
        while (i < n && (is_digit(s[i]) || s[i] == '_')) ++i;
      }
    }
  }
  if (i < n && std::string_view("lLfFdD").find(s[i]) != std::string_view::npos)
    ++i;
  return i;
}

std::size_t scan_quoted(std::string_view s, std::size_t i, char quote) {
  const std::size_t n = s.size();
  ++i;
  while (i < n && s[i] != quote && s[i] != '\n') {
    if (s[i] == '\\' && i + 1 < n) ++i;
    ++i;
  }
  return i < n && s[i] == quote ? i + 1 : i;
}

std::size_t scan_text_block(std::string_view s, std::size_t i) {
  i += 3;
  while (i < s.size()) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      i += 2;
      continue;
    }
    if (s.compare(i, 3, "\"\"\"") == 0) return i + 3;
    ++i;
  }
  return i;
}

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier: return "identifier";
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Literal: return "literal";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Comment: return "comment";
    case TokenKind::Other: return "other";
  }
  return "other";
}

bool is_java_keyword(std::string_view word) {
  return std::find(kKeywords.begin(), kKeywords.end(), word) != kKeywords.end();
}

std::vector<Token> lex(std::string_view code, const LexOptions& options) {
  std::vector<Token> tokens;
  const std::size_t n = code.size();
  std::size_t i = 0;
  auto emit = [&](std::size_t start, std::size_t end, TokenKind kind) {
    tokens.push_back({code.substr(start, end - start), kind, {start, end}});
  };

  while (i < n) {
    const char c = code[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (!options.placeholder.empty() &&
        code.compare(i, options.placeholder.size(), options.placeholder) == 0) {
      i += options.placeholder.size();
      emit(start, i, TokenKind::Other);
      continue;
    }
    if (c == '/' && i + 1 < n && code[i + 1] == '/') {
      while (i < n && code[i] != '\n') ++i;
      // a trailing '\r' belongs to the line break, not the comment
      std::size_t end = i;
      if (end > start && code[end - 1] == '\r') --end;
      emit(start, end, TokenKind::Comment);
      continue;
    }
    if (c == '/' && i + 1 < n && code[i + 1] == '*') {
      const auto close = code.find("*/", i + 2);
      i = close == std::string_view::npos ? n : close + 2;
      emit(start, i, TokenKind::Comment);
      continue;
    }
    if (is_ident_start(static_cast<unsigned char>(c))) {
      while (i < n && is_ident_part(static_cast<unsigned char>(code[i]))) ++i;
      const auto word = code.substr(start, i - start);
      TokenKind kind = TokenKind::Identifier;
      if (word == "true" || word == "false" || word == "null") {
        kind = TokenKind::Literal;
      } else if (is_java_keyword(word)) {
        kind = TokenKind::Keyword;
      }
      emit(start, i, kind);
      continue;
    }
    if (is_digit(c) || (c == '.' && i + 1 < n && is_digit(code[i + 1]))) {
      i = scan_number(code, i);
      emit(start, i, TokenKind::Literal);
      continue;
    }
    if (c == '"') {
      i = code.compare(i, 3, "\"\"\"") == 0 ? scan_text_block(code, i)
                                             : scan_quoted(code, i, '"');
      emit(start, i, TokenKind::Literal);
      continue;
    }
    if (c == '\'') {
      i = scan_quoted(code, i, '\'');
      emit(start, i, TokenKind::Literal);
      continue;
    }
    bool matched = false;
    for (auto op : kOperators) {
      if (code.compare(i, op.size(), op) == 0) {
        i += op.size();
        emit(start, i, op == "..." ? TokenKind::Punctuation
                                   : TokenKind::Operator);
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kSingleExtra.find(c) != std::string_view::npos) {
      emit(start, ++i, TokenKind::Operator);
      continue;
    }
    if (kPunctuation.find(c) != std::string_view::npos) {
      emit(start, ++i, TokenKind::Punctuation);
      continue;
    }
    i = std::min(n, i + utf8_length(static_cast<unsigned char>(c)));
    emit(start, i, TokenKind::Other);
  }
  return tokens;
}

}  // namespace metaprobe
