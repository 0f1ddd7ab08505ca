#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "metaprobe/common.hpp"

namespace metaprobe {

enum class TokenKind {
  Identifier,
  Keyword,
  Literal,
  Operator,
  Punctuation,
  Comment,
  Other,
};

std::string_view to_string(TokenKind kind);

struct Token {
  std::string_view text;  // view into the lexed source
  TokenKind kind = TokenKind::Other;
  ByteSpan span;
};

struct LexOptions {
  /// When non-empty, every occurrence of this literal is emitted as a single
  /// token of kind Other (used for mask placeholders).
  std::string_view placeholder;
};

/// Splits Java source into tokens. Never fails: bytes that do not start a
/// known token become single tokens of kind Other. Whitespace is not a token.
std::vector<Token> lex(std::string_view code, const LexOptions& options = {});

bool is_java_keyword(std::string_view word);

}  // namespace metaprobe
