#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metaprobe/transforms.hpp"

namespace metaprobe {

inline constexpr std::string_view kDefaultPlaceholder = "<MASK>";

/// Token budget around the mask. Both sides absent means the whole program;
/// otherwise an absent side keeps no tokens.
struct WindowSpec {
  std::optional<std::size_t> before;
  std::optional<std::size_t> after;

  bool complete() const { return !before && !after; }
  friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// "complete", "+k", "±k" (also accepts "+-k"). Throws ConfigError.
WindowSpec parse_window(std::string_view text);
std::string to_string(const WindowSpec& spec);

/// The seven windows studied: ±10, +10, ±30, +30, ±50, +50, complete.
std::vector<WindowSpec> standard_windows();

enum class Variant { Original, Transformed };

std::string_view to_string(Variant v);

struct ProbeInstance {
  std::string probe_id;
  std::string pair_id;
  Variant variant = Variant::Original;
  std::string masked_code;
  ComparisonOp ground_truth = ComparisonOp::EQ;
  WindowSpec window;
  TransformKind transform = TransformKind::BlockSwap;
  bool renamed = false;
  bool refactored = false;
};

class PlaceholderCollision : public Error {
 public:
  using Error::Error;
};

/// Replaces the operator at `span` with `placeholder`. Throws SpanMismatch
/// unless the span reads a comparison operator, and PlaceholderCollision if
/// the placeholder already occurs in `code`.
std::string mask_operator(std::string_view code, ByteSpan span,
                          std::string_view placeholder = kDefaultPlaceholder);

/// Keeps the tokens selected by `spec` around token `mask_token_index` of
/// lex(code) (placeholder lexed as one token), with their original spacing.
std::string apply_window(std::string_view code, std::size_t mask_token_index,
                         const WindowSpec& spec,
                         std::string_view placeholder = kDefaultPlaceholder);

/// Index of the placeholder in lex(code). Throws SpanMismatch when absent or
/// repeated.
std::size_t find_mask_token(std::string_view code,
                            std::string_view placeholder = kDefaultPlaceholder);

/// Two instances (original, transformed) per pair and spec, ordered by
/// (pair_id, spec position, variant).
std::vector<ProbeInstance> build_probe_set(const std::vector<TransformedPair>& pairs,
                                           const std::vector<WindowSpec>& specs,
                                           std::string_view placeholder = kDefaultPlaceholder);

/// Splices `op` back over the placeholder.
std::string unmask(std::string_view masked_code, ComparisonOp op,
                   std::string_view placeholder = kDefaultPlaceholder);

}  // namespace metaprobe
