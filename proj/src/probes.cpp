#include "metaprobe/probes.hpp"

#include <algorithm>
#include <charconv>

#include "metaprobe/lexer.hpp"

namespace metaprobe {

namespace {

std::size_t parse_count(std::string_view digits, std::string_view whole) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value == 0)
    throw ConfigError("bad window '" + std::string(whole) + "'");
  return value;
}

}  // namespace

WindowSpec parse_window(std::string_view text) {
  if (text == "complete") return {};
  for (std::string_view prefix : {"±", "+-", "pm"}) {
    if (text.substr(0, prefix.size()) == prefix) {
      const auto k = parse_count(text.substr(prefix.size()), text);
      return {k, k};
    }
  }
  if (!text.empty() && text[0] == '+') return {std::nullopt, parse_count(text.substr(1), text)};
  throw ConfigError("bad window '" + std::string(text) + "'");
}

std::string to_string(const WindowSpec& spec) {
  if (spec.complete()) return "complete";
  if (spec.before && spec.after && *spec.before == *spec.after)
    return "±" + std::to_string(*spec.after);
  if (!spec.before) return "+" + std::to_string(*spec.after);
  // Asymmetric windows are not produced by parse_window but stay printable.
  return "-" + std::to_string(*spec.before) + "+" + std::to_string(spec.after.value_or(0));
}

std::vector<WindowSpec> standard_windows() {
  std::vector<WindowSpec> out;
  for (std::size_t k : {10, 30, 50}) {
    out.push_back({k, k});
    out.push_back({std::nullopt, k});
  }
  out.push_back({});
  return out;
}

std::string_view to_string(Variant v) {
  return v == Variant::Original ? "original" : "transformed";
}

std::string mask_operator(std::string_view code, ByteSpan span, std::string_view placeholder) {
  if (!span.fits(code) || !parse_op(span.slice(code)))
    throw SpanMismatch("mask span does not cover a comparison operator");
  if (placeholder.empty() || code.find(placeholder) != std::string_view::npos)
    throw PlaceholderCollision("placeholder '" + std::string(placeholder) +
                               "' already occurs in the code");
  return splice(code, span, placeholder);
}

std::size_t find_mask_token(std::string_view code, std::string_view placeholder) {
  const auto tokens = lex(code, {placeholder});
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].text != placeholder) continue;
    if (found) throw SpanMismatch("placeholder occurs more than once");
    found = i;
  }
  if (!found) throw SpanMismatch("placeholder not found");
  return *found;
}

std::string apply_window(std::string_view code, std::size_t mask_token_index,
                         const WindowSpec& spec, std::string_view placeholder) {
  if (spec.complete()) return std::string(code);
  const auto tokens = lex(code, {placeholder});
  if (mask_token_index >= tokens.size()) throw SpanMismatch("mask token index out of range");
  const std::size_t before = spec.before.value_or(0);
  const std::size_t after = spec.after.value_or(0);
  const std::size_t lo = mask_token_index - std::min(before, mask_token_index);
  const std::size_t hi = std::min(tokens.size() - 1, mask_token_index + after);
  return std::string(code.substr(tokens[lo].span.start, tokens[hi].span.end - tokens[lo].span.start));
}

std::string unmask(std::string_view masked_code, ComparisonOp op, std::string_view placeholder) {
  const auto at = masked_code.find(placeholder);
  if (at == std::string_view::npos) throw SpanMismatch("placeholder not found");
  return splice(masked_code, {at, at + placeholder.size()}, surface(op));
}

std::vector<ProbeInstance> build_probe_set(const std::vector<TransformedPair>& pairs,
                                           const std::vector<WindowSpec>& specs,
                                           std::string_view placeholder) {
  std::vector<const TransformedPair*> ordered;
  ordered.reserve(pairs.size());
  for (const auto& p : pairs) ordered.push_back(&p);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->pair_id < b->pair_id; });

  std::vector<ProbeInstance> out;
  out.reserve(pairs.size() * specs.size() * 2);
  for (const auto* pair : ordered) {
    const std::string masked[2] = {
        mask_operator(pair->original_code, pair->original_mask_span, placeholder),
        mask_operator(pair->transformed_code, pair->transformed_mask_span, placeholder)};
    const std::size_t index[2] = {find_mask_token(masked[0], placeholder),
                                  find_mask_token(masked[1], placeholder)};
    for (const auto& spec : specs) {
      for (int v = 0; v < 2; ++v) {
        ProbeInstance p;
        p.variant = v == 0 ? Variant::Original : Variant::Transformed;
        p.pair_id = pair->pair_id;
        p.probe_id = pair->pair_id + ":" + to_string(spec) + ":" + std::string(to_string(p.variant));
        p.masked_code = apply_window(masked[v], index[v], spec, placeholder);
        p.ground_truth = v == 0 ? pair->original_op : pair->transformed_op;
        p.window = spec;
        p.transform = pair->transform;
        p.renamed = pair->renamed;
        p.refactored = pair->refactored;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

}  // namespace metaprobe
