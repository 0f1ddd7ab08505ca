#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "metaprobe/common.hpp"

namespace metaprobe {

struct Edit {
  ByteSpan span;
  std::string text;
};

/// Non-overlapping replacements applied in one pass, with position mapping
/// from the old text to the new one.
class EditSet {
 public:
  explicit EditSet(std::vector<Edit> edits) : edits_(std::move(edits)) {
    std::sort(edits_.begin(), edits_.end(),
              [](const Edit& a, const Edit& b) { return a.span.start < b.span.start; });
  }

  std::string apply(std::string_view text) const {
    std::string out;
    std::size_t cursor = 0;
    for (const auto& e : edits_) {
      out.append(text.substr(cursor, e.span.start - cursor));
      out.append(e.text);
      cursor = e.span.end;
    }
    out.append(text.substr(cursor));
    return out;
  }

  std::size_t map(std::size_t pos) const {
    std::ptrdiff_t delta = 0;
    for (const auto& e : edits_) {
      if (e.span.end <= pos) {
        delta += static_cast<std::ptrdiff_t>(e.text.size()) -
                 static_cast<std::ptrdiff_t>(e.span.size());
      }
    }
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(pos) + delta);
  }

  ByteSpan map(ByteSpan span) const { return {map(span.start), map(span.end)}; }

  /// New location of the replacement text for the edit that covered `old`.
  ByteSpan replaced(ByteSpan old) const {
    for (const auto& e : edits_) {
      if (e.span == old) {
        const std::size_t start = map(e.span.start);
        return {start, start + e.text.size()};
      }
    }
    return map(old);
  }

 private:
  std::vector<Edit> edits_;
};

}  // namespace metaprobe
