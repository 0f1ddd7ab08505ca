#include "metaprobe/common.hpp"

namespace metaprobe {

std::string splice(std::string_view text, ByteSpan span, std::string_view replacement) {
  if (!span.fits(text)) throw SpanMismatch("span out of range");
  std::string out;
  out.reserve(text.size() - span.size() + replacement.size());
  out.append(text.substr(0, span.start));
  out.append(replacement);
  out.append(text.substr(span.end));
  return out;
}

}  // namespace metaprobe
