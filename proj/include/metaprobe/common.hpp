#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace metaprobe {

/// Half-open byte interval [start, end) over UTF-8 source text.
struct ByteSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool empty() const { return end == start; }
  bool contains(const ByteSpan& other) const {
    return start <= other.start && other.end <= end;
  }
  bool overlaps(const ByteSpan& other) const {
    return start < other.end && other.start < end;
  }
  std::string_view slice(std::string_view text) const {
    return text.substr(start, end - start);
  }
  bool fits(std::string_view text) const {
    return start <= end && end <= text.size();
  }

  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error("syntax error at byte " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A site's recorded spans no longer describe the code it is applied to.
class SpanMismatch : public Error {
 public:
  using Error::Error;
};

class IneligibleSite : public Error {
 public:
  using Error::Error;
};

class ShadowingUnsupported : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperand : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class BadPrior : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class TooFewPairs : public Error {
 public:
  using Error::Error;
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class EmptyCorpus : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Replaces `span` of `text` with `replacement`.
std::string splice(std::string_view text, ByteSpan span,
                   std::string_view replacement);

}  // namespace metaprobe
