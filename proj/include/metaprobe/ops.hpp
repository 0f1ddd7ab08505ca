#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace metaprobe {

/// The six Java comparison operators that can be masked.
enum class ComparisonOp { EQ, NE, LT, LE, GT, GE };

inline constexpr std::array<ComparisonOp, 6> kAllOps = {
    ComparisonOp::EQ, ComparisonOp::NE, ComparisonOp::LT,
    ComparisonOp::LE, ComparisonOp::GT, ComparisonOp::GE};

constexpr std::string_view surface(ComparisonOp op) {
  switch (op) {
    case ComparisonOp::EQ: return "==";
    case ComparisonOp::NE: return "!=";
    case ComparisonOp::LT: return "<";
    case ComparisonOp::LE: return "<=";
    case ComparisonOp::GT: return ">";
    case ComparisonOp::GE: return ">=";
  }
  return "";
}

constexpr std::optional<ComparisonOp> parse_op(std::string_view text) {
  for (auto op : kAllOps) {
    if (surface(op) == text) return op;
  }
  return std::nullopt;
}

/// Logical complement over a total order: the operator selecting the other
/// branch once then/else are exchanged.
constexpr ComparisonOp negate(ComparisonOp op) {
  switch (op) {
    case ComparisonOp::EQ: return ComparisonOp::NE;
    case ComparisonOp::NE: return ComparisonOp::EQ;
    case ComparisonOp::LT: return ComparisonOp::GE;
    case ComparisonOp::GE: return ComparisonOp::LT;
    case ComparisonOp::GT: return ComparisonOp::LE;
    case ComparisonOp::LE: return ComparisonOp::GT;
  }
  return op;
}

/// The operator that keeps the comparison true once its operands trade
/// places.
constexpr ComparisonOp mirror(ComparisonOp op) {
  switch (op) {
    case ComparisonOp::LT: return ComparisonOp::GT;
    case ComparisonOp::GT: return ComparisonOp::LT;
    case ComparisonOp::LE: return ComparisonOp::GE;
    case ComparisonOp::GE: return ComparisonOp::LE;
    case ComparisonOp::EQ:
    case ComparisonOp::NE: return op;
  }
  return op;
}

template <typename T>
constexpr bool compare(ComparisonOp op, const T& a, const T& b) {
  switch (op) {
    case ComparisonOp::EQ: return a == b;
    case ComparisonOp::NE: return a != b;
    case ComparisonOp::LT: return a < b;
    case ComparisonOp::LE: return a <= b;
    case ComparisonOp::GT: return a > b;
    case ComparisonOp::GE: return a >= b;
  }
  return false;
}

}  // namespace metaprobe
