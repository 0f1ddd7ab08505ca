#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "metaprobe/oracle.hpp"
#include "metaprobe/random.hpp"

using namespace metaprobe;

namespace {

SourceUnit unit(std::string_view code) { return {"u", std::string(code), Split::Test}; }

TransformedPair block_pair(std::string_view code, bool equivalent = true) {
  const auto u = unit(code);
  const auto site = find_block_swap_sites(parse(code), "u").at(0);
  return equivalent ? block_swap(u, site) : non_equivalent_block_swap(u, site);
}

TransformedPair operand_pair(std::string_view code, std::size_t index = 0) {
  const auto u = unit(code);
  return operand_swap(u, find_operand_swap_sites(parse(code), "u").at(index));
}

}  // namespace

TEST(Oracle, IsEqualBlockSwapAgrees) {
  const auto v = check_equivalence_sampled(block_pair(fixtures::kIsEqual), 1000, 7);
  EXPECT_EQ(v.trials, 1000u);
  EXPECT_EQ(v.agreements, 1000u);
  EXPECT_FALSE(v.counterexample);
}

TEST(Oracle, WhileOperandSwapAgrees) {
  const auto v = check_equivalence_sampled(operand_pair(fixtures::kFindInsertionPoint), 1000, 7);
  EXPECT_EQ(v.agreements, 1000u);
}

TEST(Oracle, DistractorHasCounterexample) {
  const auto v = check_equivalence_sampled(block_pair(fixtures::kIsEqual, false), 1000, 7);
  EXPECT_LT(v.agreements, v.trials);
  ASSERT_TRUE(v.counterexample);
  const auto& a = *v.counterexample;
  EXPECT_EQ(a.size(), 2u);
  // The first disagreement is reported; any input disagrees for a two-branch swap.
  EXPECT_TRUE(a.count("a") && a.count("b"));
}

TEST(Oracle, DistractorNeedsBoundaryForInequalities) {
  // Without the distractor the comparisons agree everywhere; with it every
  // input disagrees, including ties that separate < from <=.
  const auto v = check_equivalence_sampled(
      block_pair("void m(int i, int n) { if (i <= n) { a(); } else { b(); } }", false), 200, 1);
  EXPECT_EQ(v.agreements, 0u);
}

TEST(Oracle, WrongOperatorCaughtOnTies) {
  // Mirroring <= into > instead of >= only differs when the operands are equal.
  auto pair = operand_pair("void m(int i, int n) { while (i <= n) { i++; } }");
  const auto at = pair.transformed_mask_span;
  ASSERT_EQ(at.slice(pair.transformed_code), ">=");
  pair.transformed_code.replace(at.start, at.size(), ">");
  pair.transformed_mask_span = {at.start, at.start + 1};
  const auto v = check_equivalence_sampled(pair, 1000, 3);
  ASSERT_TRUE(v.counterexample);
  EXPECT_EQ(v.counterexample->at("i"), v.counterexample->at("n"));
  EXPECT_LT(v.agreements, 1000u);
}

TEST(Oracle, OpaqueFieldOperands) {
  const auto v = check_equivalence_sampled(block_pair(fixtures::kIsReciprocalOf), 1000, 9);
  EXPECT_EQ(v.agreements, 1000u);
}

TEST(Oracle, CallOperandUnsupported) {
  const auto pair = operand_pair("void m() { if (f1(a) > 5) { } }");
  EXPECT_THROW(check_equivalence_sampled(pair, 10, 1), UnsupportedOperand);
}

TEST(Oracle, RefactoredPair) {
  const auto u = unit(fixtures::kIsEqual);
  const auto r = refactor_condition(u, find_block_swap_sites(parse(u.code), "u").at(0));
  const auto refactored = unit(r.code);
  const auto equivalent = block_swap(refactored, r.site);
  EXPECT_EQ(check_equivalence_sampled(equivalent, 500, 5).agreements, 500u);
  const auto distractor = non_equivalent_block_swap(refactored, r.site);
  EXPECT_TRUE(check_equivalence_sampled(distractor, 500, 5).counterexample);
}

TEST(Oracle, ForAndDoWhile) {
  const char* code = "void m(int n) { for (int i = 0; i < 10; i++) { n++; } do { n--; } while (n >= -1); }";
  EXPECT_EQ(check_equivalence_sampled(operand_pair(code, 0), 300, 2).agreements, 300u);
  EXPECT_EQ(check_equivalence_sampled(operand_pair(code, 1), 300, 2).agreements, 300u);
}

TEST(Oracle, Reproducible) {
  const auto pair = block_pair(fixtures::kIsEqual, false);
  const auto a = check_equivalence_sampled(pair, 1000, 42);
  const auto b = check_equivalence_sampled(pair, 1000, 42);
  EXPECT_EQ(a.agreements, b.agreements);
  EXPECT_EQ(a.counterexample, b.counterexample);
}

TEST(Oracle, StaleMaskSpan) {
  auto pair = block_pair(fixtures::kIsEqual);
  pair.transformed_mask_span = {0, 6};
  EXPECT_THROW(check_equivalence_sampled(pair, 10, 1), SpanMismatch);
}

TEST(LiteralValue, Radixes) {
  EXPECT_EQ(literal_value("42"), 42.0);
  EXPECT_EQ(literal_value("1_000L"), 1000.0);
  EXPECT_EQ(literal_value("0x1F"), 31.0);
  EXPECT_EQ(literal_value("0b101"), 5.0);
  EXPECT_EQ(literal_value("017"), 15.0);
  EXPECT_EQ(literal_value("0"), 0.0);
  EXPECT_EQ(literal_value("-1"), -1.0);
  EXPECT_EQ(literal_value("0xFFFFFFFFFFFFFFFFL"), -1.0);
  EXPECT_EQ(literal_value("2.5f"), 2.5);
  EXPECT_EQ(literal_value("1e3"), 1000.0);
  EXPECT_EQ(literal_value("'a'"), 97.0);
  EXPECT_EQ(literal_value("'\\n'"), 10.0);
  EXPECT_EQ(literal_value("'\\u0041'"), 65.0);
  EXPECT_EQ(literal_value("'\\''"), 39.0);
  EXPECT_EQ(literal_value("true"), 1.0);
  EXPECT_EQ(literal_value("null"), 0.0);
  EXPECT_EQ(literal_value("\"x\""), literal_value("\"x\""));
  EXPECT_NE(literal_value("\"x\""), literal_value("\"y\""));
  EXPECT_FALSE(literal_value("abc"));
}

TEST(Rng, UniformIntBounds) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const auto x = rng.uniform_int(-3, 3);
    ASSERT_GE(x, -3);
    ASSERT_LE(x, 3);
  }
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.uniform01(), b.uniform01());
  EXPECT_NE(derive_seed(1, "baseline"), derive_seed(1, "oracle"));
  EXPECT_EQ(derive_seed(1, "baseline"), derive_seed(1, "baseline"));
}
