#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "metaprobe/lexer.hpp"
#include "metaprobe/probes.hpp"
#include "metaprobe/random.hpp"

using namespace metaprobe;

namespace {

TransformedPair is_equal_pair() {
  const SourceUnit u{"isEqual", std::string(fixtures::kIsEqual), Split::Test};
  const auto sites = find_block_swap_sites(parse(u.code), u.id);
  auto pair = block_swap(u, sites.at(0));
  pair.pair_id = make_pair_id(u.id, pair.transform, sites.at(0));
  return pair;
}

std::size_t count_tokens(std::string_view code) {
  return lex(code, {.placeholder = kDefaultPlaceholder}).size();
}

}  // namespace

TEST(Mask, ReplacesOperatorOnly) {
  const std::string code = "if (a == b) x();";
  EXPECT_EQ(mask_operator(code, {6, 8}), "if (a <MASK> b) x();");
  EXPECT_EQ(unmask(mask_operator(code, {6, 8}), ComparisonOp::EQ), code);
}

TEST(Mask, SpanMustReadAnOperator) {
  EXPECT_THROW(mask_operator("if (a == b)", {4, 5}), SpanMismatch);
  EXPECT_THROW(mask_operator("if (a == b)", {6, 40}), SpanMismatch);
  EXPECT_THROW(mask_operator("if (a = b)", {6, 7}), SpanMismatch);
}

TEST(Mask, PlaceholderCollisionIsAnError) {
  EXPECT_THROW(mask_operator("s = \"<MASK>\"; if (a == b) {}", {20, 22}), PlaceholderCollision);
  EXPECT_EQ(mask_operator("s = \"<MASK>\"; if (a == b) {}", {20, 22}, "[[OP]]"),
            "s = \"<MASK>\"; if (a [[OP]] b) {}");
}

TEST(Mask, TransformedIsEqualProgram) {
  const auto pair = is_equal_pair();
  const auto masked = mask_operator(pair.transformed_code, pair.transformed_mask_span);
  EXPECT_NE(masked.find("if (a <MASK> b) {\n        return false;\n    } else {\n        return true;"),
            std::string::npos);
}

TEST(Window, ParseAndPrint) {
  EXPECT_TRUE(parse_window("complete").complete());
  EXPECT_EQ(parse_window("±10"), (WindowSpec{10, 10}));
  EXPECT_EQ(parse_window("+-30"), (WindowSpec{30, 30}));
  EXPECT_EQ(parse_window("+50"), (WindowSpec{std::nullopt, 50}));
  EXPECT_EQ(to_string(WindowSpec{10, 10}), "±10");
  EXPECT_EQ(to_string(WindowSpec{std::nullopt, 10}), "+10");
  EXPECT_EQ(to_string(WindowSpec{}), "complete");
  for (const char* bad : {"", "10", "+0", "±", "+x", "-10", "±-1"})
    EXPECT_THROW(parse_window(bad), ConfigError) << bad;
  const auto std7 = standard_windows();
  ASSERT_EQ(std7.size(), 7u);
  for (const auto& w : std7) EXPECT_EQ(parse_window(to_string(w)), w);
}

TEST(Window, CompleteIsIdentity) {
  const std::string masked = "int f() { return a <MASK> b; }";
  EXPECT_EQ(apply_window(masked, find_mask_token(masked), WindowSpec{}), masked);
}

TEST(Window, ClipsAtFileEnd) {
  const std::string masked = "x = a <MASK> b ; }";
  const auto idx = find_mask_token(masked);
  EXPECT_EQ(apply_window(masked, idx, parse_window("+10")), "<MASK> b ; }");
  EXPECT_EQ(count_tokens(apply_window(masked, idx, parse_window("+10"))), 1u + 3u);
  EXPECT_EQ(apply_window(masked, idx, parse_window("±1")), "a <MASK> b");
}

TEST(Window, KeepsInnerSpacingAndComments) {
  const std::string masked = "if (a   <MASK>\n  /* c */ b) {";
  EXPECT_EQ(apply_window(masked, find_mask_token(masked), parse_window("+2")), "<MASK>\n  /* c */ b");
}

TEST(Window, TokenCountsMatchLexOfOutput) {
  Rng rng(11);
  const std::string body = std::string(fixtures::kIsReciprocalOf);
  const auto toks = lex(body);
  for (int trial = 0; trial < 200; ++trial) {
    // Mask a random operator-shaped token position by splicing in the placeholder.
    const auto at = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(toks.size()) - 1));
    const std::string masked = splice(body, toks[at].span, kDefaultPlaceholder);
    const auto idx = find_mask_token(masked);
    ASSERT_EQ(idx, at);
    const std::size_t total = toks.size();
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 60));
    const bool both = rng.uniform_int(0, 1) == 1;
    const WindowSpec spec{both ? std::optional<std::size_t>(k) : std::nullopt, k};
    const auto out = apply_window(masked, idx, spec);
    const std::size_t before = both ? std::min(k, at) : 0;
    const std::size_t after = std::min(k, total - at - 1);
    EXPECT_EQ(count_tokens(out), before + 1 + after);
    EXPECT_NE(masked.find(out), std::string::npos);  // substring of the complete probe
  }
}

TEST(Window, FindMaskTokenRequiresExactlyOne) {
  EXPECT_THROW(find_mask_token("a == b"), SpanMismatch);
  EXPECT_THROW(find_mask_token("a <MASK> b <MASK> c"), SpanMismatch);
}

TEST(ProbeSet, TwoInstancesPerPairAndSpec) {
  const auto pair = is_equal_pair();
  const auto one = build_probe_set({pair}, {WindowSpec{}});
  ASSERT_EQ(one.size(), 2u);
  EXPECT_EQ(one[0].variant, Variant::Original);
  EXPECT_EQ(one[0].ground_truth, ComparisonOp::EQ);
  EXPECT_EQ(one[1].variant, Variant::Transformed);
  EXPECT_EQ(one[1].ground_truth, ComparisonOp::NE);
  EXPECT_NE(one[0].probe_id, one[1].probe_id);
  EXPECT_EQ(unmask(one[0].masked_code, one[0].ground_truth), pair.original_code);
  EXPECT_EQ(unmask(one[1].masked_code, one[1].ground_truth), pair.transformed_code);

  const auto seven = build_probe_set({pair}, standard_windows());
  EXPECT_EQ(seven.size(), 14u);
  std::set<std::string> ids;
  for (const auto& p : seven) {
    ids.insert(p.probe_id);
    EXPECT_EQ(p.pair_id, pair.pair_id);
    EXPECT_NO_THROW(find_mask_token(p.masked_code));
    const auto& full = p.variant == Variant::Original ? seven[12].masked_code : seven[13].masked_code;
    EXPECT_NE(full.find(p.masked_code), std::string::npos);
  }
  EXPECT_EQ(ids.size(), 14u);
}

TEST(ProbeSet, OrderIsIndependentOfInputOrder) {
  const SourceUnit u{"fip", std::string(fixtures::kFindInsertionPoint), Split::Test};
  std::vector<TransformedPair> pairs;
  for (const auto& s : find_operand_swap_sites(parse(u.code), u.id)) {
    auto p = operand_swap(u, s);
    p.pair_id = make_pair_id(u.id, p.transform, s);
    pairs.push_back(p);
  }
  pairs.push_back(is_equal_pair());
  ASSERT_EQ(pairs.size(), 3u);
  const auto a = build_probe_set(pairs, {WindowSpec{}, parse_window("+10")});
  std::reverse(pairs.begin(), pairs.end());
  const auto b = build_probe_set(pairs, {WindowSpec{}, parse_window("+10")});
  ASSERT_EQ(a.size(), 12u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].probe_id, b[i].probe_id);
}
