#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaprobe/metrics.hpp"
#include "metaprobe/random.hpp"

using namespace metaprobe;

namespace {

/// P(W+ >= observed) by enumerating all 2^n sign patterns over average ranks.
double brute_force_wilcoxon(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> d;
  for (const auto& [e, ne] : pairs) {
    if (ne - e != 0.0) d.push_back(ne - e);
  }
  const std::size_t n = d.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = (static_cast<double>(i + j) + 2.0) / 2.0;
    i = j + 1;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (d[i] > 0) observed += rank[i];
  }
  std::size_t at_least = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) w += rank[i];
    }
    if (w >= observed - 1e-9) ++at_least;
  }
  return static_cast<double>(at_least) / static_cast<double>(std::uint64_t{1} << n);
}

EvalRecord rec(ComparisonOp orig, std::string orig_pred, ComparisonOp trans, std::string trans_pred) {
  EvalRecord r;
  r.original_op = orig;
  r.transformed_op = trans;
  r.original_prediction = std::move(orig_pred);
  r.transformed_prediction = std::move(trans_pred);
  r.original_correct = r.original_prediction == surface(orig);
  r.transformed_correct = r.transformed_prediction == surface(trans);
  return r;
}

ProbeInstance probe_of(ComparisonOp op, Variant v) {
  ProbeInstance p;
  p.pair_id = "x";
  p.ground_truth = op;
  p.variant = v;
  return p;
}

MaskPrediction pred_of(std::vector<TokenProb> top, double truth_prob, bool single = true) {
  MaskPrediction m;
  m.top_k = std::move(top);
  m.ground_truth_prob = truth_prob;
  m.ground_truth_single_token = single;
  return m;
}

const Prior kUniform = {1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6};

}  // namespace

TEST(Entropy, Values) {
  EXPECT_EQ(entropy_of(1.0), 0.0);
  EXPECT_NEAR(entropy_of(1.0 / 6.0), std::log(6.0), 1e-12);
  EXPECT_NEAR(entropy_of(std::exp(-0.45)), 0.45, 1e-12);
  EXPECT_THROW(entropy_of(0.0), DomainError);
  EXPECT_THROW(entropy_of(-0.1), DomainError);
  EXPECT_THROW(entropy_of(1.5), DomainError);
  EXPECT_THROW(entropy_of(std::nan("")), DomainError);
}

TEST(Entropy, StrictlyDecreasing) {
  double prev = entropy_of(1e-300);
  for (double p = 1e-6; p <= 1.0; p *= 1.37) {
    const double h = entropy_of(p);
    EXPECT_LT(h, prev);
    prev = h;
  }
}

TEST(Record, TopOneTrimmedAndCompared) {
  const auto r = make_record(probe_of(ComparisonOp::EQ, Variant::Original), pred_of({{" ==", 0.8}}, 0.8),
                             probe_of(ComparisonOp::NE, Variant::Transformed),
                             pred_of({{"==", 0.6}, {"!=", 0.3}}, 0.3));
  EXPECT_TRUE(r.original_correct);
  EXPECT_FALSE(r.transformed_correct);
  EXPECT_EQ(r.transformed_prediction, "==");
  EXPECT_NEAR(r.original_entropy, -std::log(0.8), 1e-15);
  EXPECT_NEAR(r.transformed_entropy, -std::log(0.3), 1e-15);
  EXPECT_FALSE(r.excluded);
}

TEST(Record, RestrictedModeSkipsNonOperators) {
  const auto p = pred_of({{"x", 0.5}, {"<", 0.3}}, 0.3);
  const auto free = make_record(probe_of(ComparisonOp::LT, Variant::Original), p,
                                probe_of(ComparisonOp::LT, Variant::Transformed), p);
  const auto restricted = make_record(probe_of(ComparisonOp::LT, Variant::Original), p,
                                      probe_of(ComparisonOp::LT, Variant::Transformed), p, true);
  EXPECT_FALSE(free.original_correct);
  EXPECT_TRUE(restricted.original_correct);
}

TEST(Record, Exclusions) {
  const auto multi = make_record(probe_of(ComparisonOp::LE, Variant::Original), pred_of({{"<", 0.9}}, 0.05, false),
                                 probe_of(ComparisonOp::GT, Variant::Transformed), pred_of({{">", 0.9}}, 0.9));
  EXPECT_TRUE(multi.excluded);
  EXPECT_EQ(multi.exclusion_reason, "multi_token_operator");
  const auto zero = make_record(probe_of(ComparisonOp::LE, Variant::Original), pred_of({{"<", 0.9}}, 0.0),
                                probe_of(ComparisonOp::GT, Variant::Transformed), pred_of({{">", 0.9}}, 0.9));
  EXPECT_TRUE(zero.excluded);
  EXPECT_EQ(zero.exclusion_reason, "zero_probability");
}

TEST(Score, SmallCases) {
  const auto s = score({rec(ComparisonOp::EQ, "==", ComparisonOp::NE, "==")});
  EXPECT_EQ(s.n, 1u);
  EXPECT_EQ(s.acc_original, 1.0);
  EXPECT_EQ(s.acc_transformed, 0.0);
  EXPECT_EQ(s.acc_both, 0.0);
  const auto all = score({rec(ComparisonOp::EQ, "==", ComparisonOp::NE, "!="),
                          rec(ComparisonOp::LT, "<", ComparisonOp::GE, ">=")});
  EXPECT_EQ(all.acc_original, 1.0);
  EXPECT_EQ(all.acc_transformed, 1.0);
  EXPECT_EQ(all.acc_both, 1.0);
  auto ex = rec(ComparisonOp::EQ, "==", ComparisonOp::NE, "!=");
  ex.excluded = true;
  EXPECT_THROW(score({ex}), EmptyInput);
  EXPECT_THROW(score({}), EmptyInput);
}

TEST(Score, HandComputedTwentyPairs) {
  // Correctness pattern by hand: o = original right, t = transformed right.
  const char* pattern[] = {"ot", "ot", "ot", "ot", "ot", "ot", "ot", "ot", "o-", "o-",
                           "o-", "-t", "-t", "--", "ot", "ot", "o-", "--", "ot", "-t"};
  std::vector<EvalRecord> records;
  for (const char* p : pattern) {
    auto r = rec(ComparisonOp::GT, p[0] == 'o' ? ">" : "<", ComparisonOp::LE, p[1] == 't' ? "<=" : ">");
    r.original_entropy = p[0] == 'o' ? 0.5 : 2.0;
    r.transformed_entropy = p[1] == 't' ? 0.25 : 1.0;
    records.push_back(r);
  }
  // Counted by hand: 11 "ot", 4 "o-", 3 "-t", 2 "--".
  const auto s = score(records);
  EXPECT_EQ(s.n, 20u);
  EXPECT_DOUBLE_EQ(s.acc_original, 15.0 / 20.0);
  EXPECT_DOUBLE_EQ(s.acc_transformed, 14.0 / 20.0);
  EXPECT_DOUBLE_EQ(s.acc_both, 11.0 / 20.0);
  EXPECT_DOUBLE_EQ(s.mean_entropy_original, (15 * 0.5 + 5 * 2.0) / 20.0);
  EXPECT_DOUBLE_EQ(s.mean_entropy_transformed, (14 * 0.25 + 6 * 1.0) / 20.0);
}

TEST(Score, BothNeverExceedsEither) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalRecord> rs;
    const auto n = rng.uniform_int(1, 40);
    for (int i = 0; i < n; ++i)
      rs.push_back(rec(ComparisonOp::EQ, rng.uniform_int(0, 1) ? "==" : "!=", ComparisonOp::NE,
                       rng.uniform_int(0, 1) ? "!=" : "=="));
    const auto s = score(rs);
    EXPECT_LE(s.acc_both, std::min(s.acc_original, s.acc_transformed));
  }
}

TEST(Confusion, SingleCorrectRecord) {
  const auto rows = per_operator_confusion({rec(ComparisonOp::EQ, "==", ComparisonOp::NE, "!=")}, Variant::Original);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0].op, ComparisonOp::EQ);
  EXPECT_EQ(rows[0].tp, 1u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.fp, 0u);
    EXPECT_EQ(r.fn, 0u);
    EXPECT_FALSE(r.swapped);
  }
  EXPECT_EQ(rows[0].f_score, 1.0);
  EXPECT_FALSE(rows[1].precision_defined);
  EXPECT_EQ(rows[1].precision, 0.0);
  EXPECT_FALSE(rows[6].op);
}

TEST(Confusion, HandCountedRows) {
  // "==" with TP 547, FP 50, FN 19 gives F = 0.94.
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 547; ++i) rs.push_back(rec(ComparisonOp::EQ, "==", ComparisonOp::NE, "!="));
  for (int i = 0; i < 19; ++i) rs.push_back(rec(ComparisonOp::EQ, "!=", ComparisonOp::NE, "!="));
  for (int i = 0; i < 50; ++i) rs.push_back(rec(ComparisonOp::NE, "==", ComparisonOp::EQ, "=="));
  const auto rows = per_operator_confusion(rs, Variant::Original);
  EXPECT_EQ(rows[0].tp, 547u);
  EXPECT_EQ(rows[0].fp, 50u);
  EXPECT_EQ(rows[0].fn, 19u);
  EXPECT_NEAR(rows[0].f_score, 0.94, 0.005);
  EXPECT_NEAR(rows[0].precision, 547.0 / 597.0, 1e-15);
  EXPECT_NEAR(rows[0].recall, 547.0 / 566.0, 1e-15);
  const auto swapped = per_operator_confusion(rs, Variant::Transformed);
  EXPECT_TRUE(swapped[0].swapped);
  EXPECT_EQ(swapped[1].tp, 566u);
  EXPECT_EQ(swapped[0].tp, 50u);
}

TEST(Confusion, TruePositivesPlusFalseNegativesCountRecords) {
  Rng rng(5);
  const std::vector<std::string> preds = {"==", "!=", "<", "<=", ">", ">=", "foo"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EvalRecord> rs;
    std::size_t scored = 0;
    for (int i = 0; i < 60; ++i) {
      auto r = rec(kAllOps[rng.uniform_int(0, 5)], preds[rng.uniform_int(0, 6)], kAllOps[rng.uniform_int(0, 5)],
                   preds[rng.uniform_int(0, 6)]);
      r.excluded = rng.uniform_int(0, 9) == 0;
      scored += !r.excluded;
      rs.push_back(r);
    }
    for (Variant v : {Variant::Original, Variant::Transformed}) {
      const auto rows = per_operator_confusion(rs, v);
      std::size_t sum = 0;
      for (std::size_t i = 0; i < 6; ++i) sum += rows[i].tp + rows[i].fn;
      EXPECT_EQ(sum, scored);
      EXPECT_EQ(rows[6].tp + rows[6].fn, scored);
    }
  }
}

TEST(Prior, Validation) {
  EXPECT_NO_THROW(validate_prior(kUniform));
  EXPECT_THROW(validate_prior({0.5, 0.5, 0.5, 0, 0, 0}), BadPrior);
  EXPECT_THROW(validate_prior({1.5, -0.5, 0, 0, 0, 0}), BadPrior);
  EXPECT_THROW(validate_prior({std::nan(""), 1, 0, 0, 0, 0}), BadPrior);
}

TEST(Prior, EstimatedFromOperatorTokens) {
  const std::vector<SourceUnit> units = {{"a", "if (a == b && c < d) {} x = e == f;", Split::Train},
                                         {"b", "while (i >= 0) { s = \"<=\"; }", Split::Train}};
  const auto p = estimate_prior(units);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[2], 0.25);
  EXPECT_DOUBLE_EQ(p[5], 0.25);
  EXPECT_DOUBLE_EQ(p[3], 0.0);
}

TEST(MonteCarlo, PointMassOnSingleTruth) {
  const std::vector<ComparisonOp> truths(30, ComparisonOp::EQ);
  const auto out = monte_carlo_baseline(truths, {1, 0, 0, 0, 0, 0}, 50, 9);
  ASSERT_EQ(out.accuracies.size(), 50u);
  for (double a : out.accuracies) EXPECT_EQ(a, 1.0);
  EXPECT_EQ(out.max_accuracy, 1.0);
}

TEST(MonteCarlo, MeanMatchesClosedForm) {
  Rng rng(17);
  std::vector<ComparisonOp> truths;
  for (int i = 0; i < 500; ++i) truths.push_back(kAllOps[rng.uniform_int(0, 5) / 2 * 2]);
  const Prior prior = {0.35, 0.25, 0.15, 0.05, 0.12, 0.08};
  const double expected = expected_accuracy(truths, prior);
  std::array<double, 6> freq{};
  for (auto t : truths) freq[static_cast<std::size_t>(t)] += 1.0 / 500.0;
  double closed = 0;
  for (std::size_t i = 0; i < 6; ++i) closed += prior[i] * freq[i];
  EXPECT_NEAR(expected, closed, 1e-12);
  const auto out = monte_carlo_baseline(truths, prior, 10000, 123);
  EXPECT_NEAR(out.mean_accuracy, closed, 0.005 * closed);
}

TEST(MonteCarlo, SeedReproducesBitwise) {
  const std::vector<ComparisonOp> truths = {ComparisonOp::EQ, ComparisonOp::LT, ComparisonOp::GE, ComparisonOp::NE};
  const auto a = monte_carlo_baseline(truths, kUniform, 500, 42, {0.5, 0.75});
  const auto b = monte_carlo_baseline(truths, kUniform, 500, 42, {0.5, 0.75});
  EXPECT_EQ(a.accuracies, b.accuracies);
  EXPECT_EQ(a.seed, 42u);
  const auto c = monte_carlo_baseline(truths, kUniform, 500, 43);
  EXPECT_NE(a.accuracies, c.accuracies);
  ASSERT_EQ(a.p_value_vs.size(), 2u);
  EXPECT_EQ(a.p_value_vs[0].second, empirical_p(a.accuracies, 0.5));
}

TEST(MonteCarlo, EmpiricalPCountsTies) {
  EXPECT_DOUBLE_EQ(empirical_p({0.1, 0.2, 0.3, 0.3}, 0.3), 0.5);
  EXPECT_DOUBLE_EQ(empirical_p({0.1, 0.2}, 0.9), 0.0);
}

TEST(MonteCarlo, Errors) {
  EXPECT_THROW(monte_carlo_baseline({ComparisonOp::EQ}, {0.9, 0, 0, 0, 0, 0}, 10, 1), BadPrior);
  EXPECT_THROW(monte_carlo_baseline({ComparisonOp::EQ}, kUniform, 0, 1), ConfigError);
}

TEST(PerOperatorMc, Extremes) {
  std::vector<ComparisonOp> truths;
  for (int i = 0; i < 60; ++i) truths.push_back(kAllOps[i % 6]);
  const auto perfect = per_operator_mc(truths, kUniform, 300, 4, {{ComparisonOp::LE, 1.0}});
  EXPECT_EQ(perfect.at(ComparisonOp::LE), 0.0);
  const std::vector<ComparisonOp> eq(20, ComparisonOp::EQ);
  const auto point = per_operator_mc(eq, {1, 0, 0, 0, 0, 0}, 100, 4, {{ComparisonOp::EQ, 0.9}});
  EXPECT_EQ(point.at(ComparisonOp::EQ), 1.0);
}

TEST(Euclidean, Basics) {
  const EmbeddingVector u{{0, 3}}, v{{4, 0}};
  EXPECT_DOUBLE_EQ(euclidean(u, v), 5.0);
  EXPECT_EQ(euclidean(u, u), 0.0);
  EXPECT_EQ(euclidean(u, v), euclidean(v, u));
  EXPECT_DOUBLE_EQ(euclidean(u, v, true), std::sqrt(2.0));
  EXPECT_EQ(euclidean(EmbeddingVector{{0, 0}}, EmbeddingVector{{0, 0}}, true), 0.0);
  EXPECT_THROW(euclidean(u, EmbeddingVector{{1, 2, 3}}), DimensionMismatch);
}

TEST(Wilcoxon, AllPositiveTen) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 10; ++i) pairs.emplace_back(0.0, i * 0.1);
  const auto w = wilcoxon_one_sided(pairs);
  EXPECT_TRUE(w.exact);
  EXPECT_EQ(w.n, 10u);
  EXPECT_DOUBLE_EQ(w.w_plus, 55.0);
  EXPECT_NEAR(w.p_value, 1.0 / 1024.0, 1e-15);
}

TEST(Wilcoxon, SymmetricNearHalf) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 8; ++i) {
    pairs.emplace_back(0.0, static_cast<double>(i));
    pairs.emplace_back(static_cast<double>(i), 0.0);
  }
  const auto w = wilcoxon_one_sided(pairs);
  EXPECT_NEAR(w.p_value, 0.5, 0.05);
}

TEST(Wilcoxon, TooFewAndZerosDropped) {
  EXPECT_THROW(wilcoxon_one_sided({{0, 1}, {0, 2}, {0, 3}, {0, 4}}), TooFewPairs);
  EXPECT_THROW(wilcoxon_one_sided({{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 1}, {2, 2}}), TooFewPairs);
  const auto w = wilcoxon_one_sided({{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {7, 7}});
  EXPECT_EQ(w.n, 5u);
}

TEST(Wilcoxon, ExactMatchesBruteForce) {
  Rng rng(2024);
  for (int trial = 0; trial < 400; ++trial) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(5, 12));
    std::vector<std::pair<double, double>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      // Small integer grid forces ties and some zero differences.
      const double a = static_cast<double>(rng.uniform_int(0, 6));
      const double b = static_cast<double>(rng.uniform_int(0, 6));
      pairs.emplace_back(a, b);
    }
    std::size_t nonzero = 0;
    for (const auto& [a, b] : pairs) nonzero += a != b;
    if (nonzero < 5) continue;
    const auto w = wilcoxon_one_sided(pairs);
    EXPECT_TRUE(w.exact);
    EXPECT_NEAR(w.p_value, brute_force_wilcoxon(pairs), 1e-12);
  }
}

TEST(Wilcoxon, NormalApproximationAboveTwentyFive) {
  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 40; ++i) pairs.emplace_back(0.0, i % 4 == 0 ? -i : i);
  const auto w = wilcoxon_one_sided(pairs);
  EXPECT_FALSE(w.exact);
  // No ties, so mean n(n+1)/4 = 410 and variance n(n+1)(2n+1)/24.
  double w_plus = 0;
  for (int i = 1; i <= 40; ++i) w_plus += i % 4 == 0 ? 0 : i;
  EXPECT_DOUBLE_EQ(w.w_plus, w_plus);
  const double z = (w_plus - 410.0 - 0.5) / std::sqrt(40.0 * 41.0 * 81.0 / 24.0);
  EXPECT_NEAR(w.p_value, 0.5 * std::erfc(z / std::sqrt(2.0)), 1e-12);
}

TEST(Wilcoxon, ExactIsCloseToNormalAtBoundary) {
  Rng rng(8);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 25; ++i) pairs.emplace_back(0.0, rng.uniform01() - 0.3);
  const auto w = wilcoxon_one_sided(pairs);
  EXPECT_TRUE(w.exact);
  const double z = (w.w_plus - 162.5 - 0.5) / std::sqrt(25.0 * 26.0 * 51.0 / 24.0);
  EXPECT_NEAR(w.p_value, 0.5 * std::erfc(z / std::sqrt(2.0)), 0.01);
}

TEST(DistanceStudy, EquivalentAlwaysCloser) {
  std::vector<std::pair<double, double>> t;
  for (int i = 1; i <= 8; ++i) t.emplace_back(0.1 * i, 0.1 * i + 0.05 * i);
  const auto s = distance_study(t);
  EXPECT_LT(s.mean_equivalent, s.mean_nonequivalent);
  EXPECT_NEAR(s.p_value, 1.0 / 256.0, 1e-15);
  EXPECT_EQ(s.n_tested, 8u);
}
