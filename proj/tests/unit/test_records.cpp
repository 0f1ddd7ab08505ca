#include <gtest/gtest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "metaprobe/records.hpp"

using namespace metaprobe;

namespace {

TransformedPair sample_pair() {
  const SourceUnit u{"fip", std::string(fixtures::kFindInsertionPoint), Split::Test};
  const auto sites = find_operand_swap_sites(parse(u.code), u.id);
  auto p = operand_swap(u, sites.at(0));
  p.pair_id = make_pair_id(u.id, p.transform, sites.at(0));
  p.unit_id = u.id;
  p.renamed = true;
  return p;
}

}  // namespace

TEST(Records, PairRoundTrip) {
  const auto p = sample_pair();
  OracleOutcome o;
  o.status = OracleOutcome::Status::Counterexample;
  o.trials = 1000;
  o.agreements = 998;
  o.counterexample = Assignment{{"low", 3.0}, {"high", -1.0}};
  const Json j = to_json(p, &o);
  const auto back = pair_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.pair_id, p.pair_id);
  EXPECT_EQ(back.transform, p.transform);
  EXPECT_EQ(back.original_code, p.original_code);
  EXPECT_EQ(back.transformed_code, p.transformed_code);
  EXPECT_EQ(back.original_op, ComparisonOp::LE);
  EXPECT_EQ(back.transformed_op, ComparisonOp::GE);
  EXPECT_EQ(back.original_mask_span, p.original_mask_span);
  EXPECT_EQ(back.transformed_mask_span, p.transformed_mask_span);
  EXPECT_EQ(back.unit_id, "fip");
  EXPECT_TRUE(back.renamed);
  EXPECT_EQ(back.site, p.site);
  EXPECT_EQ(back.transformed_site, p.transformed_site);
  EXPECT_EQ(to_json(back, &o).dump(), j.dump());

  const auto oracle = oracle_from_json(j);
  ASSERT_TRUE(oracle);
  EXPECT_EQ(oracle->status, OracleOutcome::Status::Counterexample);
  EXPECT_EQ(oracle->agreements, 998u);
  EXPECT_EQ(oracle->counterexample, o.counterexample);
  EXPECT_FALSE(oracle_from_json(to_json(p)));
}

TEST(Records, ProbeWindowSerialization) {
  ProbeInstance p;
  p.probe_id = "x:+10:original";
  p.pair_id = "x";
  p.masked_code = "<MASK> b";
  p.ground_truth = ComparisonOp::GT;
  p.window = WindowSpec{std::nullopt, 10};
  p.refactored = true;
  const Json j = to_json(p);
  EXPECT_TRUE(j["window"]["before"].is_null());
  EXPECT_EQ(j["window"]["after"], 10);
  const auto back = probe_from_json(j);
  EXPECT_EQ(back.window, p.window);
  EXPECT_EQ(back.ground_truth, ComparisonOp::GT);
  EXPECT_TRUE(back.refactored);
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Records, PredictionAndRecordRoundTrip) {
  MaskPrediction m{"id", {{"==", 0.5}, {"!=", 0.25}}, 0.5, false, "m"};
  EXPECT_EQ(prediction_from_json(to_json(m)), m);

  EvalRecord r;
  r.pair_id = "p";
  r.transform = TransformKind::NonEquivalentBlockSwap;
  r.window = WindowSpec{30, 30};
  r.original_op = ComparisonOp::LT;
  r.transformed_op = ComparisonOp::GE;
  r.original_prediction = "<";
  r.original_correct = true;
  r.original_entropy = 0.1;
  r.transformed_entropy = 2.5;
  r.excluded = true;
  r.exclusion_reason = "zero_probability";
  const auto back = record_from_json(Json::parse(to_json(r).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
  EXPECT_EQ(back.window, r.window);
}

TEST(Records, JsonlReadErrorsNameTheLine) {
  const auto path = (std::filesystem::temp_directory_path() / "metaprobe_records_bad.jsonl").string();
  write_text(path, "{\"a\":1}\n\n{oops\n");
  try {
    read_jsonl(path);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
  write_text(path, to_jsonl({Json{{"a", 1}}, Json{{"b", "\xff"}}}));
  EXPECT_EQ(read_jsonl(path).size(), 2u);
  std::filesystem::remove(path);
  EXPECT_THROW(read_jsonl(path), IoError);
}
