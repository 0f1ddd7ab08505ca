#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "metaprobe/pipeline.hpp"

using namespace metaprobe;
namespace fs = std::filesystem;

namespace {

class Workspace {
 public:
  Workspace() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() /
            ("metaprobe_pipeline_" + std::string(info->test_suite_name()) + "_" + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  ~Workspace() { fs::remove_all(root_); }

  std::string path(const std::string& name) const { return (root_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    write_text(path(name), text);
    return path(name);
  }
  std::string corpus(const std::string& name, const std::vector<std::pair<std::string, std::string_view>>& units) const {
    std::vector<Json> rows;
    for (const auto& [id, code] : units) rows.push_back(Json{{"id", id}, {"code", std::string(code)}});
    return write(name, to_jsonl(rows));
  }

 private:
  fs::path root_;
};

std::string slurp(const std::string& path) { return read_text(path); }

RunConfig base_config(const Workspace& ws, const std::string& out = "out") {
  RunConfig c;
  c.out_dir = ws.path(out);
  c.oracle_trials = 200;
  c.baseline_runs = 200;
  return c;
}

const std::string_view kLoop = R"(int sum(int[] xs, int n) {
    int s = 0;
    for (int i = 0; i < n; i++) {
        s += xs[i];
    }
    return s;
})";

}  // namespace

TEST(TransformUnit, WorkedPrograms) {
  RunConfig c;
  c.oracle_trials = 300;
  const auto r = transform_unit({"r", std::string(fixtures::kIsReciprocalOf), Split::Test}, c);
  // One block-swap site, its distractor, no operand site (field accesses).
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].transform, TransformKind::BlockSwap);
  EXPECT_EQ(r.pairs[0].transformed_code, fixtures::kIsReciprocalOfSwapped);
  EXPECT_EQ(r.oracle[0].status, OracleOutcome::Status::Agree);
  EXPECT_EQ(r.pairs[1].transform, TransformKind::NonEquivalentBlockSwap);
  EXPECT_EQ(r.oracle[1].status, OracleOutcome::Status::Counterexample);

  const auto f = transform_unit({"f", std::string(fixtures::kFindInsertionPoint), Split::Test}, c);
  std::size_t operand = 0;
  bool saw_table = false;
  for (const auto& p : f.pairs) {
    if (p.transform != TransformKind::OperandSwap) continue;
    ++operand;
    saw_table |= p.transformed_code == fixtures::kFindInsertionPointSwapped;
  }
  EXPECT_EQ(operand, 2u);
  EXPECT_TRUE(saw_table);
  EXPECT_EQ(f.rejected, 0u);
}

TEST(TransformUnit, RefactorPutsMaskInDeclaration) {
  RunConfig c;
  c.refactor = true;
  c.distractors = false;
  const auto r = transform_unit({"e", std::string(fixtures::kIsEqual), Split::Test}, c);
  ASSERT_EQ(r.pairs.size(), 1u);
  const auto& p = r.pairs[0];
  EXPECT_TRUE(p.refactored);
  EXPECT_NE(p.pair_id.find("+refactor"), std::string::npos);
  const auto decl = p.original_code.find("boolean condition = a == b;");
  ASSERT_NE(decl, std::string::npos);
  EXPECT_GT(p.original_mask_span.start, decl);
  EXPECT_LT(p.original_mask_span.end, p.original_code.find(';', decl) + 1);
  EXPECT_EQ(r.oracle[0].status, OracleOutcome::Status::Agree);
  EXPECT_NE(p.transformed_code.find("boolean condition = a != b;"), std::string::npos);
}

TEST(TransformUnit, RenameAndSkips) {
  RunConfig c;
  c.rename = true;
  c.transforms = {TransformKind::OperandSwap};
  const auto r = transform_unit({"l", std::string(kLoop), Split::Test}, c);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_NE(r.pairs[0].original_code.find("var4 < var2"), std::string::npos);
  EXPECT_NE(r.pairs[0].pair_id.find("+rename"), std::string::npos);
  const auto bad = transform_unit({"x", "int f( {", Split::Test}, c);
  EXPECT_TRUE(bad.pairs.empty());
  ASSERT_EQ(bad.skipped.size(), 1u);
}

TEST(TransformUnit, EveryPairAgreesOrIsFlagged) {
  RunConfig c;
  c.oracle_trials = 200;
  c.distractors = false;
  const auto r = transform_unit({"c", "int f(List<Integer> xs, int k) { if (xs.size() > k) { return 1; } else { return 2; } }", Split::Test}, c);
  ASSERT_FALSE(r.pairs.empty());
  for (const auto& o : r.oracle) {
    EXPECT_TRUE(o.status == OracleOutcome::Status::Agree || o.status == OracleOutcome::Status::Unverified);
  }
  EXPECT_EQ(r.oracle[0].status, OracleOutcome::Status::Unverified);
  EXPECT_FALSE(r.oracle[0].reason.empty());
}

TEST(Config, JsonAppliesAndRejectsUnknownKeys) {
  RunConfig c;
  apply_config_json(c, Json::parse(R"({"corpus":"a.jsonl","windows":["+10","complete"],"seed":9,
      "transforms":["operand_swap"],"prior":{"==":0.5,"!=":0.5},"parallelism":3})"));
  EXPECT_EQ(c.corpus, std::vector<std::string>{"a.jsonl"});
  EXPECT_EQ(c.windows.size(), 2u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.transforms, std::vector<TransformKind>{TransformKind::OperandSwap});
  ASSERT_TRUE(c.prior);
  EXPECT_EQ((*c.prior)[1], 0.5);
  EXPECT_EQ(c.parallelism, 3u);
  EXPECT_THROW(apply_config_json(c, Json::parse(R"({"colour":1})")), ConfigError);
  EXPECT_THROW(apply_config_json(c, Json::parse(R"({"seed":"x"})")), ConfigError);
  EXPECT_THROW(apply_config_json(c, Json::parse(R"({"transforms":["nope"]})")), ConfigError);
  EXPECT_THROW(apply_config_json(c, Json::parse(R"({"prior":{"=":1}})")), ConfigError);
  EXPECT_THROW(apply_config_json(c, Json::parse("[]")), ConfigError);
}

TEST(Pipeline, EmptyCorpusWritesEmptyOutputs) {
  Workspace ws;
  auto c = base_config(ws);
  c.corpus = {ws.write("empty.jsonl", "")};
  const auto s = cmd_transform(c);
  EXPECT_EQ(s.pairs, 0u);
  EXPECT_EQ(slurp(ws.path("out/pairs.jsonl")), "");
}

TEST(Pipeline, AllCorrectMockScoresOne) {
  Workspace ws;
  auto c = base_config(ws);
  c.corpus = {ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual},
                                    {"r", fixtures::kIsReciprocalOf},
                                    {"f", fixtures::kFindInsertionPoint},
                                    {"l", kLoop}})};
  c.mock_path = ws.write("mock.json", "{}");
  c.windows = {WindowSpec{}, parse_window("±10")};
  const auto t = cmd_transform(c);
  EXPECT_EQ(t.rejected_by_oracle, 0u);
  const auto probes = cmd_probe(c);
  // block_swap + operand_swap pairs only (distractors are not probed by default).
  std::size_t probed_pairs = 0;
  for (const auto& row : read_jsonl(ws.path("out/pairs.jsonl")))
    probed_pairs += row["transform"] != "non_equivalent_block_swap";
  EXPECT_EQ(probes, probed_pairs * 2 * 2);
  const auto s = cmd_evaluate(c);
  EXPECT_EQ(s.acc_original, 1.0);
  EXPECT_EQ(s.acc_transformed, 1.0);
  EXPECT_EQ(s.acc_both, 1.0);
  EXPECT_EQ(s.mean_entropy_original, 0.0);
  const auto csv = slurp(ws.path("out/confusion.csv"));
  EXPECT_EQ(csv.rfind("transform,window,", 0), 0u);
}

TEST(Pipeline, ScriptedMockMatchesHandCount) {
  Workspace ws;
  auto c = base_config(ws);
  c.corpus = {ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual}})};
  c.transforms = {TransformKind::BlockSwap};
  c.distractors = false;
  cmd_transform(c);
  ASSERT_EQ(cmd_probe(c), 2u);
  const auto probes = read_jsonl(ws.path("out/probes.jsonl"));
  // Original answered correctly, transformed answered with the original operator.
  Json mock = {{"fill_mask", {{"responses", Json::object()}}}};
  mock["fill_mask"]["responses"][probes[0]["probe_id"].get<std::string>()] = Json::array({Json::array({"==", 0.8})});
  mock["fill_mask"]["responses"][probes[1]["probe_id"].get<std::string>()] =
      Json{{"top_k", Json::array({Json::array({"==", 0.6}), Json::array({"!=", 0.4})})}};
  c.mock_path = ws.write("mock.json", mock.dump());
  const auto s = cmd_evaluate(c);
  EXPECT_EQ(s.n, 1u);
  EXPECT_EQ(s.acc_original, 1.0);
  EXPECT_EQ(s.acc_transformed, 0.0);
  EXPECT_EQ(s.acc_both, 0.0);
  EXPECT_NEAR(s.mean_entropy_original, -std::log(0.8), 1e-12);
  EXPECT_NEAR(s.mean_entropy_transformed, -std::log(0.4), 1e-12);
}

TEST(Pipeline, BackendFailuresAreExcludedWithinBudget) {
  Workspace ws;
  auto c = base_config(ws);
  c.corpus = {ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual}, {"l", kLoop}})};
  c.distractors = false;
  cmd_transform(c);
  cmd_probe(c);
  const auto first = read_jsonl(ws.path("out/probes.jsonl")).front()["probe_id"].get<std::string>();
  c.mock_path = ws.write("mock.json", Json{{"fill_mask", {{"flaky", {{first, 99}}}}}}.dump());
  c.max_retries = 0;
  EXPECT_THROW(cmd_evaluate(c), BackendUnavailable);
  c.failure_budget = 1;
  const auto s = cmd_evaluate(c);
  EXPECT_EQ(s.excluded, 1u);
  const auto summary = Json::parse(slurp(ws.path("out/summary.json")));
  EXPECT_EQ(summary["excluded"]["backend_failure"], 1);
}

TEST(Pipeline, EmbedStudyScriptedCloser) {
  Workspace ws;
  auto c = base_config(ws);
  std::vector<std::pair<std::string, std::string>> codes;
  for (int i = 0; i < 6; ++i) {
    codes.emplace_back("u" + std::to_string(i),
                       "int f" + std::to_string(i) + "(int a, int b) { if (a < b) { return " + std::to_string(i) +
                           "; } else { return b; } }");
  }
  std::vector<std::pair<std::string, std::string_view>> views(codes.begin(), codes.end());
  c.corpus = {ws.corpus("c.jsonl", views)};
  c.transforms = {TransformKind::BlockSwap};
  cmd_transform(c);
  // Original at the origin, equivalent rewrite at distance i+1, distractor at 2(i+1).
  Json vectors = Json::object();
  std::map<std::string, int> index;
  for (const auto& row : read_jsonl(ws.path("out/pairs.jsonl"))) {
    const auto unit = row["provenance"]["unit_id"].get<std::string>();
    const double k = std::stoi(unit.substr(1)) + 1;
    vectors[content_key(row["original_code"].get<std::string>())] = {0.0, 0.0};
    const double scale = row["transform"] == "block_swap" ? 1.0 : 2.0;
    vectors[content_key(row["transformed_code"].get<std::string>())] = {scale * k, 0.0};
  }
  c.mock_path = ws.write("mock.json", Json{{"hidden_size", 2}, {"embed", {{"vectors", vectors}}}}.dump());
  const auto study = cmd_embed_study(c);
  EXPECT_EQ(study.triples.size(), 6u);
  EXPECT_NEAR(study.p_value, 1.0 / 64.0, 1e-15);
  EXPECT_LT(study.mean_equivalent, study.mean_nonequivalent);

  auto few = base_config(ws, "few");
  few.corpus = {ws.corpus("few.jsonl", {views.begin(), views.begin() + 4})};
  few.transforms = c.transforms;
  few.mock_path = c.mock_path;
  cmd_transform(few);
  EXPECT_THROW(cmd_embed_study(few), TooFewPairs);
}

TEST(Pipeline, FamiliarityAndBaselineOutputs) {
  Workspace ws;
  auto c = base_config(ws);
  c.corpus = {ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual}, {"r", fixtures::kIsReciprocalOf}})};
  c.train_corpus = {ws.corpus("train.jsonl", {{"t", "void g() { if (a == b) h(); }"}})};
  c.mock_path = ws.write("mock.json", R"({"fill_mask":{"default":"uniform"}})");
  c.transforms = {TransformKind::BlockSwap};
  cmd_transform(c);
  cmd_probe(c);
  cmd_evaluate(c);
  const auto fam = cmd_familiarity(c);
  EXPECT_EQ(fam.pairs, 2u);
  EXPECT_EQ(fam.groups[2].pair_ids.size(), 1u);  // "a == b" found, "a != b" not
  EXPECT_EQ(fam.groups[0].pair_ids.size(), 1u);
  const auto csv = slurp(ws.path("out/familiarity.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);

  // The training corpus has a single "==", so the prior is a point mass.
  const auto b = cmd_baseline(c);
  for (double a : b.accuracies) EXPECT_DOUBLE_EQ(a, 0.5);
  c.prior = Prior{0.5, 0.5, 0, 0, 0, 0.1};
  EXPECT_THROW(cmd_baseline(c), BadPrior);
}

TEST(Report, NotRunSectionsAndStableBytes) {
  Workspace ws;
  auto c = base_config(ws);
  const auto empty = cmd_report(c);
  EXPECT_EQ(std::count(empty.begin(), empty.end(), '|'), 0);
  std::size_t not_run = 0;
  for (auto at = empty.find("_not run_"); at != std::string::npos; at = empty.find("_not run_", at + 1)) ++not_run;
  EXPECT_EQ(not_run, 5u);

  c.corpus = {ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual}, {"l", kLoop}})};
  c.mock_path = ws.write("mock.json", "{}");
  cmd_transform(c);
  cmd_probe(c);
  cmd_evaluate(c);
  const auto first = cmd_report(c);
  EXPECT_EQ(first, cmd_report(c));
  EXPECT_EQ(slurp(ws.path("out/report.md")), first);
  // Two executed stages, two tables; three sections still not run.
  std::size_t separators = 0;
  std::istringstream lines(first);
  for (std::string line; std::getline(lines, line);) separators += line.rfind("| --- |", 0) == 0;
  EXPECT_EQ(separators, 2u);
  not_run = 0;
  for (auto at = first.find("_not run_"); at != std::string::npos; at = first.find("_not run_", at + 1)) ++not_run;
  EXPECT_EQ(not_run, 3u);
}

TEST(Pipeline, ByteReproducibleAcrossRunsAndThreads) {
  Workspace ws;
  const auto corpus = ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual},
                                            {"r", fixtures::kIsReciprocalOf},
                                            {"f", fixtures::kFindInsertionPoint},
                                            {"l", kLoop}});
  const auto mock = ws.write("mock.json", R"({"fill_mask":{"default":"noisy","accuracy":0.6}})");
  std::vector<std::string> outputs;
  for (std::size_t threads : {1u, 3u}) {
    auto c = base_config(ws, "run" + std::to_string(threads));
    c.corpus = {corpus};
    c.mock_path = mock;
    c.seed = 77;
    c.parallelism = threads;
    c.windows = standard_windows();
    c.prior = Prior{0.3, 0.3, 0.1, 0.1, 0.1, 0.1};
    cmd_transform(c);
    cmd_probe(c);
    cmd_evaluate(c);
    cmd_baseline(c);
    cmd_report(c);
    std::string all;
    for (const char* f : {files::kPairs, files::kTransformSummary, files::kProbes, files::kPredictions,
                          files::kRecords, files::kSummary, files::kConfusionCsv, files::kBaseline,
                          files::kReport})
      all += slurp(ws.path("run" + std::to_string(threads) + "/" + f));
    outputs.push_back(all);
  }
  EXPECT_EQ(outputs[0], outputs[1]);
}

#ifdef METAPROBE_CLI
namespace {
int run_cli(const std::string& args) {
  const int status = std::system((std::string(METAPROBE_CLI) + " " + args + " -q 2>/dev/null").c_str());
  return WEXITSTATUS(status);
}
}  // namespace

TEST(Cli, ExitCodes) {
  Workspace ws;
  const auto out = ws.path("out");
  const auto corpus = ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual}});
  EXPECT_EQ(run_cli("transform --corpus " + corpus + " -o " + out), 0);
  EXPECT_EQ(run_cli("transform --corpus " + ws.write("empty.jsonl", "") + " -o " + ws.path("o2")), 0);
  EXPECT_EQ(run_cli("transform --corpus " + corpus + " --window bogus -o " + out), 1);
  EXPECT_EQ(run_cli("transform --config " + ws.write("bad.json", R"({"nope":1})")), 1);
  EXPECT_EQ(run_cli("transform --no-such-flag"), 1);
  EXPECT_EQ(run_cli("transform --corpus " + ws.path("missing.jsonl") + " -o " + out), 3);
  EXPECT_EQ(run_cli("probe -o " + out), 0);
  EXPECT_EQ(run_cli("evaluate -o " + out + " --backend-url http://127.0.0.1:1 --max-retries 0"), 2);
  EXPECT_EQ(run_cli("evaluate -o " + out), 1);  // no backend configured
  EXPECT_EQ(run_cli("evaluate -o " + out + " --mock " + ws.write("m.json", "{}")), 0);
  EXPECT_EQ(run_cli("embed-study -o " + out + " --mock " + ws.path("m.json")), 3);
}

TEST(Cli, FlagsOverrideConfigFile) {
  Workspace ws;
  const auto corpus = ws.corpus("c.jsonl", {{"e", fixtures::kIsEqual}});
  const auto config = ws.write("cfg.json", Json{{"corpus", corpus}, {"out_dir", ws.path("from_config")},
                                                {"transforms", {"operand_swap"}}}.dump());
  EXPECT_EQ(run_cli("transform -c " + config + " -o " + ws.path("from_flag")), 0);
  EXPECT_TRUE(fs::exists(ws.path("from_flag/pairs.jsonl")));
  EXPECT_FALSE(fs::exists(ws.path("from_config")));
  // isEqual has one operand-swap site and transforms came from the file.
  EXPECT_EQ(read_jsonl(ws.path("from_flag/pairs.jsonl")).size(), 1u);
}
#endif
