#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metaprobe/corpus.hpp"
#include "metaprobe/records.hpp"

namespace metaprobe {

struct RunConfig {
  std::vector<std::string> corpus;        // units to transform
  std::vector<std::string> train_corpus;  // familiarity index and operator prior
  LoadOptions load;
  std::vector<TransformKind> transforms = {TransformKind::BlockSwap, TransformKind::OperandSwap};
  bool distractors = true;  // also emit non-equivalent block swaps
  bool rename = false;
  bool refactor = false;
  std::vector<WindowSpec> windows = {WindowSpec{}};
  std::string backend_url;
  std::string mock_path;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  std::size_t parallelism = 1;
  std::size_t top_k = 10;
  std::size_t max_retries = 3;
  std::size_t failure_budget = 0;
  bool restrict_to_operators = false;
  std::size_t oracle_trials = 1000;
  std::size_t baseline_runs = 1000;
  std::optional<Prior> prior;
  std::size_t sample_pairs = 0;  // 0 keeps every pair in the probe stage
  bool unit_normalize = false;
  std::string placeholder = std::string(kDefaultPlaceholder);
};

/// Applies a JSON config object onto `config`; unknown keys are an error.
void apply_config_json(RunConfig& config, const Json& j);

/// Stage outputs, relative to RunConfig::out_dir.
namespace files {
inline constexpr const char* kPairs = "pairs.jsonl";
inline constexpr const char* kTransformSummary = "transform_summary.json";
inline constexpr const char* kProbes = "probes.jsonl";
inline constexpr const char* kPredictions = "predictions.jsonl";
inline constexpr const char* kRecords = "records.jsonl";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kConfusionCsv = "confusion.csv";
inline constexpr const char* kConfusionMd = "confusion.md";
inline constexpr const char* kBaseline = "baseline.json";
inline constexpr const char* kDistance = "distance_study.json";
inline constexpr const char* kFamiliarity = "familiarity.csv";
inline constexpr const char* kReport = "report.md";
}  // namespace files

struct TransformStats {
  std::size_t units = 0;
  std::size_t skipped_units = 0;
  std::size_t pairs = 0;
  std::size_t agree = 0;
  std::size_t unverified = 0;
  std::size_t counterexample = 0;        // distractors
  std::size_t rejected_by_oracle = 0;    // equivalent pairs that failed; dropped
};

/// Outcome of transforming one unit, used by both the CLI and bindings.
struct UnitTransforms {
  std::vector<TransformedPair> pairs;
  std::vector<OracleOutcome> oracle;  // parallel to pairs
  std::vector<std::string> skipped;   // reasons sites or the unit were skipped
  std::size_t block_sites = 0;
  std::size_t operand_sites = 0;
  std::size_t rejected = 0;
};

UnitTransforms transform_unit(const SourceUnit& unit, const RunConfig& config);

TransformStats cmd_transform(const RunConfig& config);
std::size_t cmd_probe(const RunConfig& config);
EvalSummary cmd_evaluate(const RunConfig& config);
BaselineOutcome cmd_baseline(const RunConfig& config);
DistanceStudy cmd_embed_study(const RunConfig& config);
FamiliarityReport cmd_familiarity(const RunConfig& config);
std::string cmd_report(const RunConfig& config);

/// Backend chosen by the config: the mock file if set, else the URL.
std::unique_ptr<Backend> make_backend(const RunConfig& config);

/// Markdown rendering helpers, shared with the report stage.
std::string format_fixed(double v, int digits);

}  // namespace metaprobe
