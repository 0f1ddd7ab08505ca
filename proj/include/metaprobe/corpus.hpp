#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metaprobe/metrics.hpp"

namespace metaprobe {

struct LoadOptions {
  std::string code_field = "code";
  /// Field holding a unique id. Rows without it get "<file name>:<line>".
  std::string id_field = "id";
  /// Forced split. Otherwise a "partition" field decides, then the path
  /// (a path mentioning "train" is training data).
  std::optional<Split> split;
};

struct LoadResult {
  std::vector<SourceUnit> units;
  std::size_t lines = 0;
  std::size_t malformed = 0;  // bad JSON, missing or empty code field
};

/// Reads one JSON object per line; gzip input is detected and inflated.
/// Throws IoError if the file cannot be read and EmptyCorpus if no unit loads.
LoadResult load_jsonl(const std::string& path, const LoadOptions& options = {});

/// Collapses every run of whitespace to a single space.
std::string normalize_whitespace(std::string_view text);

/// Substring membership over a set of function bodies, raw and
/// whitespace-normalized.
class CorpusIndex {
 public:
  CorpusIndex() = default;
  explicit CorpusIndex(const std::vector<SourceUnit>& units);

  /// Whether the normalized `snippet` occurs in some normalized body.
  bool contains(std::string_view snippet) const;
  bool contains_raw(std::string_view snippet) const;

  struct Hits {
    std::size_t raw = 0;
    std::size_t normalized = 0;
  };
  /// Occurrence counts of every pattern in one pass over the index.
  std::vector<Hits> count(const std::vector<std::string>& patterns) const;

  std::size_t size() const { return units_; }

 private:
  std::string raw_;
  std::string normalized_;
  std::size_t units_ = 0;
};

struct FamiliarityGroup {
  bool original_found = false;
  bool transformed_found = false;
  std::set<std::string> pair_ids;
  std::optional<EvalSummary> summary;  // over joined records, when any
};

struct FamiliarityReport {
  /// (no,no), (no,yes), (yes,no), (yes,yes) by (original, transformed).
  std::array<FamiliarityGroup, 4> groups;
  std::size_t pairs = 0;
  std::size_t raw_original_hits = 0;  // pairs whose raw condition occurs verbatim
  std::size_t raw_transformed_hits = 0;

  double fraction(std::size_t group) const;
};

/// The full condition text of each side of a pair.
std::pair<std::string, std::string> condition_texts(const TransformedPair& pair);

/// Classifies pairs by whether each condition occurs in the index and joins
/// `records` (matched on pair_id) into per-group summaries.
FamiliarityReport familiarity_groups(const CorpusIndex& index,
                                     const std::vector<TransformedPair>& pairs,
                                     const std::vector<EvalRecord>& records = {});

}  // namespace metaprobe
