#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "metaprobe/metrics.hpp"
#include "metaprobe/oracle.hpp"

namespace metaprobe {

using Json = nlohmann::ordered_json;

/// Oracle result attached to an emitted pair.
struct OracleOutcome {
  enum class Status { Agree, Unverified, Counterexample };
  Status status = Status::Unverified;
  std::size_t trials = 0;
  std::size_t agreements = 0;
  std::string reason;  // why unverified
  std::optional<Assignment> counterexample;
};

std::string_view to_string(OracleOutcome::Status s);

Json to_json(ByteSpan span);
ByteSpan span_from_json(const Json& j);

Json to_json(const TransformSite& site);
TransformSite site_from_json(const Json& j);

Json to_json(const TransformedPair& pair, const OracleOutcome* oracle = nullptr);
TransformedPair pair_from_json(const Json& j);
std::optional<OracleOutcome> oracle_from_json(const Json& pair_json);

Json to_json(const WindowSpec& w);
WindowSpec window_from_json(const Json& j);

Json to_json(const ProbeInstance& p);
ProbeInstance probe_from_json(const Json& j);

Json to_json(const MaskPrediction& p);
MaskPrediction prediction_from_json(const Json& j);

Json to_json(const EvalRecord& r);
EvalRecord record_from_json(const Json& j);

Json to_json(const EvalSummary& s);
Json to_json(const ConfusionRow& r);

/// Parses each non-blank line. Throws IoError, or DataError naming the line.
std::vector<Json> read_jsonl(const std::string& path);
/// One compact object per line, '\n' terminated.
std::string to_jsonl(const std::vector<Json>& rows);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

/// Malformed stage input (as opposed to a missing file).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace metaprobe
