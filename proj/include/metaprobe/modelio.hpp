#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "metaprobe/probes.hpp"

namespace metaprobe {

using TokenProb = std::pair<std::string, double>;

struct MaskPrediction {
  std::string probe_id;
  std::vector<TokenProb> top_k;  // non-increasing probability
  double ground_truth_prob = 0.0;
  bool ground_truth_single_token = true;
  std::string model_id;

  friend bool operator==(const MaskPrediction&, const MaskPrediction&) = default;
};

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

struct BackendInfo {
  std::string model_id;
  std::size_t hidden_size = 0;
  std::string mask_token;
  std::size_t vocab_size = 0;
};

/// The backend answered, but not in the documented shape.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Throws ProtocolError unless the prediction satisfies the response
/// invariants (probabilities in (0,1], non-increasing, summing to at most 1).
void validate_prediction(const MaskPrediction& p);

class Backend {
 public:
  virtual ~Backend() = default;
  /// Implementations must be safe to call concurrently.
  virtual MaskPrediction fill_mask(const ProbeInstance& probe, std::size_t top_k) = 0;
  virtual EmbeddingVector embed(std::string_view code) = 0;
  virtual BackendInfo health() = 0;
};

/// Scripted, deterministic backend read from a JSON file. See README for the
/// file layout. Lookups try the probe id first, then the hex FNV-1a-64 hash
/// of the masked code.
class MockBackend : public Backend {
 public:
  static MockBackend from_file(const std::string& path);
  static MockBackend from_json(std::string_view json_text);

  MaskPrediction fill_mask(const ProbeInstance& probe, std::size_t top_k) override;
  EmbeddingVector embed(std::string_view code) override;
  BackendInfo health() override;

  struct Script;
  explicit MockBackend(std::shared_ptr<const Script> script);

 private:
  std::shared_ptr<const Script> script_;
};

/// Lower-case hex FNV-1a-64 of `text`, the mock's content key.
std::string content_key(std::string_view text);

struct HttpOptions {
  double connect_timeout_s = 5.0;
  double read_timeout_s = 120.0;
  /// Replaced by the wire placeholder "<MASK>" before sending.
  std::string placeholder = std::string(kDefaultPlaceholder);
};

/// Client for the fill-mask/embedding HTTP service.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(std::string base_url, HttpOptions options = {});

  MaskPrediction fill_mask(const ProbeInstance& probe, std::size_t top_k) override;
  EmbeddingVector embed(std::string_view code) override;
  BackendInfo health() override;

 private:
  std::string base_url_;
  HttpOptions options_;
};

struct BatchOptions {
  std::size_t parallelism = 1;
  std::size_t top_k = 10;
  std::size_t max_retries = 3;
  double backoff_ms = 50.0;  // doubled after each failed attempt
  /// Abort once more instances than this have failed after retries.
  std::size_t failure_budget = 0;
  /// Every request whose probe id hashes into this fraction is issued twice
  /// and the two answers compared.
  double duplicate_check_fraction = 0.01;
};

struct BatchResult {
  std::vector<std::optional<MaskPrediction>> predictions;  // input order
  std::size_t failures = 0;
  std::size_t retries = 0;
  std::size_t duplicate_checks = 0;
  std::size_t nondeterministic = 0;
  std::vector<std::string> errors;  // one message per failed instance
};

/// Queries `backend` for every instance with at most `parallelism` requests
/// in flight. Throws BackendUnavailable once the failure budget is exceeded.
BatchResult run_batch(Backend& backend, const std::vector<ProbeInstance>& instances,
                      const BatchOptions& options = {});

}  // namespace metaprobe
