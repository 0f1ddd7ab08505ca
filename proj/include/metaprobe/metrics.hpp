#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "metaprobe/modelio.hpp"

namespace metaprobe {

/// Negative natural log of p. Throws DomainError unless p is in (0, 1].
double entropy_of(double p);

/// One scored pair under one window.
struct EvalRecord {
  std::string pair_id;
  TransformKind transform = TransformKind::BlockSwap;
  WindowSpec window;
  bool renamed = false;
  bool refactored = false;
  ComparisonOp original_op = ComparisonOp::EQ;
  ComparisonOp transformed_op = ComparisonOp::EQ;
  std::string original_prediction;  // top-1 token
  std::string transformed_prediction;
  bool original_correct = false;
  bool transformed_correct = false;
  double original_entropy = 0.0;  // nats
  double transformed_entropy = 0.0;
  bool excluded = false;
  std::string exclusion_reason;
};

/// Joins the two predictions of a pair. `restrict_to_operators` takes the
/// top-1 among the six operators instead of over the whole vocabulary.
EvalRecord make_record(const ProbeInstance& original, const MaskPrediction& original_pred,
                       const ProbeInstance& transformed, const MaskPrediction& transformed_pred,
                       bool restrict_to_operators = false);

struct EvalSummary {
  std::size_t n = 0;
  std::size_t excluded = 0;
  double acc_original = 0.0;
  double acc_transformed = 0.0;
  double acc_both = 0.0;
  double mean_entropy_original = 0.0;
  double mean_entropy_transformed = 0.0;
};

/// Throws EmptyInput when no record survives exclusion.
EvalSummary score(const std::vector<EvalRecord>& records);

struct ConfusionRow {
  std::optional<ComparisonOp> op;  // empty for the overall row
  bool swapped = false;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  bool precision_defined = false;
  bool recall_defined = false;
};

/// Six operator rows in operator order, then the overall row (sums, micro
/// averaged). `variant` selects the original (unswapped) or transformed side.
std::vector<ConfusionRow> per_operator_confusion(const std::vector<EvalRecord>& records,
                                                 Variant variant);

/// Operator probabilities indexed like kAllOps.
using Prior = std::array<double, 6>;

/// Throws BadPrior unless entries are finite, non-negative and sum to 1 ± 1e-9.
void validate_prior(const Prior& prior);

/// Relative frequency of each comparison operator token in `units`.
Prior estimate_prior(const std::vector<SourceUnit>& units);

struct BaselineOutcome {
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::vector<double> accuracies;
  double max_accuracy = 0.0;
  double mean_accuracy = 0.0;
  /// model accuracy -> fraction of runs at or above it.
  std::vector<std::pair<double, double>> p_value_vs;
};

/// Fraction of `accuracies` that are >= `value`.
double empirical_p(const std::vector<double>& accuracies, double value);

BaselineOutcome monte_carlo_baseline(const std::vector<ComparisonOp>& truths, const Prior& prior,
                                     std::size_t runs, std::uint64_t seed,
                                     const std::vector<double>& model_accuracies = {});

/// Expected accuracy of prior-guessing: sum over operators of prior * truth frequency.
double expected_accuracy(const std::vector<ComparisonOp>& truths, const Prior& prior);

/// Per operator, the fraction of random-guess runs whose F-score is at
/// least the model's.
std::map<ComparisonOp, double> per_operator_mc(const std::vector<ComparisonOp>& truths,
                                               const Prior& prior, std::size_t runs,
                                               std::uint64_t seed,
                                               const std::map<ComparisonOp, double>& model_f);

/// Throws DimensionMismatch. With `unit_normalize`, both vectors are scaled
/// to unit length first (zero vectors stay zero).
double euclidean(const EmbeddingVector& u, const EmbeddingVector& v, bool unit_normalize = false);

struct WilcoxonResult {
  std::size_t n = 0;  // non-zero differences
  double w_plus = 0.0;
  double p_value = 1.0;
  bool exact = false;
};

/// One-sided signed-rank test of d_noneq - d_equiv > 0. Exact null
/// distribution for n <= 25, normal approximation with continuity and tie
/// correction above. Throws TooFewPairs when n < 5.
WilcoxonResult wilcoxon_one_sided(const std::vector<std::pair<double, double>>& pairs);

struct DistanceStudy {
  std::vector<std::pair<double, double>> triples;  // (d_equivalent, d_nonequivalent)
  double mean_equivalent = 0.0;
  double mean_nonequivalent = 0.0;
  double p_value = 1.0;
  std::size_t n_tested = 0;
};

DistanceStudy distance_study(std::vector<std::pair<double, double>> triples);

}  // namespace metaprobe
