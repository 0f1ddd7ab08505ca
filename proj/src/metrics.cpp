#include "metaprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metaprobe/lexer.hpp"
#include "metaprobe/random.hpp"

namespace metaprobe {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string top1(const MaskPrediction& p, bool restrict_to_operators) {
  for (const auto& [token, prob] : p.top_k) {
    const auto t = trim(token);
    if (!restrict_to_operators || parse_op(t)) return std::string(t);
  }
  return {};
}

std::size_t op_index(ComparisonOp op) { return static_cast<std::size_t>(op); }

double f_of(std::size_t tp, std::size_t fp, std::size_t fn) {
  const std::size_t d = 2 * tp + fp + fn;
  return d == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(d);
}

/// Inverse-CDF draw from `prior` given its cumulative sums.
std::size_t draw(const std::array<double, 6>& cumulative, Rng& rng) {
  const double u = rng.uniform01() * cumulative.back();
  for (std::size_t i = 0; i < cumulative.size(); ++i) {
    if (u < cumulative[i]) return i;
  }
  // Rounding can leave u at the top; take the last operator with mass.
  for (std::size_t i = cumulative.size(); i-- > 0;) {
    if (i == 0 || cumulative[i] > cumulative[i - 1]) return i;
  }
  return 0;
}

std::array<double, 6> cumulative_of(const Prior& prior) {
  std::array<double, 6> c{};
  std::partial_sum(prior.begin(), prior.end(), c.begin());
  return c;
}

}  // namespace

double entropy_of(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("entropy needs p in (0,1], got " + std::to_string(p));
  return -std::log(p);
}

EvalRecord make_record(const ProbeInstance& original, const MaskPrediction& original_pred,
                       const ProbeInstance& transformed, const MaskPrediction& transformed_pred,
                       bool restrict_to_operators) {
  EvalRecord r;
  r.pair_id = original.pair_id;
  r.transform = original.transform;
  r.window = original.window;
  r.renamed = original.renamed;
  r.refactored = original.refactored;
  r.original_op = original.ground_truth;
  r.transformed_op = transformed.ground_truth;
  r.original_prediction = top1(original_pred, restrict_to_operators);
  r.transformed_prediction = top1(transformed_pred, restrict_to_operators);
  r.original_correct = r.original_prediction == surface(r.original_op);
  r.transformed_correct = r.transformed_prediction == surface(r.transformed_op);
  if (!original_pred.ground_truth_single_token || !transformed_pred.ground_truth_single_token) {
    r.excluded = true;
    r.exclusion_reason = "multi_token_operator";
    return r;
  }
  try {
    r.original_entropy = entropy_of(original_pred.ground_truth_prob);
    r.transformed_entropy = entropy_of(transformed_pred.ground_truth_prob);
  } catch (const DomainError&) {
    r.excluded = true;
    r.exclusion_reason = "zero_probability";
  }
  return r;
}

EvalSummary score(const std::vector<EvalRecord>& records) {
  EvalSummary s;
  std::size_t orig = 0, trans = 0, both = 0;
  double h_orig = 0.0, h_trans = 0.0;
  for (const auto& r : records) {
    if (r.excluded) {
      ++s.excluded;
      continue;
    }
    ++s.n;
    orig += r.original_correct;
    trans += r.transformed_correct;
    both += r.original_correct && r.transformed_correct;
    h_orig += r.original_entropy;
    h_trans += r.transformed_entropy;
  }
  if (s.n == 0) throw EmptyInput("no scorable records");
  const double n = static_cast<double>(s.n);
  s.acc_original = static_cast<double>(orig) / n;
  s.acc_transformed = static_cast<double>(trans) / n;
  s.acc_both = static_cast<double>(both) / n;
  s.mean_entropy_original = h_orig / n;
  s.mean_entropy_transformed = h_trans / n;
  return s;
}

std::vector<ConfusionRow> per_operator_confusion(const std::vector<EvalRecord>& records,
                                                 Variant variant) {
  const bool swapped = variant == Variant::Transformed;
  std::vector<ConfusionRow> rows(7);
  for (std::size_t i = 0; i < 6; ++i) rows[i].op = kAllOps[i];
  for (auto& row : rows) row.swapped = swapped;

  for (const auto& r : records) {
    if (r.excluded) continue;
    const ComparisonOp truth = swapped ? r.transformed_op : r.original_op;
    const auto predicted = parse_op(swapped ? r.transformed_prediction : r.original_prediction);
    if (predicted == truth) {
      ++rows[op_index(truth)].tp;
    } else {
      ++rows[op_index(truth)].fn;
      if (predicted) ++rows[op_index(*predicted)].fp;
    }
  }
  for (std::size_t i = 0; i < 6; ++i) {
    rows[6].tp += rows[i].tp;
    rows[6].fp += rows[i].fp;
    rows[6].fn += rows[i].fn;
  }
  for (auto& row : rows) {
    row.precision_defined = row.tp + row.fp > 0;
    row.recall_defined = row.tp + row.fn > 0;
    row.precision = row.precision_defined
                        ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fp)
                        : 0.0;
    row.recall = row.recall_defined
                     ? static_cast<double>(row.tp) / static_cast<double>(row.tp + row.fn)
                     : 0.0;
    row.f_score = f_of(row.tp, row.fp, row.fn);
  }
  return rows;
}

void validate_prior(const Prior& prior) {
  double sum = 0.0;
  for (double p : prior) {
    if (!std::isfinite(p) || p < 0.0) throw BadPrior("prior entries must be finite and >= 0");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw BadPrior("prior sums to " + std::to_string(sum));
}

Prior estimate_prior(const std::vector<SourceUnit>& units) {
  std::array<std::size_t, 6> counts{};
  std::size_t total = 0;
  for (const auto& u : units) {
    for (const auto& t : lex(u.code)) {
      if (t.kind != TokenKind::Operator) continue;
      if (const auto op = parse_op(t.text)) {
        ++counts[op_index(*op)];
        ++total;
      }
    }
  }
  if (total == 0) throw EmptyInput("no comparison operators to estimate a prior from");
  Prior prior{};
  for (std::size_t i = 0; i < 6; ++i)
    prior[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return prior;
}

double empirical_p(const std::vector<double>& accuracies, double value) {
  if (accuracies.empty()) return 1.0;
  const auto hits = std::count_if(accuracies.begin(), accuracies.end(),
                                  [&](double a) { return a >= value; });
  return static_cast<double>(hits) / static_cast<double>(accuracies.size());
}

double expected_accuracy(const std::vector<ComparisonOp>& truths, const Prior& prior) {
  if (truths.empty()) throw EmptyInput("no truths");
  double sum = 0.0;
  for (auto t : truths) sum += prior[op_index(t)];
  return sum / static_cast<double>(truths.size());
}

BaselineOutcome monte_carlo_baseline(const std::vector<ComparisonOp>& truths, const Prior& prior,
                                     std::size_t runs, std::uint64_t seed,
                                     const std::vector<double>& model_accuracies) {
  validate_prior(prior);
  if (runs == 0) throw ConfigError("runs must be at least 1");
  if (truths.empty()) throw EmptyInput("no truths to guess");
  const auto cumulative = cumulative_of(prior);
  Rng rng(seed);
  BaselineOutcome out;
  out.runs = runs;
  out.seed = seed;
  out.accuracies.reserve(runs);
  for (std::size_t r = 0; r < runs; ++r) {
    std::size_t hits = 0;
    for (auto t : truths) hits += draw(cumulative, rng) == op_index(t);
    out.accuracies.push_back(static_cast<double>(hits) / static_cast<double>(truths.size()));
  }
  out.max_accuracy = *std::max_element(out.accuracies.begin(), out.accuracies.end());
  out.mean_accuracy =
      std::accumulate(out.accuracies.begin(), out.accuracies.end(), 0.0) / static_cast<double>(runs);
  for (double a : model_accuracies) out.p_value_vs.emplace_back(a, empirical_p(out.accuracies, a));
  return out;
}

std::map<ComparisonOp, double> per_operator_mc(const std::vector<ComparisonOp>& truths,
                                               const Prior& prior, std::size_t runs,
                                               std::uint64_t seed,
                                               const std::map<ComparisonOp, double>& model_f) {
  validate_prior(prior);
  if (runs == 0) throw ConfigError("runs must be at least 1");
  const auto cumulative = cumulative_of(prior);
  Rng rng(seed);
  std::array<std::size_t, 6> at_least{};
  for (std::size_t r = 0; r < runs; ++r) {
    std::array<std::size_t, 6> tp{}, fp{}, fn{};
    for (auto t : truths) {
      const std::size_t guess = draw(cumulative, rng);
      const std::size_t truth = op_index(t);
      if (guess == truth) {
        ++tp[truth];
      } else {
        ++fn[truth];
        ++fp[guess];
      }
    }
    for (const auto& [op, f] : model_f) {
      const auto i = op_index(op);
      if (f_of(tp[i], fp[i], fn[i]) >= f) ++at_least[i];
    }
  }
  std::map<ComparisonOp, double> out;
  for (const auto& [op, f] : model_f)
    out[op] = static_cast<double>(at_least[op_index(op)]) / static_cast<double>(runs);
  return out;
}

double euclidean(const EmbeddingVector& u, const EmbeddingVector& v, bool unit_normalize) {
  if (u.dimension() != v.dimension())
    throw DimensionMismatch("dimensions " + std::to_string(u.dimension()) + " and " +
                            std::to_string(v.dimension()));
  double su = 1.0, sv = 1.0;
  if (unit_normalize) {
    const auto norm = [](const std::vector<double>& x) {
      return std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    };
    const double nu = norm(u.values), nv = norm(v.values);
    su = nu > 0.0 ? 1.0 / nu : 0.0;
    sv = nv > 0.0 ? 1.0 / nv : 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const double d = u.values[i] * su - v.values[i] * sv;
    sum += d * d;
  }
  return std::sqrt(sum);
}

WilcoxonResult wilcoxon_one_sided(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> diffs;
  for (const auto& [equiv, noneq] : pairs) {
    const double d = noneq - equiv;
    if (d != 0.0) diffs.push_back(d);
  }
  const std::size_t n = diffs.size();
  if (n < 5) throw TooFewPairs("need at least 5 non-zero differences, got " + std::to_string(n));

  // Average ranks of |d|, kept doubled so they stay integral.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::fabs(diffs[a]) < std::fabs(diffs[b]); });
  std::vector<std::size_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]])) ++j;
    const std::size_t doubled = (i + 1) + (j + 1);  // 2 * mean rank
    for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = doubled;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }

  WilcoxonResult out;
  out.n = n;
  std::size_t w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diffs[i] > 0) w2 += rank2[i];
  }
  out.w_plus = static_cast<double>(w2) / 2.0;

  if (n <= 25) {
    // Count sign patterns by doubled rank sum; counts stay below 2^25.
    const std::size_t max_sum = std::accumulate(rank2.begin(), rank2.end(), std::size_t{0});
    std::vector<std::uint64_t> ways(max_sum + 1, 0);
    ways[0] = 1;
    std::size_t reach = 0;
    for (std::size_t r : rank2) {
      for (std::size_t s = reach + 1; s-- > 0;) {
        if (ways[s]) ways[s + r] += ways[s];
      }
      reach += r;
    }
    std::uint64_t tail = 0;
    for (std::size_t s = w2; s <= max_sum; ++s) tail += ways[s];
    out.p_value = static_cast<double>(tail) / std::ldexp(1.0, static_cast<int>(n));
    out.exact = true;
    return out;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double z = (out.w_plus - mean - 0.5) / std::sqrt(var);
  out.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
  return out;
}

DistanceStudy distance_study(std::vector<std::pair<double, double>> triples) {
  DistanceStudy s;
  s.triples = std::move(triples);
  if (s.triples.empty()) throw TooFewPairs("no distance triples");
  for (const auto& [e, ne] : s.triples) {
    s.mean_equivalent += e;
    s.mean_nonequivalent += ne;
  }
  s.mean_equivalent /= static_cast<double>(s.triples.size());
  s.mean_nonequivalent /= static_cast<double>(s.triples.size());
  const auto w = wilcoxon_one_sided(s.triples);
  s.p_value = w.p_value;
  s.n_tested = w.n;
  return s;
}

}  // namespace metaprobe
