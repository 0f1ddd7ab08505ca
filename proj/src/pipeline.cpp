#include "metaprobe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "metaprobe/log.hpp"
#include "metaprobe/random.hpp"

namespace metaprobe {

namespace fs = std::filesystem;

namespace {

std::string out_path(const RunConfig& c, const char* name) {
  return (fs::path(c.out_dir) / name).string();
}

void ensure_out_dir(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw IoError("cannot create " + c.out_dir + ": " + ec.message());
}

bool selected(const RunConfig& c, TransformKind k) {
  return std::find(c.transforms.begin(), c.transforms.end(), k) != c.transforms.end();
}

std::string pair_suffix(bool renamed, bool refactored) {
  std::string s;
  if (renamed) s += "+rename";
  if (refactored) s += "+refactor";
  return s;
}

OracleOutcome run_oracle(const TransformedPair& pair, const RunConfig& config) {
  OracleOutcome o;
  if (config.oracle_trials == 0) {
    o.reason = "oracle disabled";
    return o;
  }
  try {
    const auto v = check_equivalence_sampled(pair, config.oracle_trials,
                                             derive_seed(config.seed, "oracle/" + pair.pair_id));
    o.trials = v.trials;
    o.agreements = v.agreements;
    if (v.all_agree()) {
      o.status = OracleOutcome::Status::Agree;
    } else {
      o.status = OracleOutcome::Status::Counterexample;
      o.counterexample = v.counterexample;
    }
  } catch (const UnsupportedOperand& e) {
    o.reason = e.what();
  }
  return o;
}

template <typename T, typename Fn>
std::vector<T> parallel_map(std::size_t n, std::size_t parallelism, Fn fn) {
  std::vector<T> out(n);
  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

std::vector<SourceUnit> load_all(const std::vector<std::string>& paths, LoadOptions options,
                                 std::optional<Split> force = std::nullopt) {
  if (force) options.split = force;
  std::vector<SourceUnit> units;
  for (const auto& p : paths) {
    try {
      auto r = load_jsonl(p, options);
      if (r.malformed > 0)
        log(LogLevel::Warn, p + ": skipped " + std::to_string(r.malformed) + " malformed lines");
      log(LogLevel::Info, p + ": loaded " + std::to_string(r.units.size()) + " units");
      for (auto& u : r.units) units.push_back(std::move(u));
    } catch (const EmptyCorpus& e) {
      log(LogLevel::Warn, e.what());
    }
  }
  return units;
}

std::vector<TransformedPair> read_pairs(const RunConfig& c, bool with_distractors) {
  std::vector<TransformedPair> pairs;
  for (const auto& row : read_jsonl(out_path(c, files::kPairs))) {
    auto p = pair_from_json(row);
    const bool distractor = p.transform == TransformKind::NonEquivalentBlockSwap;
    if (distractor && !with_distractors) continue;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<EvalRecord> read_records(const RunConfig& c) {
  std::vector<EvalRecord> records;
  for (const auto& row : read_jsonl(out_path(c, files::kRecords))) records.push_back(record_from_json(row));
  return records;
}

/// Records grouped by (transform, window, renamed, refactored) in sorted key order.
struct GroupKey {
  TransformKind transform;
  std::string window;
  bool renamed;
  bool refactored;

  auto tie() const { return std::tie(transform, window, renamed, refactored); }
  bool operator<(const GroupKey& o) const { return tie() < o.tie(); }

  std::string label() const {
    return std::string(to_string(transform)) + "/" + window + pair_suffix(renamed, refactored);
  }
  Json json() const {
    return Json{{"transform", to_string(transform)},
                {"window", window},
                {"renamed", renamed},
                {"refactored", refactored}};
  }
};

std::map<GroupKey, std::vector<EvalRecord>> group_records(const std::vector<EvalRecord>& records) {
  std::map<GroupKey, std::vector<EvalRecord>> groups;
  for (const auto& r : records)
    groups[{r.transform, to_string(r.window), r.renamed, r.refactored}].push_back(r);
  return groups;
}

Prior prior_from_json(const Json& j) {
  Prior p{};
  for (const auto& [k, v] : j.items()) {
    const auto op = parse_op(k);
    if (!op) throw ConfigError("prior: unknown operator '" + k + "'");
    p[static_cast<std::size_t>(*op)] = v.get<double>();
  }
  return p;
}

Json prior_to_json(const Prior& p) {
  Json j;
  for (std::size_t i = 0; i < 6; ++i) j[std::string(surface(kAllOps[i]))] = p[i];
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string md_row(const std::vector<std::string>& cells) {
  std::string out = "|";
  for (const auto& c : cells) out += " " + c + " |";
  return out + "\n";
}

std::string md_table(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::string out = md_row(header);
  out += "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& r : rows) out += md_row(r);
  return out;
}

}  // namespace

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void apply_config_json(RunConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  auto strings = [](const Json& v) {
    if (v.is_string()) return std::vector<std::string>{v.get<std::string>()};
    return v.get<std::vector<std::string>>();
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "corpus") c.corpus = strings(v);
      else if (key == "train_corpus") c.train_corpus = strings(v);
      else if (key == "code_field") c.load.code_field = v.get<std::string>();
      else if (key == "id_field") c.load.id_field = v.get<std::string>();
      else if (key == "transforms") {
        c.transforms.clear();
        for (const auto& name : strings(v)) {
          const auto k = parse_transform_kind(name);
          if (!k) throw ConfigError("unknown transform '" + name + "'");
          c.transforms.push_back(*k);
        }
      } else if (key == "distractors") c.distractors = v.get<bool>();
      else if (key == "rename") c.rename = v.get<bool>();
      else if (key == "refactor") c.refactor = v.get<bool>();
      else if (key == "windows") {
        c.windows.clear();
        for (const auto& w : strings(v)) c.windows.push_back(parse_window(w));
      } else if (key == "backend_url") c.backend_url = v.get<std::string>();
      else if (key == "mock") c.mock_path = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "parallelism") c.parallelism = v.get<std::size_t>();
      else if (key == "top_k") c.top_k = v.get<std::size_t>();
      else if (key == "max_retries") c.max_retries = v.get<std::size_t>();
      else if (key == "failure_budget") c.failure_budget = v.get<std::size_t>();
      else if (key == "restrict_to_operators") c.restrict_to_operators = v.get<bool>();
      else if (key == "oracle_trials") c.oracle_trials = v.get<std::size_t>();
      else if (key == "baseline_runs") c.baseline_runs = v.get<std::size_t>();
      else if (key == "prior") c.prior = prior_from_json(v);
      else if (key == "sample_pairs") c.sample_pairs = v.get<std::size_t>();
      else if (key == "unit_normalize") c.unit_normalize = v.get<bool>();
      else if (key == "placeholder") c.placeholder = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

std::unique_ptr<Backend> make_backend(const RunConfig& c) {
  if (!c.mock_path.empty()) return std::make_unique<MockBackend>(MockBackend::from_file(c.mock_path));
  if (!c.backend_url.empty()) {
    HttpOptions options;
    options.placeholder = c.placeholder;
    return std::make_unique<HttpBackend>(c.backend_url, options);
  }
  throw ConfigError("no backend: set a mock file or a backend URL");
}

// ------------------------------------------------------------ transform

UnitTransforms transform_unit(const SourceUnit& unit, const RunConfig& config) {
  UnitTransforms out;
  SourceUnit base = unit;
  SyntaxTree tree;
  try {
    tree = parse(unit.code);
    if (config.rename) {
      base.code = rename_locals(unit).code;
      tree = parse(base.code);
    }
  } catch (const SyntaxError& e) {
    out.skipped.push_back(std::string("unit: ") + e.what());
    return out;
  } catch (const ShadowingUnsupported& e) {
    out.skipped.push_back(std::string("unit: ") + e.what());
    return out;
  }

  auto emit = [&](TransformedPair pair, const TransformSite& base_site, bool refactored) {
    pair.unit_id = unit.id;
    pair.renamed = config.rename;
    pair.refactored = refactored;
    pair.pair_id = make_pair_id(unit.id, pair.transform, base_site) +
                   pair_suffix(config.rename, refactored);
    auto oracle = run_oracle(pair, config);
    const bool equivalent = pair.transform != TransformKind::NonEquivalentBlockSwap;
    if (equivalent && oracle.status == OracleOutcome::Status::Counterexample) {
      ++out.rejected;
      out.skipped.push_back(pair.pair_id + ": rejected by oracle");
      return;
    }
    out.pairs.push_back(std::move(pair));
    out.oracle.push_back(std::move(oracle));
  };

  const bool want_block = selected(config, TransformKind::BlockSwap);
  const bool want_distractor =
      selected(config, TransformKind::NonEquivalentBlockSwap) || (want_block && config.distractors);
  if (want_block || want_distractor) {
    const auto sites = find_block_swap_sites(tree, unit.id);
    out.block_sites = sites.size();
    for (const auto& site : sites) {
      SourceUnit work = base;
      TransformSite s = site;
      if (config.refactor) {
        try {
          auto r = refactor_condition(base, site);
          work.code = std::move(r.code);
          s = r.site;
        } catch (const IneligibleSite& e) {
          out.skipped.push_back(make_pair_id(unit.id, TransformKind::BlockSwap, site) + ": " + e.what());
          continue;
        }
      }
      if (want_block) emit(block_swap(work, s), site, config.refactor);
      if (want_distractor) emit(non_equivalent_block_swap(work, s), site, config.refactor);
    }
  }
  if (selected(config, TransformKind::OperandSwap)) {
    const auto sites = find_operand_swap_sites(tree, unit.id);
    out.operand_sites = sites.size();
    if (config.refactor) {
      if (!sites.empty()) out.skipped.push_back("operand swap: not combined with refactoring");
    } else {
      for (const auto& site : sites) emit(operand_swap(base, site), site, false);
    }
  }
  return out;
}

TransformStats cmd_transform(const RunConfig& config) {
  ensure_out_dir(config);
  const auto units = load_all(config.corpus, config.load);
  if (units.empty()) log(LogLevel::Warn, "empty corpus; writing empty outputs");

  const auto results = parallel_map<UnitTransforms>(
      units.size(), config.parallelism, [&](std::size_t i) { return transform_unit(units[i], config); });

  TransformStats stats;
  stats.units = units.size();
  std::vector<Json> rows;
  Json skipped = Json::array();
  std::map<std::string, std::size_t> by_transform;
  std::size_t block_sites = 0, operand_sites = 0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& r = results[i];
    block_sites += r.block_sites;
    operand_sites += r.operand_sites;
    stats.rejected_by_oracle += r.rejected;
    if (r.pairs.empty() && !r.skipped.empty() && r.skipped.front().rfind("unit:", 0) == 0)
      ++stats.skipped_units;
    for (const auto& reason : r.skipped) skipped.push_back(Json{{"unit_id", units[i].id}, {"reason", reason}});
    for (std::size_t k = 0; k < r.pairs.size(); ++k) {
      const auto& o = r.oracle[k];
      switch (o.status) {
        case OracleOutcome::Status::Agree: ++stats.agree; break;
        case OracleOutcome::Status::Unverified: ++stats.unverified; break;
        case OracleOutcome::Status::Counterexample: ++stats.counterexample; break;
      }
      ++by_transform[std::string(to_string(r.pairs[k].transform))];
      rows.push_back(to_json(r.pairs[k], &o));
    }
  }
  stats.pairs = rows.size();
  if (stats.rejected_by_oracle > 0)
    log(LogLevel::Error, std::to_string(stats.rejected_by_oracle) + " pairs rejected by the oracle");

  Json summary;
  summary["units"] = stats.units;
  summary["skipped_units"] = stats.skipped_units;
  summary["sites"] = Json{{"block_swap", block_sites}, {"operand_swap", operand_sites}};
  Json pairs_json = Json::object();
  for (const auto& [k, n] : by_transform) pairs_json[k] = n;
  summary["pairs"] = pairs_json;
  summary["oracle"] = Json{{"trials", config.oracle_trials},
                           {"agree", stats.agree},
                           {"unverified", stats.unverified},
                           {"counterexample", stats.counterexample},
                           {"rejected", stats.rejected_by_oracle}};
  summary["skipped"] = skipped;
  write_text(out_path(config, files::kPairs), to_jsonl(rows));
  write_text(out_path(config, files::kTransformSummary), summary.dump(2) + "\n");
  log(LogLevel::Info, "wrote " + std::to_string(stats.pairs) + " pairs");
  return stats;
}

// ------------------------------------------------------------ probe

std::size_t cmd_probe(const RunConfig& config) {
  ensure_out_dir(config);
  std::vector<TransformedPair> pairs;
  for (auto& p : read_pairs(config, true)) {
    if (selected(config, p.transform)) pairs.push_back(std::move(p));
  }
  if (config.sample_pairs > 0 && config.sample_pairs < pairs.size()) {
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    Rng rng(derive_seed(config.seed, "sample"));
    for (std::size_t i = 0; i < config.sample_pairs; ++i) {
      const auto j = static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(pairs.size()) - 1));
      std::swap(pairs[i], pairs[j]);
    }
    pairs.resize(config.sample_pairs);
  }
  const auto probes = build_probe_set(pairs, config.windows, config.placeholder);
  std::vector<Json> rows;
  rows.reserve(probes.size());
  for (const auto& p : probes) rows.push_back(to_json(p));
  write_text(out_path(config, files::kProbes), to_jsonl(rows));
  log(LogLevel::Info, "wrote " + std::to_string(probes.size()) + " probes for " +
                          std::to_string(pairs.size()) + " pairs");
  return probes.size();
}

// ------------------------------------------------------------ evaluate

EvalSummary cmd_evaluate(const RunConfig& config) {
  ensure_out_dir(config);
  std::vector<ProbeInstance> probes;
  for (const auto& row : read_jsonl(out_path(config, files::kProbes))) probes.push_back(probe_from_json(row));
  auto backend = make_backend(config);

  BatchOptions options;
  options.parallelism = config.parallelism;
  options.top_k = config.top_k;
  options.max_retries = config.max_retries;
  options.failure_budget = config.failure_budget;
  const auto batch = run_batch(*backend, probes, options);
  if (batch.nondeterministic > 0)
    log(LogLevel::Warn, std::to_string(batch.nondeterministic) + " duplicate requests disagreed");

  std::vector<Json> prediction_rows;
  for (const auto& p : batch.predictions) {
    if (p) prediction_rows.push_back(to_json(*p));
  }

  // Pair up the two variants of each (pair, window).
  std::map<std::pair<std::string, std::string>, std::array<std::optional<std::size_t>, 2>> slots;
  std::vector<std::pair<std::string, std::string>> order;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto key = std::make_pair(probes[i].pair_id, to_string(probes[i].window));
    auto [it, fresh] = slots.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second[probes[i].variant == Variant::Original ? 0 : 1] = i;
  }
  std::vector<EvalRecord> records;
  std::vector<Json> record_rows;
  std::map<std::string, std::size_t> excluded;
  for (const auto& key : order) {
    const auto& slot = slots[key];
    if (!slot[0] || !slot[1]) throw DataError("probe set lacks a variant for " + key.first);
    const auto& po = probes[*slot[0]];
    const auto& pt = probes[*slot[1]];
    EvalRecord r;
    const auto& ao = batch.predictions[*slot[0]];
    const auto& at = batch.predictions[*slot[1]];
    if (ao && at) {
      r = make_record(po, *ao, pt, *at, config.restrict_to_operators);
    } else {
      r.pair_id = po.pair_id;
      r.transform = po.transform;
      r.window = po.window;
      r.renamed = po.renamed;
      r.refactored = po.refactored;
      r.original_op = po.ground_truth;
      r.transformed_op = pt.ground_truth;
      r.excluded = true;
      r.exclusion_reason = "backend_failure";
    }
    if (r.excluded) ++excluded[r.exclusion_reason];
    record_rows.push_back(to_json(r));
    records.push_back(std::move(r));
  }

  Json summary;
  EvalSummary overall;
  try {
    overall = score(records);
  } catch (const EmptyInput& e) {
    throw DataError(std::string("evaluate: ") + e.what());
  }
  summary["overall"] = to_json(overall);
  Json groups = Json::array();
  std::string csv = "transform,window,renamed,refactored,operator,swapped,tp,fp,fn,precision,recall,f_score\n";
  std::string md;
  for (const auto& [key, rs] : group_records(records)) {
    Json g = key.json();
    try {
      g["summary"] = to_json(score(rs));
    } catch (const EmptyInput&) {
      g["summary"] = nullptr;
    }
    groups.push_back(g);
    std::vector<std::vector<std::string>> md_rows;
    for (Variant v : {Variant::Original, Variant::Transformed}) {
      for (const auto& row : per_operator_confusion(rs, v)) {
        const std::string op = row.op ? std::string(surface(*row.op)) : "overall";
        csv += std::string(to_string(key.transform)) + "," + csv_field(key.window) + "," +
               (key.renamed ? "true" : "false") + "," + (key.refactored ? "true" : "false") + "," +
               op + "," + (row.swapped ? "true" : "false") + "," + std::to_string(row.tp) + "," +
               std::to_string(row.fp) + "," + std::to_string(row.fn) + "," +
               format_fixed(row.precision, 4) + "," + format_fixed(row.recall, 4) + "," +
               format_fixed(row.f_score, 4) + "\n";
        md_rows.push_back({op, row.swapped ? "yes" : "no", std::to_string(row.tp), std::to_string(row.fp),
                           std::to_string(row.fn), format_fixed(row.precision, 2),
                           format_fixed(row.recall, 2), format_fixed(row.f_score, 2)});
      }
    }
    md += "## " + key.label() + "\n\n" +
          md_table({"Operator", "Swapped", "TP", "FP", "FN", "Precision", "Recall", "F"}, md_rows) + "\n";
  }
  summary["groups"] = groups;
  Json ex = Json::object();
  for (const auto& [reason, n] : excluded) ex[reason] = n;
  summary["excluded"] = ex;
  summary["batch"] = Json{{"requests", probes.size()},
                          {"failures", batch.failures},
                          {"duplicate_checks", batch.duplicate_checks},
                          {"nondeterministic", batch.nondeterministic}};

  write_text(out_path(config, files::kPredictions), to_jsonl(prediction_rows));
  write_text(out_path(config, files::kRecords), to_jsonl(record_rows));
  write_text(out_path(config, files::kSummary), summary.dump(2) + "\n");
  write_text(out_path(config, files::kConfusionCsv), csv);
  write_text(out_path(config, files::kConfusionMd), md);
  return overall;
}

// ------------------------------------------------------------ baseline

BaselineOutcome cmd_baseline(const RunConfig& config) {
  ensure_out_dir(config);
  Prior prior{};
  if (config.prior) {
    prior = *config.prior;
  } else if (!config.train_corpus.empty()) {
    prior = estimate_prior(load_all(config.train_corpus, config.load, Split::Train));
  } else {
    throw ConfigError("baseline needs a prior or a training corpus");
  }
  validate_prior(prior);
  const auto records = read_records(config);

  auto run_group = [&](const std::string& label, const std::vector<EvalRecord>& rs, Json& out) {
    std::vector<ComparisonOp> truths;
    for (const auto& r : rs) {
      if (!r.excluded) truths.push_back(r.transformed_op);
    }
    if (truths.empty()) throw DataError("baseline: no scored records in " + label);
    const auto summary = score(rs);
    const auto outcome =
        monte_carlo_baseline(truths, prior, config.baseline_runs, derive_seed(config.seed, "baseline/" + label),
                             {summary.acc_original, summary.acc_transformed, summary.acc_both});
    std::map<ComparisonOp, double> model_f;
    for (const auto& row : per_operator_confusion(rs, Variant::Transformed)) {
      if (row.op && row.tp + row.fn > 0) model_f[*row.op] = row.f_score;
    }
    const auto per_op = per_operator_mc(truths, prior, config.baseline_runs,
                                        derive_seed(config.seed, "per_operator_mc/" + label), model_f);
    out["truths"] = truths.size();
    out["expected_accuracy"] = expected_accuracy(truths, prior);
    out["mean_accuracy"] = outcome.mean_accuracy;
    out["max_accuracy"] = outcome.max_accuracy;
    out["seed"] = outcome.seed;
    out["p_values"] = Json{{"acc_original", Json::array({summary.acc_original, outcome.p_value_vs[0].second})},
                           {"acc_transformed", Json::array({summary.acc_transformed, outcome.p_value_vs[1].second})},
                           {"acc_both", Json::array({summary.acc_both, outcome.p_value_vs[2].second})}};
    Json ops = Json::object();
    for (const auto& [op, p] : per_op)
      ops[std::string(surface(op))] = Json{{"model_f", model_f[op]}, {"p", p}};
    out["per_operator"] = ops;
    out["accuracies"] = outcome.accuracies;
    return outcome;
  };

  Json doc;
  doc["prior"] = prior_to_json(prior);
  doc["runs"] = config.baseline_runs;
  Json overall;
  const auto outcome = run_group("overall", records, overall);
  doc["overall"] = overall;
  Json groups = Json::array();
  for (const auto& [key, rs] : group_records(records)) {
    Json g = key.json();
    try {
      run_group(key.label(), rs, g);
    } catch (const DataError&) {
      continue;
    } catch (const EmptyInput&) {
      continue;
    }
    groups.push_back(g);
  }
  doc["groups"] = groups;
  write_text(out_path(config, files::kBaseline), doc.dump(2) + "\n");
  return outcome;
}

// ------------------------------------------------------------ embed study

DistanceStudy cmd_embed_study(const RunConfig& config) {
  ensure_out_dir(config);
  const auto pairs = read_pairs(config, true);
  // A triple needs the equivalent and the distractor rewrite of one site.
  std::map<std::string, std::array<const TransformedPair*, 2>> by_site;
  std::vector<std::string> order;
  for (const auto& p : pairs) {
    if (p.transform == TransformKind::OperandSwap) continue;
    const std::string key = p.unit_id + "@" + std::to_string(p.site.operator_span.start) + "/" +
                            pair_suffix(p.renamed, p.refactored);
    auto [it, fresh] = by_site.try_emplace(key, std::array<const TransformedPair*, 2>{nullptr, nullptr});
    if (fresh) order.push_back(key);
    it->second[p.transform == TransformKind::BlockSwap ? 0 : 1] = &p;
  }
  std::vector<std::array<const TransformedPair*, 2>> triples;
  for (const auto& key : order) {
    const auto& t = by_site[key];
    if (t[0] && t[1]) triples.push_back(t);
  }

  auto backend = make_backend(config);
  std::unordered_map<std::string, EmbeddingVector> cache;
  auto embed = [&](const std::string& code) -> const EmbeddingVector& {
    auto it = cache.find(code);
    if (it == cache.end()) it = cache.emplace(code, backend->embed(code)).first;
    return it->second;
  };
  std::vector<std::pair<double, double>> distances;
  Json rows = Json::array();
  for (const auto& t : triples) {
    const auto& original = embed(t[0]->original_code);
    const double de = euclidean(original, embed(t[0]->transformed_code), config.unit_normalize);
    const double dn = euclidean(original, embed(t[1]->transformed_code), config.unit_normalize);
    distances.emplace_back(de, dn);
    rows.push_back(Json{{"pair_id", t[0]->pair_id}, {"d_equivalent", de}, {"d_nonequivalent", dn}});
  }
  if (distances.empty()) throw TooFewPairs("no (original, equivalent, non-equivalent) triples");
  const auto study = distance_study(distances);
  Json doc;
  doc["triples"] = distances.size();
  doc["tested"] = study.n_tested;
  doc["unit_normalize"] = config.unit_normalize;
  doc["mean_equivalent"] = study.mean_equivalent;
  doc["mean_nonequivalent"] = study.mean_nonequivalent;
  doc["p_value"] = study.p_value;
  doc["rows"] = rows;
  write_text(out_path(config, files::kDistance), doc.dump(2) + "\n");
  return study;
}

// ------------------------------------------------------------ familiarity

FamiliarityReport cmd_familiarity(const RunConfig& config) {
  ensure_out_dir(config);
  if (config.train_corpus.empty()) throw ConfigError("familiarity needs a training corpus");
  const CorpusIndex index(load_all(config.train_corpus, config.load, Split::Train));
  std::vector<TransformedPair> pairs;
  for (auto& p : read_pairs(config, false)) {
    if (selected(config, p.transform)) pairs.push_back(std::move(p));
  }
  std::vector<EvalRecord> records;
  if (fs::exists(out_path(config, files::kRecords))) {
    for (auto& r : read_records(config)) {
      if (r.window.complete()) records.push_back(std::move(r));
    }
  }
  const auto report = familiarity_groups(index, pairs, records);
  std::string csv =
      "original_found,transformed_found,pairs,fraction,scored,acc_original,acc_transformed,acc_both,"
      "mean_entropy_original,mean_entropy_transformed\n";
  for (std::size_t g = 0; g < 4; ++g) {
    const auto& group = report.groups[g];
    csv += std::string(group.original_found ? "yes" : "no") + "," +
           (group.transformed_found ? "yes" : "no") + "," + std::to_string(group.pair_ids.size()) +
           "," + format_fixed(report.fraction(g), 4) + ",";
    if (group.summary) {
      const auto& s = *group.summary;
      csv += std::to_string(s.n) + "," + format_fixed(s.acc_original, 4) + "," +
             format_fixed(s.acc_transformed, 4) + "," + format_fixed(s.acc_both, 4) + "," +
             format_fixed(s.mean_entropy_original, 4) + "," + format_fixed(s.mean_entropy_transformed, 4);
    } else {
      csv += "0,,,,,";
    }
    csv += "\n";
  }
  write_text(out_path(config, files::kFamiliarity), csv);
  log(LogLevel::Info, "raw condition hits: original " + std::to_string(report.raw_original_hits) +
                          ", transformed " + std::to_string(report.raw_transformed_hits));
  return report;
}

// ------------------------------------------------------------ report

std::string cmd_report(const RunConfig& config) {
  auto load_json = [&](const char* name) -> std::optional<Json> {
    const auto path = out_path(config, name);
    if (!fs::exists(path)) return std::nullopt;
    try {
      return Json::parse(read_text(path));
    } catch (const Json::exception& e) {
      throw DataError(path + ": " + e.what());
    }
  };
  const std::string not_run = "_not run_\n";
  std::string md = "# Metamorphic probing report\n\n";

  md += "## Transform\n\n";
  if (auto t = load_json(files::kTransformSummary)) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& [kind, n] : (*t)["pairs"].items()) rows.push_back({kind, std::to_string(n.get<std::size_t>())});
    const auto& o = (*t)["oracle"];
    md += "Units: " + std::to_string((*t)["units"].get<std::size_t>()) +
          ". Block-swap sites: " + std::to_string((*t)["sites"]["block_swap"].get<std::size_t>()) +
          ". Operand-swap sites: " + std::to_string((*t)["sites"]["operand_swap"].get<std::size_t>()) +
          ". Oracle: " + std::to_string(o["agree"].get<std::size_t>()) + " agree, " +
          std::to_string(o["unverified"].get<std::size_t>()) + " unverified, " +
          std::to_string(o["counterexample"].get<std::size_t>()) + " with counterexample, " +
          std::to_string(o["rejected"].get<std::size_t>()) + " rejected.\n\n";
    md += md_table({"Transform", "Pairs"}, rows);
  } else {
    md += not_run;
  }

  md += "\n## Accuracy\n\n";
  if (auto s = load_json(files::kSummary)) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& g : (*s)["groups"]) {
      if (g["summary"].is_null()) continue;
      const auto& m = g["summary"];
      rows.push_back({g["transform"].get<std::string>(), g["window"].get<std::string>(),
                      g["renamed"].get<bool>() ? "yes" : "no", g["refactored"].get<bool>() ? "yes" : "no",
                      std::to_string(m["n"].get<std::size_t>()),
                      format_fixed(100 * m["acc_original"].get<double>(), 2),
                      format_fixed(100 * m["acc_transformed"].get<double>(), 2),
                      format_fixed(100 * m["acc_both"].get<double>(), 2),
                      format_fixed(m["mean_entropy_original"].get<double>(), 2),
                      format_fixed(m["mean_entropy_transformed"].get<double>(), 2)});
    }
    md += md_table({"Transform", "Window", "Renamed", "Refactored", "N", "Original %", "Transformed %",
                    "Both %", "Entropy original", "Entropy transformed"},
                   rows);
  } else {
    md += not_run;
  }

  md += "\n## Monte-Carlo baseline\n\n";
  if (auto b = load_json(files::kBaseline)) {
    std::vector<std::vector<std::string>> rows;
    auto add = [&](const std::string& label, const Json& g) {
      rows.push_back({label, std::to_string(g["truths"].get<std::size_t>()),
                      format_fixed(100 * g["expected_accuracy"].get<double>(), 2),
                      format_fixed(100 * g["mean_accuracy"].get<double>(), 2),
                      format_fixed(100 * g["max_accuracy"].get<double>(), 2),
                      format_fixed(100 * g["p_values"]["acc_both"][0].get<double>(), 2),
                      format_fixed(g["p_values"]["acc_both"][1].get<double>(), 4)});
    };
    add("overall", (*b)["overall"]);
    for (const auto& g : (*b)["groups"]) {
      add(g["transform"].get<std::string>() + " " + g["window"].get<std::string>() +
              pair_suffix(g["renamed"].get<bool>(), g["refactored"].get<bool>()),
          g);
    }
    md += "Runs: " + std::to_string((*b)["runs"].get<std::size_t>()) + ".\n\n";
    md += md_table({"Group", "Truths", "Expected %", "Mean %", "Max %", "Model both %", "p"}, rows);
  } else {
    md += not_run;
  }

  md += "\n## Embedding distance\n\n";
  if (auto d = load_json(files::kDistance)) {
    md += md_table({"Triples", "Mean d(original, equivalent)", "Mean d(original, non-equivalent)",
                    "One-sided Wilcoxon p"},
                   {{std::to_string((*d)["triples"].get<std::size_t>()),
                     Json((*d)["mean_equivalent"]).dump(), Json((*d)["mean_nonequivalent"]).dump(),
                     Json((*d)["p_value"]).dump()}});
  } else {
    md += not_run;
  }

  md += "\n## Training-corpus familiarity\n\n";
  const auto fam_path = out_path(config, files::kFamiliarity);
  if (fs::exists(fam_path)) {
    const auto text = read_text(fam_path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::vector<std::string> cells;
      std::size_t c = pos;
      while (true) {
        const auto comma = text.find(',', c);
        if (comma == std::string::npos || comma > end) {
          cells.push_back(text.substr(c, end - c));
          break;
        }
        cells.push_back(text.substr(c, comma - c));
        c = comma + 1;
      }
      if (header.empty()) {
        header = std::move(cells);
      } else {
        rows.push_back(std::move(cells));
      }
      pos = end + 1;
    }
    md += md_table(header, rows);
  } else {
    md += not_run;
  }

  ensure_out_dir(config);
  write_text(out_path(config, files::kReport), md);
  return md;
}

}  // namespace metaprobe
