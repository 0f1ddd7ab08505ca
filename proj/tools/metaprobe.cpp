// Command-line driver for the probing pipeline.

#include <cstdlib>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "metaprobe/log.hpp"
#include "metaprobe/pipeline.hpp"

namespace mp = metaprobe;

namespace {

enum Exit { kOk = 0, kConfig = 1, kBackend = 2, kData = 3 };

struct Flags {
  std::string config_file;
  std::vector<std::string> corpus;
  std::vector<std::string> train_corpus;
  std::vector<std::string> transforms;
  std::vector<std::string> windows;
  std::optional<bool> distractors;
  bool rename = false;
  bool refactor = false;
  std::string backend_url;
  std::string mock;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<std::size_t> parallelism;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> max_retries;
  std::optional<std::size_t> failure_budget;
  bool restrict_ops = false;
  std::optional<std::size_t> oracle_trials;
  std::optional<std::size_t> baseline_runs;
  std::optional<std::size_t> sample_pairs;
  bool unit_normalize = false;
  std::string code_field;
  std::string id_field;
  bool verbose = false;
  bool quiet = false;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("-c,--config", f.config_file, "JSON config file; flags override it");
  app.add_option("--corpus", f.corpus, "JSONL(.gz) corpus files to transform");
  app.add_option("--train-corpus", f.train_corpus, "Training-split JSONL(.gz) files");
  app.add_option("--transform", f.transforms, "block_swap, operand_swap, non_equivalent_block_swap");
  app.add_option("--window", f.windows, "Context window: complete, ±k, +-k or +k");
  app.add_option("--distractors", f.distractors, "Emit non-equivalent block swaps (true/false)");
  app.add_flag("--rename", f.rename, "Rename parameters and locals to var1, var2, ...");
  app.add_flag("--refactor", f.refactor, "Hoist the condition into a boolean variable");
  app.add_option("--backend-url", f.backend_url, "Model server base URL");
  app.add_option("--mock", f.mock, "Mock backend JSON file");
  app.add_option("--seed", f.seed);
  app.add_option("-o,--out", f.out_dir, "Output directory");
  app.add_option("-j,--parallelism", f.parallelism);
  app.add_option("--top-k", f.top_k);
  app.add_option("--max-retries", f.max_retries);
  app.add_option("--failure-budget", f.failure_budget);
  app.add_flag("--restrict-to-operators", f.restrict_ops, "Top-1 among the six operators only");
  app.add_option("--oracle-trials", f.oracle_trials);
  app.add_option("--baseline-runs", f.baseline_runs);
  app.add_option("--sample-pairs", f.sample_pairs, "Random subset of pairs to probe (0 = all)");
  app.add_flag("--unit-normalize", f.unit_normalize, "Normalize embeddings before distances");
  app.add_option("--code-field", f.code_field);
  app.add_option("--id-field", f.id_field);
  app.add_flag("-v,--verbose", f.verbose);
  app.add_flag("-q,--quiet", f.quiet);
}

mp::RunConfig resolve(const Flags& f) {
  mp::RunConfig c;
  if (!f.config_file.empty()) {
    mp::Json j;
    try {
      j = mp::Json::parse(mp::read_text(f.config_file));
    } catch (const mp::Json::exception& e) {
      throw mp::ConfigError(f.config_file + ": " + e.what());
    } catch (const mp::IoError& e) {
      throw mp::ConfigError(e.what());
    }
    mp::apply_config_json(c, j);
  }
  if (const char* url = std::getenv("METAPROBE_BACKEND_URL"); url && *url && c.backend_url.empty())
    c.backend_url = url;

  if (!f.corpus.empty()) c.corpus = f.corpus;
  if (!f.train_corpus.empty()) c.train_corpus = f.train_corpus;
  if (!f.transforms.empty()) {
    c.transforms.clear();
    for (const auto& name : f.transforms) {
      const auto k = mp::parse_transform_kind(name);
      if (!k) throw mp::ConfigError("unknown transform '" + name + "'");
      c.transforms.push_back(*k);
    }
  }
  if (!f.windows.empty()) {
    c.windows.clear();
    for (const auto& w : f.windows) c.windows.push_back(mp::parse_window(w));
  }
  if (f.distractors) c.distractors = *f.distractors;
  if (f.rename) c.rename = true;
  if (f.refactor) c.refactor = true;
  if (!f.backend_url.empty()) c.backend_url = f.backend_url;
  if (!f.mock.empty()) c.mock_path = f.mock;
  if (f.seed) c.seed = *f.seed;
  if (!f.out_dir.empty()) c.out_dir = f.out_dir;
  if (f.parallelism) c.parallelism = *f.parallelism;
  if (f.top_k) c.top_k = *f.top_k;
  if (f.max_retries) c.max_retries = *f.max_retries;
  if (f.failure_budget) c.failure_budget = *f.failure_budget;
  if (f.restrict_ops) c.restrict_to_operators = true;
  if (f.oracle_trials) c.oracle_trials = *f.oracle_trials;
  if (f.baseline_runs) c.baseline_runs = *f.baseline_runs;
  if (f.sample_pairs) c.sample_pairs = *f.sample_pairs;
  if (f.unit_normalize) c.unit_normalize = true;
  if (!f.code_field.empty()) c.load.code_field = f.code_field;
  if (!f.id_field.empty()) c.load.id_field = f.id_field;
  if (c.parallelism == 0) throw mp::ConfigError("parallelism must be at least 1");
  if (c.top_k == 0) throw mp::ConfigError("top-k must be at least 1");
  return c;
}

int run(const std::string& command, const mp::RunConfig& c) {
  if (command == "transform") {
    if (c.corpus.empty()) throw mp::ConfigError("transform needs --corpus");
    const auto s = mp::cmd_transform(c);
    std::cerr << "pairs: " << s.pairs << " (agree " << s.agree << ", unverified " << s.unverified
              << ", counterexample " << s.counterexample << ", rejected " << s.rejected_by_oracle << ")\n";
  } else if (command == "probe") {
    std::cerr << "probes: " << mp::cmd_probe(c) << "\n";
  } else if (command == "evaluate") {
    const auto s = mp::cmd_evaluate(c);
    std::cerr << "scored " << s.n << ", excluded " << s.excluded << ": original "
              << mp::format_fixed(s.acc_original, 4) << ", transformed "
              << mp::format_fixed(s.acc_transformed, 4) << ", both " << mp::format_fixed(s.acc_both, 4)
              << "\n";
  } else if (command == "baseline") {
    const auto b = mp::cmd_baseline(c);
    std::cerr << "baseline mean " << mp::format_fixed(b.mean_accuracy, 4) << ", max "
              << mp::format_fixed(b.max_accuracy, 4) << "\n";
  } else if (command == "embed-study") {
    const auto d = mp::cmd_embed_study(c);
    std::cerr << "triples " << d.triples.size() << ", p " << d.p_value << "\n";
  } else if (command == "familiarity") {
    mp::cmd_familiarity(c);
  } else if (command == "report") {
    mp::cmd_report(c);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metamorphic probing of masked code models"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[][2] = {
      {"transform", "Find sites, rewrite them and check the rewrites"},
      {"probe", "Mask operators and cut context windows"},
      {"evaluate", "Query the backend and score predictions"},
      {"baseline", "Monte-Carlo frequency-prior baseline"},
      {"embed-study", "Embedding distances of equivalent vs non-equivalent rewrites"},
      {"familiarity", "Split pairs by whether their conditions occur in the training corpus"},
      {"report", "Bundle stage outputs into report.md"},
  };
  for (const auto& [name, help] : commands) add_flags(*app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (flags.verbose) mp::set_log_level(mp::LogLevel::Debug);
  if (flags.quiet) mp::set_log_level(mp::LogLevel::Quiet);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, resolve(flags));
  } catch (const mp::ConfigError& e) {
    mp::log(mp::LogLevel::Error, e.what());
    return kConfig;
  } catch (const mp::BadPrior& e) {
    mp::log(mp::LogLevel::Error, e.what());
    return kConfig;
  } catch (const mp::BackendUnavailable& e) {
    mp::log(mp::LogLevel::Error, e.what());
    return kBackend;
  } catch (const mp::ProtocolError& e) {
    mp::log(mp::LogLevel::Error, e.what());
    return kBackend;
  } catch (const mp::Error& e) {
    mp::log(mp::LogLevel::Error, e.what());
    return kData;
  } catch (const std::exception& e) {
    mp::log(mp::LogLevel::Error, e.what());
    return kData;
  }
}
