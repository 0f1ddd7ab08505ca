// Python bindings. Structured results cross the boundary as JSON text and
// are decoded by the metaprobe package.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metaprobe/log.hpp"
#include "metaprobe/pipeline.hpp"

namespace py = pybind11;
using namespace metaprobe;

namespace {

ComparisonOp op_arg(const std::string& text) {
  const auto op = parse_op(text);
  if (!op) throw py::value_error("not a comparison operator: " + text);
  return *op;
}

std::string sites(const std::string& code, const std::string& kind, const std::string& unit_id) {
  const auto tree = parse(code);
  std::vector<TransformSite> found;
  if (kind == "block_swap") {
    found = find_block_swap_sites(tree, unit_id);
  } else if (kind == "operand_swap") {
    found = find_operand_swap_sites(tree, unit_id);
  } else {
    throw py::value_error("kind must be block_swap or operand_swap");
  }
  Json out = Json::array();
  for (const auto& s : found) out.push_back(to_json(s));
  return out.dump();
}

std::string transform(const std::string& code, const std::string& unit_id,
                      const std::vector<std::string>& kinds, bool distractors, bool rename,
                      bool refactor, std::size_t oracle_trials, std::uint64_t seed) {
  RunConfig c;
  c.transforms.clear();
  for (const auto& k : kinds) {
    const auto kind = parse_transform_kind(k);
    if (!kind) throw py::value_error("unknown transform: " + k);
    c.transforms.push_back(*kind);
  }
  c.distractors = distractors;
  c.rename = rename;
  c.refactor = refactor;
  c.oracle_trials = oracle_trials;
  c.seed = seed;
  const auto r = transform_unit(SourceUnit{unit_id, code, Split::Test}, c);
  Json pairs = Json::array();
  for (std::size_t i = 0; i < r.pairs.size(); ++i) pairs.push_back(to_json(r.pairs[i], &r.oracle[i]));
  Json out;
  out["pairs"] = pairs;
  out["skipped"] = r.skipped;
  out["block_sites"] = r.block_sites;
  out["operand_sites"] = r.operand_sites;
  out["rejected"] = r.rejected;
  return out.dump();
}

std::string window(const std::string& masked, const std::string& spec, const std::string& placeholder) {
  return apply_window(masked, find_mask_token(masked, placeholder), parse_window(spec), placeholder);
}

std::string wilcoxon(const std::vector<std::pair<double, double>>& pairs) {
  const auto w = wilcoxon_one_sided(pairs);
  return Json{{"n", w.n}, {"w_plus", w.w_plus}, {"p_value", w.p_value}, {"exact", w.exact}}.dump();
}

std::string baseline(const std::vector<std::string>& truths, const std::vector<double>& prior,
                     std::size_t runs, std::uint64_t seed) {
  if (prior.size() != 6) throw py::value_error("prior needs 6 probabilities (== != < <= > >=)");
  std::vector<ComparisonOp> ops;
  for (const auto& t : truths) ops.push_back(op_arg(t));
  Prior p;
  std::copy(prior.begin(), prior.end(), p.begin());
  const auto b = monte_carlo_baseline(ops, p, runs, seed);
  return Json{{"runs", b.runs}, {"seed", b.seed}, {"mean_accuracy", b.mean_accuracy},
              {"max_accuracy", b.max_accuracy}, {"expected_accuracy", expected_accuracy(ops, p)}}
      .dump();
}

std::string run_stage(const std::string& stage, const std::string& config_json) {
  RunConfig c;
  Json j;
  try {
    j = Json::parse(config_json);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  apply_config_json(c, j);
  py::gil_scoped_release release;
  if (stage == "transform") {
    cmd_transform(c);
  } else if (stage == "probe") {
    cmd_probe(c);
  } else if (stage == "evaluate") {
    cmd_evaluate(c);
  } else if (stage == "baseline") {
    cmd_baseline(c);
  } else if (stage == "embed-study") {
    cmd_embed_study(c);
  } else if (stage == "familiarity") {
    cmd_familiarity(c);
  } else if (stage == "report") {
    return cmd_report(c);
  } else {
    throw ConfigError("unknown stage: " + stage);
  }
  return "";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  set_log_level(LogLevel::Warn);

  auto base = py::register_exception<Error>(m, "MetaprobeError", PyExc_RuntimeError);
  py::register_exception<SyntaxError>(m, "SyntaxError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<SpanMismatch>(m, "SpanMismatch", base.ptr());
  py::register_exception<TooFewPairs>(m, "TooFewPairs", base.ptr());
  py::register_exception<BackendUnavailable>(m, "BackendUnavailable", base.ptr());

  m.def("negate", [](const std::string& op) { return std::string(surface(negate(op_arg(op)))); });
  m.def("mirror", [](const std::string& op) { return std::string(surface(mirror(op_arg(op)))); });
  m.def("sites", &sites, py::arg("code"), py::arg("kind"), py::arg("unit_id") = "unit");
  m.def("transform", &transform, py::arg("code"), py::arg("unit_id"), py::arg("kinds"),
        py::arg("distractors"), py::arg("rename"), py::arg("refactor"), py::arg("oracle_trials"),
        py::arg("seed"));
  m.def(
      "mask",
      [](const std::string& code, std::size_t start, std::size_t end, const std::string& placeholder) {
        return mask_operator(code, ByteSpan{start, end}, placeholder);
      },
      py::arg("code"), py::arg("start"), py::arg("end"), py::arg("placeholder") = std::string(kDefaultPlaceholder));
  m.def("window", &window, py::arg("masked"), py::arg("spec"),
        py::arg("placeholder") = std::string(kDefaultPlaceholder));
  m.def("entropy", &entropy_of, py::arg("p"));
  m.def("wilcoxon", &wilcoxon, py::arg("pairs"));
  m.def("baseline", &baseline, py::arg("truths"), py::arg("prior"), py::arg("runs"), py::arg("seed"));
  m.def("run_stage", &run_stage, py::arg("stage"), py::arg("config_json"));
}
