#include "metaprobe/records.hpp"

#include <fstream>
#include <sstream>

namespace metaprobe {

namespace {

ComparisonOp op_from_json(const Json& j) {
  const auto op = parse_op(j.get<std::string>());
  if (!op) throw DataError("unknown operator " + j.dump());
  return *op;
}

template <typename T, typename F>
T parse_enum(const Json& j, F parse, const char* what) {
  const auto v = parse(j.get<std::string>());
  if (!v) throw DataError(std::string("unknown ") + what + " " + j.dump());
  return *v;
}

Json operand_json(const Operand& o) {
  return Json{{"text", o.text}, {"kind", to_string(o.kind)}, {"span", to_json(o.span)}};
}

Operand operand_from_json(const Json& j) {
  return {j.at("text").get<std::string>(),
          parse_enum<OperandKind>(j.at("kind"), parse_operand_kind, "operand kind"),
          span_from_json(j.at("span"))};
}

Json optional_span(const std::optional<ByteSpan>& s) { return s ? to_json(*s) : Json(nullptr); }

template <typename Fn>
auto guarded(const char* what, Fn fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

std::string_view to_string(OracleOutcome::Status s) {
  switch (s) {
    case OracleOutcome::Status::Agree: return "agree";
    case OracleOutcome::Status::Unverified: return "unverified";
    case OracleOutcome::Status::Counterexample: return "counterexample";
  }
  return "unverified";
}

Json to_json(ByteSpan span) { return Json::array({span.start, span.end}); }

ByteSpan span_from_json(const Json& j) {
  ByteSpan s{j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
  if (s.end < s.start) throw DataError("inverted byte interval " + j.dump());
  return s;
}

Json to_json(const TransformSite& site) {
  Json j;
  j["unit_id"] = site.unit_id;
  j["site_kind"] = to_string(site.site_kind);
  j["operator"] = surface(site.op);
  j["operator_span"] = to_json(site.operator_span);
  j["condition_span"] = to_json(site.condition_span);
  j["then_span"] = optional_span(site.then_span);
  j["else_span"] = optional_span(site.else_span);
  j["left_operand"] = operand_json(site.left);
  j["right_operand"] = operand_json(site.right);
  j["enclosing"] = to_string(site.enclosing);
  j["statement_span"] = to_json(site.statement_span);
  return j;
}

TransformSite site_from_json(const Json& j) {
  return guarded("site", [&] {
    TransformSite s;
    s.unit_id = j.at("unit_id").get<std::string>();
    s.site_kind = parse_enum<SiteKind>(j.at("site_kind"), parse_site_kind, "site kind");
    s.op = op_from_json(j.at("operator"));
    s.operator_span = span_from_json(j.at("operator_span"));
    s.condition_span = span_from_json(j.at("condition_span"));
    if (!j.at("then_span").is_null()) s.then_span = span_from_json(j.at("then_span"));
    if (!j.at("else_span").is_null()) s.else_span = span_from_json(j.at("else_span"));
    s.left = operand_from_json(j.at("left_operand"));
    s.right = operand_from_json(j.at("right_operand"));
    s.enclosing = parse_enum<Enclosing>(j.at("enclosing"), parse_enclosing, "enclosing");
    s.statement_span = span_from_json(j.at("statement_span"));
    return s;
  });
}

Json to_json(const TransformedPair& p, const OracleOutcome* oracle) {
  Json j;
  j["pair_id"] = p.pair_id;
  j["transform"] = to_string(p.transform);
  j["original_code"] = p.original_code;
  j["transformed_code"] = p.transformed_code;
  j["original_op"] = surface(p.original_op);
  j["transformed_op"] = surface(p.transformed_op);
  j["original_mask_span"] = to_json(p.original_mask_span);
  j["transformed_mask_span"] = to_json(p.transformed_mask_span);
  j["provenance"] = Json{{"unit_id", p.unit_id},
                         {"site", to_json(p.site)},
                         {"transformed_site", to_json(p.transformed_site)}};
  j["renamed"] = p.renamed;
  j["refactored"] = p.refactored;
  if (oracle) {
    Json o;
    o["status"] = to_string(oracle->status);
    o["trials"] = oracle->trials;
    o["agreements"] = oracle->agreements;
    if (!oracle->reason.empty()) o["reason"] = oracle->reason;
    if (oracle->counterexample) {
      Json ce = Json::object();
      for (const auto& [k, v] : *oracle->counterexample) ce[k] = v;
      o["counterexample"] = ce;
    }
    j["oracle"] = o;
  }
  return j;
}

TransformedPair pair_from_json(const Json& j) {
  return guarded("pair", [&] {
    TransformedPair p;
    p.pair_id = j.at("pair_id").get<std::string>();
    p.transform = parse_enum<TransformKind>(j.at("transform"), parse_transform_kind, "transform");
    p.original_code = j.at("original_code").get<std::string>();
    p.transformed_code = j.at("transformed_code").get<std::string>();
    p.original_op = op_from_json(j.at("original_op"));
    p.transformed_op = op_from_json(j.at("transformed_op"));
    p.original_mask_span = span_from_json(j.at("original_mask_span"));
    p.transformed_mask_span = span_from_json(j.at("transformed_mask_span"));
    const Json& prov = j.at("provenance");
    p.unit_id = prov.at("unit_id").get<std::string>();
    p.site = site_from_json(prov.at("site"));
    p.transformed_site = site_from_json(prov.at("transformed_site"));
    p.renamed = j.at("renamed").get<bool>();
    p.refactored = j.at("refactored").get<bool>();
    return p;
  });
}

std::optional<OracleOutcome> oracle_from_json(const Json& pair_json) {
  if (!pair_json.contains("oracle")) return std::nullopt;
  return guarded("oracle", [&] {
    const Json& o = pair_json.at("oracle");
    OracleOutcome out;
    const auto status = o.at("status").get<std::string>();
    if (status == "agree") {
      out.status = OracleOutcome::Status::Agree;
    } else if (status == "counterexample") {
      out.status = OracleOutcome::Status::Counterexample;
    } else {
      out.status = OracleOutcome::Status::Unverified;
    }
    out.trials = o.value("trials", std::size_t{0});
    out.agreements = o.value("agreements", std::size_t{0});
    out.reason = o.value("reason", "");
    if (o.contains("counterexample")) {
      Assignment a;
      for (const auto& [k, v] : o.at("counterexample").items()) a[k] = v.get<double>();
      out.counterexample = std::move(a);
    }
    return out;
  });
}

Json to_json(const WindowSpec& w) {
  return Json{{"before", w.before ? Json(*w.before) : Json(nullptr)},
              {"after", w.after ? Json(*w.after) : Json(nullptr)}};
}

WindowSpec window_from_json(const Json& j) {
  WindowSpec w;
  if (!j.at("before").is_null()) w.before = j.at("before").get<std::size_t>();
  if (!j.at("after").is_null()) w.after = j.at("after").get<std::size_t>();
  if ((w.before && *w.before == 0) || (w.after && *w.after == 0))
    throw DataError("window counts must be at least 1");
  return w;
}

Json to_json(const ProbeInstance& p) {
  Json j;
  j["probe_id"] = p.probe_id;
  j["pair_id"] = p.pair_id;
  j["variant"] = to_string(p.variant);
  j["masked_code"] = p.masked_code;
  j["ground_truth"] = surface(p.ground_truth);
  j["window"] = to_json(p.window);
  j["meta"] = Json{{"transform", to_string(p.transform)},
                   {"renamed", p.renamed},
                   {"refactored", p.refactored}};
  return j;
}

ProbeInstance probe_from_json(const Json& j) {
  return guarded("probe", [&] {
    ProbeInstance p;
    p.probe_id = j.at("probe_id").get<std::string>();
    p.pair_id = j.at("pair_id").get<std::string>();
    const auto variant = j.at("variant").get<std::string>();
    if (variant != "original" && variant != "transformed") throw DataError("bad variant " + variant);
    p.variant = variant == "original" ? Variant::Original : Variant::Transformed;
    p.masked_code = j.at("masked_code").get<std::string>();
    p.ground_truth = op_from_json(j.at("ground_truth"));
    p.window = window_from_json(j.at("window"));
    const Json& meta = j.at("meta");
    p.transform = parse_enum<TransformKind>(meta.at("transform"), parse_transform_kind, "transform");
    p.renamed = meta.at("renamed").get<bool>();
    p.refactored = meta.at("refactored").get<bool>();
    return p;
  });
}

Json to_json(const MaskPrediction& p) {
  Json top = Json::array();
  for (const auto& [token, prob] : p.top_k) top.push_back(Json::array({token, prob}));
  return Json{{"probe_id", p.probe_id},
              {"top_k", top},
              {"ground_truth_prob", p.ground_truth_prob},
              {"ground_truth_single_token", p.ground_truth_single_token},
              {"model_id", p.model_id}};
}

MaskPrediction prediction_from_json(const Json& j) {
  return guarded("prediction", [&] {
    MaskPrediction p;
    p.probe_id = j.at("probe_id").get<std::string>();
    for (const auto& item : j.at("top_k"))
      p.top_k.emplace_back(item.at(0).get<std::string>(), item.at(1).get<double>());
    p.ground_truth_prob = j.at("ground_truth_prob").get<double>();
    p.ground_truth_single_token = j.at("ground_truth_single_token").get<bool>();
    p.model_id = j.value("model_id", "");
    return p;
  });
}

Json to_json(const EvalRecord& r) {
  Json j;
  j["pair_id"] = r.pair_id;
  j["transform"] = to_string(r.transform);
  j["window"] = to_json(r.window);
  j["renamed"] = r.renamed;
  j["refactored"] = r.refactored;
  j["original_op"] = surface(r.original_op);
  j["transformed_op"] = surface(r.transformed_op);
  j["original_prediction"] = r.original_prediction;
  j["transformed_prediction"] = r.transformed_prediction;
  j["original_correct"] = r.original_correct;
  j["transformed_correct"] = r.transformed_correct;
  j["original_entropy"] = r.original_entropy;
  j["transformed_entropy"] = r.transformed_entropy;
  j["excluded"] = r.excluded;
  j["exclusion_reason"] = r.excluded ? Json(r.exclusion_reason) : Json(nullptr);
  return j;
}

EvalRecord record_from_json(const Json& j) {
  return guarded("record", [&] {
    EvalRecord r;
    r.pair_id = j.at("pair_id").get<std::string>();
    r.transform = parse_enum<TransformKind>(j.at("transform"), parse_transform_kind, "transform");
    r.window = window_from_json(j.at("window"));
    r.renamed = j.at("renamed").get<bool>();
    r.refactored = j.at("refactored").get<bool>();
    r.original_op = op_from_json(j.at("original_op"));
    r.transformed_op = op_from_json(j.at("transformed_op"));
    r.original_prediction = j.at("original_prediction").get<std::string>();
    r.transformed_prediction = j.at("transformed_prediction").get<std::string>();
    r.original_correct = j.at("original_correct").get<bool>();
    r.transformed_correct = j.at("transformed_correct").get<bool>();
    r.original_entropy = j.at("original_entropy").get<double>();
    r.transformed_entropy = j.at("transformed_entropy").get<double>();
    r.excluded = j.at("excluded").get<bool>();
    if (r.excluded) r.exclusion_reason = j.at("exclusion_reason").get<std::string>();
    return r;
  });
}

Json to_json(const EvalSummary& s) {
  return Json{{"n", s.n},
              {"excluded", s.excluded},
              {"acc_original", s.acc_original},
              {"acc_transformed", s.acc_transformed},
              {"acc_both", s.acc_both},
              {"mean_entropy_original", s.mean_entropy_original},
              {"mean_entropy_transformed", s.mean_entropy_transformed}};
}

Json to_json(const ConfusionRow& r) {
  return Json{{"operator", r.op ? Json(surface(*r.op)) : Json("overall")},
              {"swapped", r.swapped},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn},
              {"precision", r.precision},
              {"recall", r.recall},
              {"f_score", r.f_score},
              {"precision_defined", r.precision_defined},
              {"recall_defined", r.recall_defined}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

std::vector<Json> read_jsonl(const std::string& path) {
  const std::string text = read_text(path);
  std::vector<Json> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::string to_jsonl(const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump(-1, ' ', false, Json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace metaprobe
