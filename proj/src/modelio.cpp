#include "metaprobe/modelio.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "metaprobe/random.hpp"

namespace metaprobe {

using nlohmann::json;

void validate_prediction(const MaskPrediction& p) {
  double sum = 0.0;
  double prev = 1.0;
  for (const auto& [token, prob] : p.top_k) {
    if (!(prob > 0.0 && prob <= 1.0))
      throw ProtocolError("probability of '" + token + "' outside (0,1]");
    if (prob > prev) throw ProtocolError("top_k probabilities increase");
    prev = prob;
    sum += prob;
  }
  if (sum > 1.0 + 1e-6) throw ProtocolError("top_k probabilities sum above 1");
  if (!(p.ground_truth_prob >= 0.0 && p.ground_truth_prob <= 1.0))
    throw ProtocolError("ground_truth_prob outside [0,1]");
}

std::string content_key(std::string_view text) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

// ------------------------------------------------------------------ mock

struct MockBackend::Script {
  enum class Default { Truth, Uniform, Fail, Noisy };

  BackendInfo info;
  Default fallback = Default::Truth;
  double accuracy = 0.8;  // noisy mode
  json responses = json::object();
  std::vector<std::string> multi_token;
  std::map<std::string, std::size_t> flaky;  // probe id -> failing attempts
  json vectors = json::object();

  mutable std::mutex mutex;
  mutable std::map<std::string, std::size_t> attempts;
};

MockBackend::MockBackend(std::shared_ptr<const Script> script) : script_(std::move(script)) {}

MockBackend MockBackend::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock backend file: ") + e.what());
  }
  auto script = std::make_shared<Script>();
  try {
    script->info.model_id = doc.value("model_id", "mock");
    script->info.hidden_size = doc.value("hidden_size", std::size_t{16});
    script->info.mask_token = doc.value("mask_token", "<mask>");
    script->info.vocab_size = doc.value("vocab_size", std::size_t{50265});
    if (script->info.hidden_size == 0) throw ConfigError("mock hidden_size must be positive");
    const json fill = doc.value("fill_mask", json::object());
    const std::string mode = fill.value("default", "truth");
    if (mode == "truth") {
      script->fallback = Script::Default::Truth;
    } else if (mode == "uniform") {
      script->fallback = Script::Default::Uniform;
    } else if (mode == "fail") {
      script->fallback = Script::Default::Fail;
    } else if (mode == "noisy") {
      script->fallback = Script::Default::Noisy;
      script->accuracy = fill.value("accuracy", 0.8);
      if (!(script->accuracy >= 0.0 && script->accuracy <= 1.0))
        throw ConfigError("mock accuracy must lie in [0, 1]");
    } else {
      throw ConfigError("unknown mock default '" + mode + "'");
    }
    script->responses = fill.value("responses", json::object());
    script->multi_token = fill.value("multi_token", std::vector<std::string>{});
    script->flaky = fill.value("flaky", std::map<std::string, std::size_t>{});
    script->vectors = doc.value("embed", json::object()).value("vectors", json::object());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock backend file: ") + e.what());
  }
  return MockBackend(std::move(script));
}

MockBackend MockBackend::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock backend file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

MaskPrediction MockBackend::fill_mask(const ProbeInstance& probe, std::size_t top_k) {
  const Script& s = *script_;
  if (auto f = s.flaky.find(probe.probe_id); f != s.flaky.end()) {
    std::lock_guard lock(s.mutex);
    if (s.attempts[probe.probe_id]++ < f->second)
      throw BackendUnavailable("mock: scripted transient failure for " + probe.probe_id);
  }

  const std::string truth(surface(probe.ground_truth));
  MaskPrediction out;
  out.probe_id = probe.probe_id;
  out.model_id = s.info.model_id;
  out.ground_truth_single_token =
      std::find(s.multi_token.begin(), s.multi_token.end(), truth) == s.multi_token.end();

  const json* entry = nullptr;
  if (auto it = s.responses.find(probe.probe_id); it != s.responses.end()) {
    entry = &*it;
  } else if (auto h = s.responses.find(content_key(probe.masked_code)); h != s.responses.end()) {
    entry = &*h;
  }

  std::optional<double> truth_prob;
  if (entry) {
    const json& list = entry->is_object() ? entry->at("top_k") : *entry;
    for (const auto& item : list) out.top_k.emplace_back(item.at(0).get<std::string>(), item.at(1).get<double>());
    if (entry->is_object() && entry->contains("ground_truth_prob"))
      truth_prob = entry->at("ground_truth_prob").get<double>();
  } else if (s.fallback == Script::Default::Fail) {
    throw BackendUnavailable("mock: no scripted response for " + probe.probe_id);
  } else if (s.fallback == Script::Default::Uniform) {
    for (auto op : kAllOps) out.top_k.emplace_back(std::string(surface(op)), 1.0 / 6.0);
  } else if (s.fallback == Script::Default::Noisy) {
    // Pseudo-model keyed by content: right with probability `accuracy`,
    // otherwise confident in another operator.
    Rng rng(fnv1a64(probe.masked_code));
    const bool right = rng.uniform01() < s.accuracy;
    auto top = probe.ground_truth;
    if (!right) {
      const auto shift = rng.uniform_int(1, 5);
      top = kAllOps[(static_cast<std::size_t>(top) + static_cast<std::size_t>(shift)) % 6];
    }
    const double p_top = 0.5 + 0.45 * rng.uniform01();
    for (auto op : kAllOps)
      out.top_k.emplace_back(std::string(surface(op)), op == top ? p_top : (1.0 - p_top) / 5.0);
  } else {
    out.top_k.emplace_back(truth, 1.0);
  }
  std::stable_sort(out.top_k.begin(), out.top_k.end(),
                   [](const TokenProb& a, const TokenProb& b) { return a.second > b.second; });
  if (!truth_prob) {
    truth_prob = 0.0;
    for (const auto& [token, prob] : out.top_k) {
      if (token == truth) truth_prob = prob;
    }
  }
  out.ground_truth_prob = *truth_prob;
  if (out.top_k.size() > top_k) out.top_k.resize(top_k);
  validate_prediction(out);
  return out;
}

EmbeddingVector MockBackend::embed(std::string_view code) {
  const Script& s = *script_;
  EmbeddingVector v;
  if (auto it = s.vectors.find(content_key(code)); it != s.vectors.end()) {
    v.values = it->get<std::vector<double>>();
    if (v.values.size() != s.info.hidden_size)
      throw ProtocolError("mock: scripted vector has the wrong dimension");
    return v;
  }
  Rng rng(fnv1a64(code));
  v.values.resize(s.info.hidden_size);
  for (auto& x : v.values) x = 2.0 * rng.uniform01() - 1.0;
  return v;
}

BackendInfo MockBackend::health() { return script_->info; }

// ------------------------------------------------------------------ http

namespace {

constexpr std::string_view kWirePlaceholder = "<MASK>";

std::unique_ptr<httplib::Client> make_client(const std::string& url, const HttpOptions& o) {
  auto client = std::make_unique<httplib::Client>(url);
  if (!client->is_valid()) throw ConfigError("invalid backend URL '" + url + "'");
  const auto ms = [](double s) { return std::chrono::milliseconds(static_cast<long long>(s * 1000)); };
  client->set_connection_timeout(ms(o.connect_timeout_s));
  client->set_read_timeout(ms(o.read_timeout_s));
  client->set_write_timeout(ms(o.read_timeout_s));
  return client;
}

json checked_body(const httplib::Result& res, std::string_view endpoint, bool accept_422) {
  if (!res)
    throw BackendUnavailable(std::string(endpoint) + ": " + httplib::to_string(res.error()));
  const int status = res->status;
  if (status == 503 || status >= 500)
    throw BackendUnavailable(std::string(endpoint) + ": HTTP " + std::to_string(status));
  if (status != 200 && !(accept_422 && status == 422))
    throw ProtocolError(std::string(endpoint) + ": HTTP " + std::to_string(status) + " " + res->body);
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string(endpoint) + ": malformed JSON: " + e.what());
  }
}

}  // namespace

HttpBackend::HttpBackend(std::string base_url, HttpOptions options)
    : base_url_(std::move(base_url)), options_(std::move(options)) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

MaskPrediction HttpBackend::fill_mask(const ProbeInstance& probe, std::size_t top_k) {
  std::string text = probe.masked_code;
  if (options_.placeholder != kWirePlaceholder) {
    const auto at = text.find(options_.placeholder);
    if (at != std::string::npos) text.replace(at, options_.placeholder.size(), kWirePlaceholder);
  }
  const json request = {{"text", text},
                        {"top_k", top_k},
                        {"ground_truth", std::string(surface(probe.ground_truth))}};
  auto client = make_client(base_url_, options_);
  const json body = checked_body(client->Post("/fill_mask", request.dump(), "application/json"),
                                 "/fill_mask", true);
  MaskPrediction out;
  out.probe_id = probe.probe_id;
  try {
    for (const auto& item : body.at("top_k"))
      out.top_k.emplace_back(item.at(0).get<std::string>(), item.at(1).get<double>());
    out.ground_truth_prob = body.at("ground_truth_prob").get<double>();
    out.ground_truth_single_token = body.at("ground_truth_single_token").get<bool>();
    out.model_id = body.value("model_id", "");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/fill_mask: ") + e.what());
  }
  validate_prediction(out);
  return out;
}

EmbeddingVector HttpBackend::embed(std::string_view code) {
  const json request = {{"text", code}};
  auto client = make_client(base_url_, options_);
  const json body =
      checked_body(client->Post("/embed", request.dump(), "application/json"), "/embed", false);
  EmbeddingVector v;
  try {
    v.values = body.at("vector").get<std::vector<double>>();
    const auto dim = body.at("dimension").get<std::size_t>();
    if (dim != v.values.size()) throw ProtocolError("/embed: dimension disagrees with vector");
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/embed: ") + e.what());
  }
  for (double x : v.values) {
    if (!std::isfinite(x)) throw ProtocolError("/embed: non-finite value");
  }
  return v;
}

BackendInfo HttpBackend::health() {
  auto client = make_client(base_url_, options_);
  const json body = checked_body(client->Get("/health"), "/health", false);
  BackendInfo info;
  try {
    info.model_id = body.at("model_id").get<std::string>();
    info.hidden_size = body.at("hidden_size").get<std::size_t>();
    info.mask_token = body.at("mask_token").get<std::string>();
    info.vocab_size = body.at("vocab_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("/health: ") + e.what());
  }
  return info;
}

// ------------------------------------------------------------------ batch

BatchResult run_batch(Backend& backend, const std::vector<ProbeInstance>& instances,
                      const BatchOptions& options) {
  if (options.parallelism == 0) throw ConfigError("parallelism must be at least 1");
  BatchResult result;
  result.predictions.resize(instances.size());
  std::vector<std::string> errors(instances.size());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  std::atomic<std::size_t> retries{0};
  std::atomic<std::size_t> checks{0};
  std::atomic<std::size_t> mismatches{0};
  std::atomic<bool> stop{false};
  const auto check_threshold = static_cast<std::uint64_t>(options.duplicate_check_fraction * 10000.0);

  auto query = [&](const ProbeInstance& probe) {
    double delay = options.backoff_ms;
    for (std::size_t attempt = 0;; ++attempt) {
      try {
        return backend.fill_mask(probe, options.top_k);
      } catch (const BackendUnavailable&) {
        if (attempt >= options.max_retries || stop) throw;
        ++retries;
        std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(delay));
        delay *= 2.0;
      }
    }
  };

  auto worker = [&] {
    while (!stop) {
      const std::size_t i = next++;
      if (i >= instances.size()) return;
      const auto& probe = instances[i];
      try {
        auto prediction = query(probe);
        if (fnv1a64(probe.probe_id) % 10000 < check_threshold) {
          ++checks;
          if (!(query(probe) == prediction)) ++mismatches;
        }
        result.predictions[i] = std::move(prediction);
      } catch (const Error& e) {
        errors[i] = probe.probe_id + ": " + e.what();
        if (++failures > options.failure_budget) stop = true;
      }
    }
  };

  const std::size_t n_threads = std::min(options.parallelism, std::max<std::size_t>(instances.size(), 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  result.failures = failures;
  result.retries = retries;
  result.duplicate_checks = checks;
  result.nondeterministic = mismatches;
  for (auto& e : errors) {
    if (!e.empty()) result.errors.push_back(std::move(e));
  }
  if (stop) {
    throw BackendUnavailable("failure budget of " + std::to_string(options.failure_budget) +
                             " exceeded; first error: " +
                             (result.errors.empty() ? std::string("?") : result.errors.front()));
  }
  return result;
}

}  // namespace metaprobe
