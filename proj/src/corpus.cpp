#include "metaprobe/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>

#include <json.hpp>

namespace metaprobe {

using nlohmann::json;

namespace {

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};

/// Reads lines from a plain or gzip file.
class LineReader {
 public:
  explicit LineReader(const std::string& path) : file_(gzopen(path.c_str(), "rb")) {
    if (!file_) throw IoError("cannot open " + path);
    gzbuffer(file_.get(), 1 << 17);
  }

  bool next(std::string& line) {
    line.clear();
    char buf[1 << 14];
    while (gzgets(file_.get(), buf, sizeof buf)) {
      line.append(buf);
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
      }
    }
    int err = Z_OK;
    const char* msg = gzerror(file_.get(), &err);
    if (err != Z_OK && err != Z_STREAM_END) throw IoError(std::string("read error: ") + msg);
    return !line.empty();
  }

 private:
  std::unique_ptr<gzFile_s, GzCloser> file_;
};

bool path_says_train(const std::string& path) {
  const auto name = std::filesystem::path(path).filename().string();
  return name.find("train") != std::string::npos;
}

}  // namespace

LoadResult load_jsonl(const std::string& path, const LoadOptions& options) {
  LoadResult out;
  LineReader reader(path);
  const std::string stem = std::filesystem::path(path).filename().string();
  const Split path_split = path_says_train(path) ? Split::Train : Split::Test;
  std::set<std::string> seen;
  std::string line;
  while (reader.next(line)) {
    ++out.lines;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception&) {
      ++out.malformed;
      continue;
    }
    if (!obj.is_object() || !obj.contains(options.code_field) ||
        !obj[options.code_field].is_string() || obj[options.code_field].get_ref<const std::string&>().empty()) {
      ++out.malformed;
      continue;
    }
    SourceUnit u;
    u.code = obj[options.code_field].get<std::string>();
    if (!options.id_field.empty() && obj.contains(options.id_field) && obj[options.id_field].is_string())
      u.id = obj[options.id_field].get<std::string>();
    if (u.id.empty()) u.id = stem + ":" + std::to_string(out.lines);
    if (seen.count(u.id)) u.id += "#" + std::to_string(out.lines);
    seen.insert(u.id);
    if (options.split) {
      u.split = *options.split;
    } else if (obj.contains("partition") && obj["partition"].is_string()) {
      u.split = obj["partition"] == "train" ? Split::Train : Split::Test;
    } else {
      u.split = path_split;
    }
    out.units.push_back(std::move(u));
  }
  if (out.units.empty()) throw EmptyCorpus("no units loaded from " + path);
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  return out;
}

// Bodies are joined with NUL, which never occurs in a usable pattern.
CorpusIndex::CorpusIndex(const std::vector<SourceUnit>& units) : units_(units.size()) {
  for (const auto& u : units) {
    raw_.append(u.code);
    raw_.push_back('\0');
    normalized_.append(normalize_whitespace(u.code));
    normalized_.push_back('\0');
  }
}

bool CorpusIndex::contains(std::string_view snippet) const {
  const auto needle = normalize_whitespace(snippet);
  if (needle.find('\0') != std::string::npos || units_ == 0) return false;
  return normalized_.find(needle) != std::string::npos;
}

bool CorpusIndex::contains_raw(std::string_view snippet) const {
  if (snippet.find('\0') != std::string_view::npos || units_ == 0) return false;
  return raw_.find(snippet) != std::string::npos;
}

namespace {

/// Aho-Corasick automaton counting occurrences of every pattern.
class Automaton {
 public:
  explicit Automaton(const std::vector<std::string>& patterns) {
    nodes_.emplace_back();
    terminal_.reserve(patterns.size());
    for (const auto& p : patterns) {
      int s = 0;
      for (unsigned char c : p) {
        int t = step(s, c);
        if (t < 0) {
          t = static_cast<int>(nodes_.size());
          nodes_[s].next.emplace_back(c, t);
          nodes_.emplace_back();
        }
        s = t;
      }
      terminal_.push_back(p.empty() || p.find('\0') != std::string::npos ? -1 : s);
    }
    // Breadth-first failure links.
    std::deque<int> queue;
    for (auto [c, t] : nodes_[0].next) {
      nodes_[t].fail = 0;
      queue.push_back(t);
    }
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      order_.push_back(s);
      for (auto [c, t] : nodes_[s].next) {
        int f = nodes_[s].fail;
        while (f > 0 && step(f, c) < 0) f = nodes_[f].fail;
        const int g = step(f, c);
        nodes_[t].fail = (g >= 0 && g != t) ? g : 0;
        queue.push_back(t);
      }
    }
  }

  std::vector<std::size_t> count(std::string_view text) const {
    std::vector<std::size_t> visits(nodes_.size(), 0);
    int s = 0;
    for (unsigned char c : text) {
      while (s > 0 && step(s, c) < 0) s = nodes_[s].fail;
      const int t = step(s, c);
      s = t < 0 ? 0 : t;
      ++visits[static_cast<std::size_t>(s)];
    }
    // A visit to a state is also an occurrence of every suffix state.
    for (auto it = order_.rbegin(); it != order_.rend(); ++it)
      visits[static_cast<std::size_t>(nodes_[*it].fail)] += visits[static_cast<std::size_t>(*it)];
    std::vector<std::size_t> out;
    out.reserve(terminal_.size());
    for (int t : terminal_) out.push_back(t < 0 ? 0 : visits[static_cast<std::size_t>(t)]);
    return out;
  }

 private:
  struct Node {
    std::vector<std::pair<unsigned char, int>> next;
    int fail = 0;
  };
  std::vector<Node> nodes_;
  std::vector<int> terminal_;
  std::vector<int> order_;  // BFS order, root excluded

  int step(int s, unsigned char c) const {
    for (auto [k, t] : nodes_[static_cast<std::size_t>(s)].next) {
      if (k == c) return t;
    }
    return -1;
  }
};

}  // namespace

std::vector<CorpusIndex::Hits> CorpusIndex::count(const std::vector<std::string>& patterns) const {
  std::vector<std::string> normalized;
  normalized.reserve(patterns.size());
  for (const auto& p : patterns) normalized.push_back(normalize_whitespace(p));
  const auto raw_counts = Automaton(patterns).count(raw_);
  const auto norm_counts = Automaton(normalized).count(normalized_);
  std::vector<Hits> out(patterns.size());
  for (std::size_t i = 0; i < patterns.size(); ++i) out[i] = {raw_counts[i], norm_counts[i]};
  return out;
}

double FamiliarityReport::fraction(std::size_t group) const {
  return pairs == 0 ? 0.0
                    : static_cast<double>(groups.at(group).pair_ids.size()) / static_cast<double>(pairs);
}

std::pair<std::string, std::string> condition_texts(const TransformedPair& pair) {
  return {std::string(pair.site.condition_span.slice(pair.original_code)),
          std::string(pair.transformed_site.condition_span.slice(pair.transformed_code))};
}

FamiliarityReport familiarity_groups(const CorpusIndex& index,
                                     const std::vector<TransformedPair>& pairs,
                                     const std::vector<EvalRecord>& records) {
  FamiliarityReport report;
  for (std::size_t g = 0; g < 4; ++g) {
    report.groups[g].original_found = g >= 2;
    report.groups[g].transformed_found = g % 2 == 1;
  }
  std::vector<std::string> patterns;
  patterns.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    auto [o, t] = condition_texts(p);
    patterns.push_back(std::move(o));
    patterns.push_back(std::move(t));
  }
  const auto hits = index.size() == 0 ? std::vector<CorpusIndex::Hits>(patterns.size())
                                      : index.count(patterns);
  std::map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& ho = hits[2 * i];
    const auto& ht = hits[2 * i + 1];
    report.raw_original_hits += ho.raw > 0;
    report.raw_transformed_hits += ht.raw > 0;
    const std::size_t g = (ho.normalized > 0 ? 2 : 0) + (ht.normalized > 0 ? 1 : 0);
    if (report.groups[g].pair_ids.insert(pairs[i].pair_id).second) ++report.pairs;
    group_of[pairs[i].pair_id] = g;
  }
  std::array<std::vector<EvalRecord>, 4> joined;
  for (const auto& r : records) {
    if (auto it = group_of.find(r.pair_id); it != group_of.end()) joined[it->second].push_back(r);
  }
  for (std::size_t g = 0; g < 4; ++g) {
    try {
      if (!joined[g].empty()) report.groups[g].summary = score(joined[g]);
    } catch (const EmptyInput&) {
    }
  }
  return report;
}

}  // namespace metaprobe
