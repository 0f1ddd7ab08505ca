#pragma once

// Transform-site counts over the CodeSearchNet Java test partition.
// METAPROBE_CSN_JAVA names a .jsonl(.gz) file or a directory searched
// recursively for them.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "metaprobe/corpus.hpp"
#include "metaprobe/transforms.hpp"

namespace site_counts {

inline constexpr double kExpectedBlockSites = 1425;
inline constexpr double kExpectedOperandSites = 9126;
inline constexpr double kRelativeTolerance = 0.15;

struct Result {
  std::size_t units = 0;
  std::size_t unparsed = 0;
  std::size_t block = 0;
  std::size_t operand = 0;

  bool block_ok() const { return within(block, kExpectedBlockSites); }
  bool operand_ok() const { return within(operand, kExpectedOperandSites); }
  static bool within(std::size_t got, double want) {
    return std::abs(static_cast<double>(got) - want) <= kRelativeTolerance * want;
  }
};

/// Empty when the variable is unset or names no test-partition functions.
inline std::optional<Result> count_from_env(std::string* why) {
  namespace fs = std::filesystem;
  using namespace metaprobe;
  const char* root = std::getenv("METAPROBE_CSN_JAVA");
  if (!root || !*root) {
    *why = "METAPROBE_CSN_JAVA not set; CodeSearchNet Java data unavailable";
    return std::nullopt;
  }
  std::vector<fs::path> paths;
  if (fs::is_directory(root)) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && (name.ends_with(".jsonl") || name.ends_with(".jsonl.gz")))
        paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
  } else {
    paths.emplace_back(root);
  }
  Result r;
  for (const auto& p : paths) {
    LoadResult loaded;
    try {
      loaded = load_jsonl(p.string());
    } catch (const EmptyCorpus&) {
      continue;
    }
    for (const auto& u : loaded.units) {
      if (u.split != Split::Test) continue;
      ++r.units;
      try {
        const auto tree = parse(u.code);
        r.block += find_block_swap_sites(tree, u.id).size();
        r.operand += find_operand_swap_sites(tree, u.id).size();
      } catch (const SyntaxError&) {
        ++r.unparsed;
      }
    }
  }
  if (r.units == 0) {
    *why = std::string("no test-partition functions under ") + root;
    return std::nullopt;
  }
  return r;
}

inline std::string describe(const Result& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "block %zu (want %.0f ±15%%), operand %zu (want %.0f ±15%%) over %zu functions, %zu unparsed",
                r.block, kExpectedBlockSites, r.operand, kExpectedOperandSites, r.units, r.unparsed);
  return buf;
}

}  // namespace site_counts
