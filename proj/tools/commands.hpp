#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "posrate/io.hpp"

namespace posrate::cli {

/// Everything a run depends on. Echoed into every report so a run can be
/// reproduced from its output alone.
struct RunConfig {
  std::string command;
  std::string poset;
  std::string dist;
  std::optional<Json> dist_inline;  // from a run spec
  std::string tree;
  std::string split = "uniform";
  std::string alpha;
  std::string alpha_grid;
  std::string p;
  std::string epsilon = "1/1000000000";
  std::string marginal = "poisson";
  std::string suite = "core";
  std::string spec;
  std::string catalog_name;
  std::vector<std::string> params;
  std::string subsets_search;  // "M:m_cap"
  std::optional<unsigned> depth;
  unsigned n = 3;
  unsigned K = 40;
  std::size_t replicates = 0;
  std::uint64_t seed = 20240601;
  bool exact = true;
  std::optional<double> tol;
  unsigned threads = 1;
  std::string out;
};

Json config_json(const RunConfig& c);

struct Output {
  Json report;
  std::optional<CsvWriter> csv;
  bool passed = true;
};

Output run_command(const RunConfig& config);

}  // namespace posrate::cli
