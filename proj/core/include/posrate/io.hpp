#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "posrate/distribution.hpp"
#include "posrate/finder.hpp"
#include "posrate/poset.hpp"
#include "posrate/rational.hpp"
#include "posrate/stats.hpp"
#include "posrate/trees.hpp"

namespace posrate {

using Json = nlohmann::ordered_json;

// Poset files: { "n": int, "covers": [[x, y], ...], "boundary": [ids] }.
Json poset_to_json(const Poset& poset);
/// Throws Parse on malformed input; structural errors come from Poset::build.
Poset poset_from_json(const Json& j);

/// Reads and parses a JSON file; Parse on failure.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// A poset argument: an existing JSON file, otherwise a catalog reference
/// such as "kary_tree:k=2,depth=4".
Poset load_poset(std::string_view arg);

/// Rationals are written "p/q". Numbers read from JSON are taken at their
/// shortest decimal spelling, so 0.35 reads as 7/20.
Json rational_to_json(const Rational& v);
Rational rational_from_json(const Json& j);

/// { "values": { "<id>": "p/q" | number } }.
Json table_to_json(std::span<const Rational> values);
Json table_to_json(std::span<const double> values);
Json path_table_to_json(const MaterializedTree& tree, std::span<const Rational> values);
/// Accepts the wrapped form or a bare { "<id>": value } object.
std::vector<Rational> table_from_json(const Json& j, std::size_t n);

// Distributions: { "poset": <file or inline>, "probs": {...}, "tail_mass": v,
// "upper_tail": {...} }. Relative poset paths resolve against `base_dir`.
struct LoadedDist {
  Poset poset;
  Pdf<Rational> pdf;
};

Json dist_to_json(const Poset& poset, const Pdf<Rational>& pdf);
LoadedDist dist_from_json(const Json& j, const std::filesystem::path& base_dir = {});
/// A JSON file, or a catalog reference whose entry bundles a law.
LoadedDist load_dist(std::string_view arg);

// Tree specs: { "kind": "kary", "k": int } | { "kind": "explicit",
// "children_counts": { path: int } } | { "kind": "rule", "name": id }.
TreeRule tree_rule_from_json(const Json& j);
/// "kary:K", a registered rule name, or a JSON tree spec file.
TreeRule parse_tree_spec(std::string_view arg);

Json to_json(const Classification& c);
Json to_json(const FeasibilityReport& r);
Json to_json(const PoissonCheckReport& r);
Json to_json(const MomentReport& r);
Json to_json(const UpfTreeReport& r);
Json to_json(const ChiSquareResult& r);

/// {"error": kind, "message": text}.
Json error_json(std::string_view kind, std::string_view message);

/// Round-trippable spelling ("%.17g").
std::string format_double(double v);

/// Comma-separated rows with a fixed header; fields containing a comma or a
/// quote are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void row(const std::vector<std::string>& fields);
  const std::string& str() const noexcept { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

}  // namespace posrate
