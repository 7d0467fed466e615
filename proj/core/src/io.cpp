#include "posrate/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "posrate/catalog.hpp"
#include "posrate/error.hpp"

namespace posrate {

namespace {

ElementId parse_id(const Json& j, std::size_t n, std::string_view what) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) {
    raise(ErrorKind::Parse, std::string(what) + " must be an integer id");
  }
  const auto v = j.get<long long>();
  if (v < 0 || static_cast<unsigned long long>(v) >= n) {
    raise(ErrorKind::Parse, std::string(what) + " id " + std::to_string(v) + " out of range");
  }
  return static_cast<ElementId>(v);
}

std::size_t parse_key(const std::string& key, std::size_t n) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != key.size() || key.front() == '-' || v >= n) {
    raise(ErrorKind::Parse, "bad element key '" + key + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

Json poset_to_json(const Poset& poset) {
  Json j;
  j["n"] = poset.size();
  Json covers = Json::array();
  for (const auto& c : poset.cover_pairs()) covers.push_back({c.lower, c.upper});
  j["covers"] = std::move(covers);
  if (poset.is_truncated()) {
    Json b = Json::array();
    for (ElementId x : poset.boundary()) b.push_back(x);
    j["boundary"] = std::move(b);
  }
  return j;
}

Poset poset_from_json(const Json& j) {
  if (!j.is_object()) raise(ErrorKind::Parse, "poset JSON must be an object");
  if (!j.contains("n") || !(j["n"].is_number_unsigned() || j["n"].is_number_integer()) || j["n"].get<long long>() < 0) {
    raise(ErrorKind::Parse, "poset JSON needs a non-negative integer 'n'");
  }
  const auto n = j["n"].get<std::size_t>();
  std::vector<CoverPair> covers;
  if (j.contains("covers")) {
    if (!j["covers"].is_array()) raise(ErrorKind::Parse, "'covers' must be an array");
    for (const auto& pair : j["covers"]) {
      if (!pair.is_array() || pair.size() != 2) raise(ErrorKind::Parse, "each cover must be [x, y]");
      covers.push_back({parse_id(pair[0], n, "cover"), parse_id(pair[1], n, "cover")});
    }
  }
  std::vector<ElementId> boundary;
  if (j.contains("boundary")) {
    if (!j["boundary"].is_array()) raise(ErrorKind::Parse, "'boundary' must be an array");
    for (const auto& b : j["boundary"]) boundary.push_back(parse_id(b, n, "boundary"));
  }
  return Poset::build(n, covers, boundary);
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Parse, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::InvalidArgument, "cannot write " + path.string());
  out << text;
}

Poset load_poset(std::string_view arg) {
  const std::filesystem::path path(arg);
  if (std::filesystem::is_regular_file(path)) {
    const auto j = read_json_file(path);
    // A distribution file also names a poset.
    if (j.is_object() && j.contains("probs")) return dist_from_json(j, path.parent_path()).poset;
    return poset_from_json(j);
  }
  return catalog_build_ref(arg).poset;
}

Json rational_to_json(const Rational& v) { return to_string(v); }

Rational rational_from_json(const Json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number()) return parse_rational(j.dump());
  raise(ErrorKind::Parse, "expected a rational string or a number");
}

Json table_to_json(std::span<const Rational> values) {
  Json v = Json::object();
  for (std::size_t i = 0; i < values.size(); ++i) v[std::to_string(i)] = to_string(values[i]);
  return Json{{"values", std::move(v)}};
}

Json table_to_json(std::span<const double> values) {
  Json v = Json::object();
  for (std::size_t i = 0; i < values.size(); ++i) v[std::to_string(i)] = values[i];
  return Json{{"values", std::move(v)}};
}

Json path_table_to_json(const MaterializedTree& tree, std::span<const Rational> values) {
  Json v = Json::object();
  for (std::size_t i = 0; i < values.size(); ++i) v[path_key(tree.paths[i])] = to_string(values[i]);
  return Json{{"values", std::move(v)}};
}

std::vector<Rational> table_from_json(const Json& j, std::size_t n) {
  const Json& body = j.is_object() && j.contains("values") ? j["values"] : j;
  if (!body.is_object()) raise(ErrorKind::Parse, "table must be an object keyed by element id");
  std::vector<Rational> out(n, Rational(0));
  std::vector<bool> seen(n, false);
  for (const auto& [key, value] : body.items()) {
    const auto id = parse_key(key, n);
    out[id] = rational_from_json(value);
    seen[id] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) raise(ErrorKind::Parse, "table misses element " + std::to_string(i));
  }
  return out;
}

Json dist_to_json(const Poset& poset, const Pdf<Rational>& pdf) {
  Json j;
  j["poset"] = poset_to_json(poset);
  j["probs"] = table_to_json(std::span<const Rational>(pdf.probs()))["values"];
  j["tail_mass"] = to_string(pdf.tail_mass());
  if (pdf.upper_tail()) j["upper_tail"] = table_to_json(std::span<const Rational>(*pdf.upper_tail()))["values"];
  return j;
}

LoadedDist dist_from_json(const Json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object() || !j.contains("poset") || !j.contains("probs")) {
    raise(ErrorKind::Parse, "distribution JSON needs 'poset' and 'probs'");
  }
  Poset poset;
  if (j["poset"].is_string()) {
    std::filesystem::path p(j["poset"].get<std::string>());
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    poset = poset_from_json(read_json_file(p));
  } else {
    poset = poset_from_json(j["poset"]);
  }
  auto probs = table_from_json(j["probs"], poset.size());
  const Rational tail = j.contains("tail_mass") ? rational_from_json(j["tail_mass"]) : Rational(0);
  std::optional<std::vector<Rational>> upper;
  if (j.contains("upper_tail")) upper = table_from_json(j["upper_tail"], poset.size());
  auto pdf = Pdf<Rational>::make(poset, std::move(probs), tail, std::move(upper));
  return {std::move(poset), std::move(pdf)};
}

LoadedDist load_dist(std::string_view arg) {
  const std::filesystem::path path(arg);
  if (std::filesystem::is_regular_file(path)) return dist_from_json(read_json_file(path), path.parent_path());
  auto item = catalog_build_ref(arg);
  if (!item.pdf) raise(ErrorKind::InvalidParams, "catalog entry '" + item.name + "' bundles no distribution");
  return {std::move(item.poset), std::move(*item.pdf)};
}

TreeRule tree_rule_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    raise(ErrorKind::Parse, "tree spec needs a string 'kind'");
  }
  const auto kind = j["kind"].get<std::string>();
  if (kind == "kary") {
    if (!j.contains("k") || !j["k"].is_number_integer() || j["k"].get<long long>() < 1) {
      raise(ErrorKind::Parse, "kary tree spec needs an integer k >= 1");
    }
    return TreeRule::kary(j["k"].get<std::uint32_t>());
  }
  if (kind == "explicit") {
    if (!j.contains("children_counts") || !j["children_counts"].is_object()) {
      raise(ErrorKind::Parse, "explicit tree spec needs 'children_counts'");
    }
    std::map<std::string, std::uint32_t> counts;
    for (const auto& [key, value] : j["children_counts"].items()) {
      if (!value.is_number_integer() || value.get<long long>() < 0) {
        raise(ErrorKind::Parse, "children count for '" + key + "' must be a non-negative integer");
      }
      counts[path_key(parse_path(key))] = value.get<std::uint32_t>();
    }
    return TreeRule::explicit_counts(std::move(counts));
  }
  if (kind == "rule") {
    if (!j.contains("name") || !j["name"].is_string()) raise(ErrorKind::Parse, "rule tree spec needs 'name'");
    return TreeRule::registered(j["name"].get<std::string>());
  }
  raise(ErrorKind::Parse, "unknown tree kind '" + kind + "'");
}

TreeRule parse_tree_spec(std::string_view arg) {
  if (arg.starts_with("kary:")) {
    const std::string k(arg.substr(5));
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(k, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != k.size() || v < 1 || v > 1024) raise(ErrorKind::Parse, "bad tree spec '" + k + "'");
    return TreeRule::kary(static_cast<std::uint32_t>(v));
  }
  const std::filesystem::path path(arg);
  if (std::filesystem::is_regular_file(path)) return tree_rule_from_json(read_json_file(path));
  try {
    return TreeRule::registered(arg);
  } catch (const Error&) {
    raise(ErrorKind::Parse, "unknown tree spec '" + std::string(arg) + "'");
  }
}

Json to_json(const Classification& c) {
  return Json{{"is_antichain", c.is_antichain},
              {"is_connected", c.is_connected},
              {"is_rooted_tree", c.is_rooted_tree},
              {"maximal_elements", c.maximal_elements},
              {"minimal_elements", c.minimal_elements}};
}

Json to_json(const FeasibilityReport& r) {
  Json j;
  j["alpha"] = to_string(r.alpha);
  j["epsilon"] = r.epsilon;
  j["exact"] = r.exact;
  j["method"] = r.method;
  j["status"] = to_string(r.status);
  j["residual"] = r.residual;
  j["pivots"] = r.pivots;
  if (!r.witness.empty()) {
    j["witness"] = table_to_json(std::span<const double>(r.witness))["values"];
    j["witness_tail"] = table_to_json(std::span<const double>(r.witness_tail))["values"];
    j["witness_total_tail"] = r.witness_total_tail;
  }
  j["notes"] = r.notes;
  return j;
}

Json to_json(const PoissonCheckReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"condition", row.condition},
                    {"index", row.index},
                    {"t", row.t},
                    {"lhs", row.lhs},
                    {"rhs", row.rhs},
                    {"residual", row.residual}});
  }
  return Json{{"alpha", r.alpha},
              {"K", r.K},
              {"missing_mass", r.missing_mass},
              {"max_lemma", r.max_lemma},
              {"max_pgf_shift", r.max_pgf_shift},
              {"max_binomial_moment", r.max_binomial_moment},
              {"max_alternating_moment", r.max_alternating_moment},
              {"tolerance", r.tolerance},
              {"passed", r.passed},
              {"rows", std::move(rows)}};
}

Json to_json(const MomentReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"check", row.check},
                    {"n", row.n},
                    {"lhs", row.lhs},
                    {"rhs", row.rhs},
                    {"abs_err", row.abs_err},
                    {"tail_width", row.tail_width},
                    {"exact", row.exact},
                    {"pass", row.pass}});
  }
  Json j{{"passed", r.passed}, {"max_tail_width", r.max_tail_width}, {"rows", std::move(rows)}};
  if (r.constant_rate) j["constant_rate"] = to_string(*r.constant_rate);
  return j;
}

Json to_json(const UpfTreeReport& r) {
  Json levels = Json::array();
  for (const auto& s : r.level_sums) levels.push_back(to_string(s));
  Json j{{"passed", r.passed},
         {"root_is_one", r.root_is_one},
         {"child_sum_violations", r.child_sum_violations},
         {"level_sums", std::move(levels)},
         {"decay_established", r.decay_established},
         {"issues", r.issues}};
  if (r.rate_bound) j["rate_bound"] = to_string(*r.rate_bound);
  return j;
}

Json to_json(const ChiSquareResult& r) {
  return Json{{"statistic", r.statistic}, {"dof", r.dof}, {"p_value", r.p_value}, {"bins_used", r.bins_used}};
}

Json error_json(std::string_view kind, std::string_view message) {
  return Json{{"error", kind}, {"message", message}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) { row(header); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != width_) raise(ErrorKind::InvalidArgument, "CSV row has the wrong width");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n") == std::string::npos) {
      text_ += f;
    } else {
      text_ += '"';
      for (char c : f) {
        if (c == '"') text_ += '"';
        text_ += c;
      }
      text_ += '"';
    }
  }
  text_ += '\n';
}

}  // namespace posrate
