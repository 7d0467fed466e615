#include "commands.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "posrate/catalog.hpp"
#include "posrate/distribution.hpp"
#include "posrate/error.hpp"
#include "posrate/finder.hpp"
#include "posrate/incidence.hpp"
#include "posrate/ladder.hpp"
#include "posrate/stats.hpp"
#include "posrate/trees.hpp"
#include "posrate/verify.hpp"

namespace posrate::cli {

namespace {

constexpr double kDefaultTvTol = 0.01;

const std::string& require(const std::string& value, std::string_view flag) {
  if (value.empty()) raise(ErrorKind::InvalidArgument, "--" + std::string(flag) + " is required");
  return value;
}

Rational require_rational(const std::string& value, std::string_view flag) {
  return parse_rational(require(value, flag));
}

std::vector<Rational> parse_weights(std::string_view text) {
  std::vector<Rational> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_rational(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  if (out.empty()) raise(ErrorKind::Parse, "empty weight list");
  return out;
}

// uniform | weighted:w1,w2,... | rotating:w1,w2,... | seeded:S
Splitter parse_splitter(std::string_view spec) {
  if (spec == "uniform") return Splitter::uniform();
  if (spec.starts_with("weighted:")) return Splitter::weighted(parse_weights(spec.substr(9)));
  if (spec.starts_with("rotating:")) return Splitter::rotating(parse_weights(spec.substr(9)));
  if (spec.starts_with("seeded:")) {
    const std::string s(spec.substr(7));
    try {
      return Splitter::seeded(std::stoull(s));
    } catch (const std::exception&) {
      raise(ErrorKind::Parse, "bad splitter seed '" + s + "'");
    }
  }
  raise(ErrorKind::Parse, "unknown splitter '" + std::string(spec) + "'");
}

TreeLaw tree_law(const RunConfig& c) {
  return TreeLaw::constant_rate(parse_tree_spec(require(c.tree, "tree")), require_rational(c.alpha, "alpha"),
                                parse_splitter(c.split));
}

LoadedDist dist_of(const RunConfig& c) {
  if (c.dist_inline) return dist_from_json(*c.dist_inline);
  return load_dist(require(c.dist, "dist"));
}

std::string r2s(const Rational& v) { return to_string(v); }
std::string d2s(double v) { return format_double(v); }

Json base_report(const RunConfig& c) { return Json{{"command", c.command}, {"config", config_json(c)}}; }

// Empirical frequencies of tree nodes; the last bin collects nodes below
// the truncation.
std::vector<double> tree_empirical(const RunConfig& c, const MaterializedTree& tree,
                                   const std::function<NodePath(Rng&)>& draw) {
  const auto counts = replicate_counts<NodePath>(c.replicates, SeedSpec{c.seed}, c.threads, tree.paths.size() + 1,
                                                 draw, [&](const NodePath& v) { return tree_bin(tree, v); });
  return normalize_counts(counts);
}

std::vector<double> finite_empirical(const RunConfig& c, std::size_t n, const std::function<ElementId(Rng&)>& draw) {
  const auto counts = replicate_counts<ElementId>(c.replicates, SeedSpec{c.seed}, c.threads, n + 1, draw,
                                                  [](const ElementId& v) { return static_cast<std::size_t>(v); });
  return normalize_counts(counts);
}

std::vector<double> with_tail(const std::vector<Rational>& probs) {
  std::vector<double> out;
  Rational rest(1);
  for (const auto& p : probs) {
    out.push_back(to_double(p));
    rest -= p;
  }
  out.push_back(to_double(rest));
  return out;
}

// Adds a simulation block comparing `empirical` to `exact` (both with a
// trailing beyond-truncation bin). Returns whether TV is within tolerance.
bool simulation_block(const RunConfig& c, Json& report, const std::vector<double>& empirical,
                      const std::vector<double>& exact) {
  const double tv = total_variation(empirical, exact);
  const double tol = c.tol.value_or(kDefaultTvTol);
  std::vector<std::uint64_t> counts;
  for (double e : empirical) counts.push_back(static_cast<std::uint64_t>(std::llround(e * c.replicates)));
  report["simulation"] = {{"replicates", c.replicates},
                          {"seed", c.seed},
                          {"total_variation", tv},
                          {"tolerance", tol},
                          {"chi_square", to_json(chi_square_gof(counts, exact))},
                          {"pass", tv <= tol}};
  return tv <= tol;
}

// ---------------------------------------------------------------------------

Output cmd_mobius(const RunConfig& c) {
  const auto P = load_poset(require(c.poset, "poset"));
  Output out{base_report(c), CsvWriter({"x", "y", "mobius"}), true};
  Json rows = Json::array();
  for (ElementId x = 0; x < P.size(); ++x) {
    const auto& row = P.mobius_row(x);
    for (auto y : bits_to_ids(P.up_bits(x))) {
      rows.push_back({x, y, row[y]});
      out.csv->row({std::to_string(x), std::to_string(y), std::to_string(row[y])});
    }
  }
  out.report["n"] = P.size();
  out.report["mobius"] = std::move(rows);
  return out;
}

Output cmd_cumulative(const RunConfig& c) {
  const auto P = load_poset(require(c.poset, "poset"));
  const auto table = cumulative(P, c.n);
  Output out{base_report(c), CsvWriter({"n", "element", "lambda"}), true};
  Json orders = Json::object();
  for (unsigned k = 0; k <= c.n; ++k) {
    orders[std::to_string(k)] = table_to_json(std::span<const Rational>(table.order(k)))["values"];
    for (ElementId x = 0; x < P.size(); ++x) out.csv->row({std::to_string(k), std::to_string(x), r2s(table.at(k, x))});
  }
  out.report["lambda"] = std::move(orders);
  return out;
}

Output cmd_upf(const RunConfig& c) {
  const auto d = dist_of(c);
  const auto F = upf_from_pdf(d.poset, d.pdf).values;
  Output out{base_report(c), CsvWriter({"element", "f", "F"}), true};
  out.report["pdf"] = table_to_json(std::span<const Rational>(d.pdf.probs()));
  out.report["upf"] = table_to_json(std::span<const Rational>(F));
  for (ElementId x = 0; x < d.poset.size(); ++x) out.csv->row({std::to_string(x), r2s(d.pdf[x]), r2s(F[x])});
  return out;
}

Output cmd_rate(const RunConfig& c) {
  const auto d = dist_of(c);
  const auto F = upf_from_pdf(d.poset, d.pdf).values;
  const auto r = rate(d.poset, d.pdf).values;
  Output out{base_report(c), CsvWriter({"element", "f", "F", "rate"}), true};
  out.report["rate"] = table_to_json(std::span<const Rational>(r));
  const auto constant = check_constant_rate(d.poset, d.pdf);
  out.report["constant_rate"] = constant ? Json(r2s(*constant)) : Json(nullptr);
  out.report["upper_equivalence_classes"] = upper_equivalence_classes(d.poset);
  if (!c.alpha.empty()) {
    const Rational expected = parse_rational(c.alpha);
    const bool match = constant && *constant == expected;
    out.report["expected_rate"] = r2s(expected);
    out.report["pass"] = match;
    out.passed = match;
  }
  for (ElementId x = 0; x < d.poset.size(); ++x) {
    out.csv->row({std::to_string(x), r2s(d.pdf[x]), r2s(F[x]), r2s(r[x])});
  }
  return out;
}

Output cmd_construct_tree(const RunConfig& c) {
  const auto law = tree_law(c);
  const unsigned depth = c.depth.value_or(6);
  const auto table = law.table(depth);
  const auto pdf = table.pdf();
  const auto& P = table.tree.poset;
  const auto validation = validate_upf_tree(P, table.F.values, table.boundary_child_mass, *law.constant_rate());
  const auto constant = check_constant_rate(P, pdf);
  const auto depth_law = depth_distribution(P, pdf);
  bool geometric = true;
  for (unsigned k = 0; k < depth_law.at_least.size(); ++k) {
    geometric = geometric && depth_law.at_least[k] == pow(1 - *law.constant_rate(), k);
  }
  Output out{base_report(c), CsvWriter({"path", "depth", "F", "f"}), true};
  out.report["nodes"] = P.size();
  out.report["validation"] = to_json(validation);
  out.report["constant_rate"] = constant ? Json(r2s(*constant)) : Json(nullptr);
  out.report["geometric_depth"] = geometric;
  out.report["upf"] = path_table_to_json(table.tree, table.F.values);
  out.report["pdf"] = path_table_to_json(table.tree, pdf.probs());
  for (ElementId x = 0; x < P.size(); ++x) {
    out.csv->row({path_key(table.tree.paths[x]), std::to_string(table.tree.depth[x]), r2s(table.F.values[x]),
                  r2s(pdf[x])});
  }
  out.passed = validation.passed && constant && *constant == *law.constant_rate() && geometric;
  out.report["pass"] = out.passed;
  return out;
}

Output cmd_percolate(const RunConfig& c) {
  const auto law = tree_law(c);
  const Rational p = require_rational(c.p, "p");
  const unsigned depth = c.depth.value_or(4);
  const auto table = law.table(depth);
  const auto perc = percolation_upf(table, p);
  const auto& tree = perc.tree;
  const auto pdf = perc.pdf();
  const auto validation =
      validate_upf_tree(tree.poset, perc.F.values, perc.boundary_child_mass, 1 - p * (1 - *law.constant_rate()));
  bool scaled = true;
  for (ElementId x = 0; x < tree.poset.size(); ++x) {
    scaled = scaled && perc.F.values[x] == pow(p, tree.depth[x]) * table.F.values[x];
  }
  Output out{base_report(c), CsvWriter({"path", "depth", "F", "F_p", "f_p", "empirical"}), true};
  out.report["validation"] = to_json(validation);
  out.report["scaling_exact"] = scaled;
  out.report["upf"] = path_table_to_json(tree, perc.F.values);
  out.passed = validation.passed && scaled;
  std::vector<double> empirical;
  if (c.replicates > 0) {
    const double pd = to_double(p);
    empirical = tree_empirical(c, tree, [&](Rng& rng) { return sample_percolated(law, pd, rng); });
    out.passed = simulation_block(c, out.report, empirical, with_tail(pdf.probs())) && out.passed;
  }
  for (ElementId x = 0; x < tree.poset.size(); ++x) {
    out.csv->row({path_key(tree.paths[x]), std::to_string(tree.depth[x]), r2s(table.F.values[x]), r2s(perc.F.values[x]),
                  r2s(pdf[x]), empirical.empty() ? "" : d2s(empirical[x])});
  }
  out.report["pass"] = out.passed;
  return out;
}

Output cmd_ladder(const RunConfig& c) {
  if (c.n == 0) raise(ErrorKind::InvalidArgument, "--n must be at least 1");
  Output out{base_report(c), CsvWriter({"m", "element", "exact", "empirical"}), true};
  std::vector<std::vector<Rational>> f;
  std::vector<std::string> labels;
  std::vector<double> empirical;
  if (!c.tree.empty()) {
    const auto law = tree_law(c);
    const unsigned depth = c.depth.value_or(4);
    const auto t = ladder_exact_pdfs(law, c.n, depth);
    f = t.tables.f;
    for (const auto& p : t.tree.paths) labels.push_back(path_key(p));
    out.report["certified_tail"] = t.tables.certified_tail;
    const auto uni = uniformity_diagnostic(t.tree.poset, law.table(depth).pdf());
    out.report["uniformity_max_deviation"] = r2s(uni.max_deviation);
    out.passed = uni.max_deviation == 0;
    if (c.replicates > 0) {
      empirical = tree_empirical(c, t.tree, [&](Rng& rng) { return ladder_markov_sample(law, c.n, rng).nodes.back(); });
      out.passed = simulation_block(c, out.report, empirical, with_tail(f.back())) && out.passed;
    }
  } else {
    const auto d = dist_of(c);
    const auto& P = d.poset;
    const auto g = ladder_transition(P, d.pdf);
    std::vector<Rational> fm = d.pdf.probs();
    for (unsigned m = 1; m <= c.n; ++m) {
      f.push_back(fm);
      std::vector<Rational> next(P.size(), Rational(0));
      for (ElementId y = 0; y < P.size(); ++y) {
        for (ElementId z = 0; z < P.size(); ++z) {
          if (g[y][z] != 0) next[z] += fm[y] * g[y][z];
        }
      }
      fm = std::move(next);
    }
    for (ElementId x = 0; x < P.size(); ++x) labels.push_back(std::to_string(x));
    if (check_constant_rate(P, d.pdf)) {
      const bool closed = ladder_exact_pdfs(P, d.pdf, c.n).f == f;
      out.report["closed_form_agrees"] = closed;
      out.passed = closed;
    }
    const auto uni = uniformity_diagnostic(P, d.pdf);
    out.report["uniformity_max_deviation"] = r2s(uni.max_deviation);
    if (c.replicates > 0) {
      const auto dist = FiniteDist::from_exact(P, d.pdf);
      empirical = finite_empirical(c, P.size(), [&](Rng& rng) { return ladder_markov_sample(dist, c.n, rng).nodes.back(); });
      out.passed = simulation_block(c, out.report, empirical, with_tail(f.back())) && out.passed;
    }
  }
  Json tables = Json::object();
  for (unsigned m = 1; m <= c.n; ++m) {
    Json v = Json::object();
    for (std::size_t x = 0; x < labels.size(); ++x) {
      v[labels[x]] = r2s(f[m - 1][x]);
      out.csv->row({std::to_string(m), labels[x], r2s(f[m - 1][x]),
                    (m == c.n && !empirical.empty()) ? d2s(empirical[x]) : ""});
    }
    tables[std::to_string(m)] = std::move(v);
  }
  out.report["ladder_pdfs"] = std::move(tables);
  out.report["pass"] = out.passed;
  return out;
}

Output cmd_thin(const RunConfig& c) {
  const Rational p = require_rational(c.p, "p");
  Output out{base_report(c), CsvWriter({"element", "exact", "empirical"}), true};
  std::optional<ThinExact> exact;
  std::vector<std::string> labels;
  std::vector<double> empirical;
  const double pd = to_double(p);
  if (!c.tree.empty()) {
    const auto law = tree_law(c);
    auto t = thin_exact(law, p, c.depth.value_or(4));
    for (const auto& path : t.tree.paths) labels.push_back(path_key(path));
    if (c.replicates > 0) {
      empirical = tree_empirical(c, t.tree, [&](Rng& rng) { return thin_sample(law, pd, rng); });
    }
    exact = std::move(t.result);
  } else {
    const auto d = dist_of(c);
    for (ElementId x = 0; x < d.poset.size(); ++x) labels.push_back(std::to_string(x));
    if (c.replicates > 0) {
      const auto dist = FiniteDist::from_exact(d.poset, d.pdf);
      empirical = finite_empirical(c, d.poset.size(), [&](Rng& rng) { return thin_sample(dist, pd, rng); });
    }
    exact = thin_exact(d.poset, d.pdf, p);
  }
  const auto& result = *exact;
  out.report["alpha"] = r2s(result.alpha);
  out.report["p"] = r2s(p);
  out.report["rate"] = result.rate ? Json(r2s(*result.rate)) : Json(nullptr);
  out.report["expected_rate"] = r2s(result.expected_rate);
  out.passed = result.rate && *result.rate == result.expected_rate;
  Json law = Json::object();
  for (std::size_t x = 0; x < labels.size(); ++x) {
    law[labels[x]] = r2s(result.law[static_cast<ElementId>(x)]);
    out.csv->row({labels[x], r2s(result.law[static_cast<ElementId>(x)]), empirical.empty() ? "" : d2s(empirical[x])});
  }
  out.report["law"] = std::move(law);
  out.report["tail_mass"] = r2s(result.law.tail_mass());
  if (!empirical.empty()) {
    out.passed = simulation_block(c, out.report, empirical, with_tail(result.law.probs())) && out.passed;
  }
  out.report["pass"] = out.passed;
  return out;
}

Output cmd_products(const RunConfig& c) {
  const auto law = tree_law(c);
  const unsigned depth = c.depth.value_or(3);
  const auto diag = equivalence_diagnostic(law, depth);
  const auto pair = transition_matrices(law, depth);
  Output out{base_report(c), CsvWriter({"from", "to", "ladder", "product", "gap"}), true};
  out.report["max_gap"] = r2s(diag.max_gap);
  out.report["max_gap_float"] = to_double(diag.max_gap);
  out.report["worst_from"] = path_key(diag.worst_from);
  out.report["worst_to"] = path_key(diag.worst_to);
  out.report["pairs_checked"] = diag.pairs_checked;
  out.report["exponential"] = diag.exponential;
  const auto& paths = pair.tree.paths;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = 0; j < paths.size(); ++j) {
      const auto& a = pair.ladder[i][j];
      const auto& b = pair.product[i][j];
      if (a == 0 && b == 0) continue;
      out.csv->row({path_key(paths[i]), path_key(paths[j]), r2s(a), r2s(b), r2s(abs(Rational(a - b)))});
    }
  }
  return out;
}

Output cmd_find(const RunConfig& c) {
  const Rational eps = parse_rational(c.epsilon);
  Output out{base_report(c), CsvWriter({"alpha", "depth", "status", "residual"}), true};
  std::vector<Rational> grid;
  if (!c.alpha_grid.empty()) {
    grid = parse_alpha_grid(c.alpha_grid);
  } else if (!c.alpha.empty()) {
    grid = {parse_rational(c.alpha)};
  } else {
    grid = default_alpha_grid();
  }
  std::vector<FeasibilityReport> reports;
  std::string depth_label;
  if (!c.subsets_search.empty()) {
    const auto colon = c.subsets_search.find(':');
    if (colon == std::string::npos) raise(ErrorKind::Parse, "--subsets-search expects M:m_cap");
    unsigned M = 0, cap = 0;
    try {
      M = static_cast<unsigned>(std::stoul(c.subsets_search.substr(0, colon)));
      cap = static_cast<unsigned>(std::stoul(c.subsets_search.substr(colon + 1)));
    } catch (const std::exception&) {
      raise(ErrorKind::Parse, "--subsets-search expects M:m_cap");
    }
    for (const auto& a : grid) reports.push_back(search_subsets_poset(a, M, cap, eps, c.exact));
    depth_label = std::to_string(cap);
  } else {
    Poset P;
    if (!c.tree.empty()) {
      P = materialize(parse_tree_spec(c.tree), c.depth.value_or(5)).poset;
      depth_label = std::to_string(c.depth.value_or(5));
    } else {
      P = load_poset(require(c.poset, "poset"));
    }
    out.report["elements"] = P.size();
    out.report["truncated"] = P.is_truncated();
    reports = alpha_grid_search(P, grid, eps, c.exact, c.threads);
  }
  Json cells = Json::array();
  for (const auto& r : reports) {
    cells.push_back(to_json(r));
    out.csv->row({r2s(r.alpha), depth_label, to_string(r.status), d2s(r.residual)});
  }
  out.report["cells"] = std::move(cells);
  return out;
}

Output cmd_poisson_check(const RunConfig& c) {
  const double alpha = to_double(require_rational(c.alpha, "alpha"));
  std::vector<double> marginal;
  if (c.marginal == "poisson") {
    marginal = poisson_pmf(-std::log(alpha), c.K);
  } else if (c.marginal.starts_with("geometric:")) {
    marginal = geometric_pmf(to_double(parse_rational(c.marginal.substr(10))), c.K);
  } else {
    const auto j = read_json_file(c.marginal);
    if (!j.is_array()) raise(ErrorKind::Parse, "marginal file must be a JSON array of probabilities");
    for (const auto& v : j) marginal.push_back(to_double(rational_from_json(v)));
  }
  const auto report = subsets_poisson_check(marginal, alpha, c.tol.value_or(1e-10));
  Output out{base_report(c), CsvWriter({"condition", "index", "t", "lhs", "rhs", "residual"}), report.passed};
  out.report["result"] = to_json(report);
  for (const auto& row : report.rows) {
    out.csv->row({row.condition, std::to_string(row.index), d2s(row.t), d2s(row.lhs), d2s(row.rhs), d2s(row.residual)});
  }
  out.report["pass"] = report.passed;
  return out;
}

Output cmd_verify(const RunConfig& c) {
  VerifyOptions opt;
  opt.threads = c.threads;
  opt.seed = c.seed;
  if (c.replicates > 0) opt.replicates = c.replicates;
  const auto report = run_suite(c.suite, opt);
  Output out{base_report(c), CsvWriter({"suite", "check", "passed", "detail"}), report.passed};
  Json checks = Json::array();
  for (const auto& ch : report.checks) {
    checks.push_back({{"suite", ch.suite}, {"check", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    out.csv->row({ch.suite, ch.name, ch.passed ? "1" : "0", ch.detail});
  }
  out.report["checks"] = std::move(checks);
  out.report["pass"] = report.passed;
  return out;
}

Output cmd_catalog_list(const RunConfig& c) {
  Output out{base_report(c), CsvWriter({"name", "version", "description"}), true};
  Json entries = Json::array();
  for (const auto& e : catalog_list()) {
    entries.push_back({{"name", e.name}, {"version", e.version}, {"description", e.description}, {"defaults", e.defaults}});
    out.csv->row({e.name, std::to_string(e.version), e.description});
  }
  out.report["entries"] = std::move(entries);
  return out;
}

Output cmd_catalog_build(const RunConfig& c) {
  CatalogParams params;
  for (const auto& kv : c.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) raise(ErrorKind::InvalidParams, "expected key=value, got '" + kv + "'");
    params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  const auto item = catalog_build(require(c.catalog_name, "name"), params);
  const auto cls = classify(item.poset);
  Output out{base_report(c), CsvWriter({"element", "label", "f", "g"}), true};
  out.report["name"] = item.name;
  out.report["version"] = item.version;
  out.report["params"] = item.params;
  out.report["classification"] = to_json(cls);
  out.report["labels"] = item.labels;
  out.report["poset"] = poset_to_json(item.poset);
  if (item.pdf) out.report["dist"] = dist_to_json(item.poset, *item.pdf);
  if (item.alt_pdf) out.report["alt_dist"] = dist_to_json(item.poset, *item.alt_pdf);
  if (item.alpha) out.report["alpha"] = r2s(*item.alpha);
  if (item.nonunique_c) out.report["c"] = r2s(*item.nonunique_c);
  for (ElementId x = 0; x < item.poset.size(); ++x) {
    out.csv->row({std::to_string(x), item.labels[x], item.pdf ? r2s((*item.pdf)[x]) : "",
                  item.alt_pdf ? r2s((*item.alt_pdf)[x]) : ""});
  }
  out.passed = cls.is_antichain == item.expected.antichain && cls.is_connected == item.expected.connected &&
               cls.is_rooted_tree == item.expected.rooted_tree;
  out.report["pass"] = out.passed;
  return out;
}

Output cmd_iid(const RunConfig& c) {
  const auto d = dist_of(c);
  if (c.replicates == 0) raise(ErrorKind::InvalidArgument, "iid needs replicates > 0");
  const auto dist = FiniteDist::from_exact(d.poset, d.pdf);
  const auto empirical = finite_empirical(c, d.poset.size(), [&](Rng& rng) { return dist.sample(rng); });
  Output out{base_report(c), CsvWriter({"element", "exact", "empirical"}), true};
  out.passed = simulation_block(c, out.report, empirical, with_tail(d.pdf.probs()));
  for (ElementId x = 0; x < d.poset.size(); ++x) out.csv->row({std::to_string(x), r2s(d.pdf[x]), d2s(empirical[x])});
  out.report["pass"] = out.passed;
  return out;
}

Output cmd_run(const RunConfig& c) {
  const auto spec = read_json_file(require(c.spec, "spec"));
  if (!spec.is_object() || !spec.contains("op") || !spec["op"].is_string()) {
    raise(ErrorKind::Parse, "run spec needs a string 'op'");
  }
  RunConfig sub = c;
  auto str = [&](const char* key, std::string& into) {
    if (!spec.contains(key)) return;
    if (spec[key].is_string()) {
      into = spec[key].get<std::string>();
    } else if (spec[key].is_number()) {
      into = spec[key].dump();
    } else {
      raise(ErrorKind::Parse, std::string("run spec field '") + key + "' has the wrong type");
    }
  };
  auto num = [&](const char* key, auto& into) {
    if (!spec.contains(key)) return;
    if (!spec[key].is_number_unsigned() && !(spec[key].is_number_integer() && spec[key].get<long long>() >= 0)) {
      raise(ErrorKind::Parse, std::string("run spec field '") + key + "' must be a non-negative integer");
    }
    into = spec[key].get<std::remove_reference_t<decltype(into)>>();
  };
  if (spec.contains("dist")) {
    if (spec["dist"].is_object()) {
      sub.dist_inline = spec["dist"];
    } else {
      str("dist", sub.dist);
    }
  }
  str("tree", sub.tree);
  str("alpha", sub.alpha);
  str("p", sub.p);
  str("split", sub.split);
  num("n", sub.n);
  num("replicates", sub.replicates);
  num("seed", sub.seed);
  if (spec.contains("depth")) {
    unsigned depth = 0;
    num("depth", depth);
    sub.depth = depth;
  }
  const auto op = spec["op"].get<std::string>();
  sub.command = "run:" + op;
  Output out;
  if (op == "iid") {
    out = cmd_iid(sub);
  } else if (op == "ladder") {
    out = cmd_ladder(sub);
  } else if (op == "thin") {
    out = cmd_thin(sub);
  } else if (op == "products") {
    out = cmd_products(sub);
  } else {
    raise(ErrorKind::Parse, "unknown run op '" + op + "'");
  }
  out.report["spec"] = spec;
  return out;
}

}  // namespace

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  auto put = [&j](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  put("poset", c.poset);
  put("dist", c.dist);
  put("tree", c.tree);
  put("split", c.split);
  put("alpha", c.alpha);
  put("alpha_grid", c.alpha_grid);
  put("p", c.p);
  put("epsilon", c.epsilon);
  put("marginal", c.marginal);
  put("suite", c.suite);
  put("spec", c.spec);
  put("name", c.catalog_name);
  put("subsets_search", c.subsets_search);
  if (!c.params.empty()) j["params"] = c.params;
  if (c.depth) j["depth"] = *c.depth;
  j["n"] = c.n;
  j["K"] = c.K;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["track"] = c.exact ? "exact" : "float";
  if (c.tol) j["tol"] = *c.tol;
  return j;
}

Output run_command(const RunConfig& config) {
  static const std::map<std::string, std::function<Output(const RunConfig&)>> table = {
      {"mobius", cmd_mobius},
      {"cumulative", cmd_cumulative},
      {"upf", cmd_upf},
      {"rate", cmd_rate},
      {"construct-tree", cmd_construct_tree},
      {"percolate", cmd_percolate},
      {"ladder", cmd_ladder},
      {"thin", cmd_thin},
      {"products", cmd_products},
      {"find", cmd_find},
      {"poisson-check", cmd_poisson_check},
      {"verify", cmd_verify},
      {"catalog-list", cmd_catalog_list},
      {"catalog-build", cmd_catalog_build},
      {"run", cmd_run},
  };
  const auto it = table.find(config.command);
  if (it == table.end()) raise(ErrorKind::InvalidArgument, "unknown command '" + config.command + "'");
  return it->second(config);
}

}  // namespace posrate::cli
