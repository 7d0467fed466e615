#include "posrate/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "posrate/catalog.hpp"
#include "posrate/distribution.hpp"
#include "posrate/error.hpp"
#include "posrate/finder.hpp"
#include "posrate/incidence.hpp"
#include "posrate/ladder.hpp"
#include "posrate/stats.hpp"
#include "posrate/trees.hpp"

namespace posrate {

namespace {

constexpr std::size_t kCoreSizeLimit = 500;
constexpr unsigned kMaxOrder = 6;

using CheckFn = std::function<std::string()>;  // empty string on success

struct Check {
  std::string name;
  CheckFn run;
};

Rational random_rational(Rng& rng) {
  const long num = static_cast<long>(rng.below(41)) - 20;
  const long den = static_cast<long>(rng.below(12)) + 1;
  Rational out(num, den);
  out.canonicalize();
  return out;
}

std::vector<Rational> random_table(std::size_t n, Rng& rng) {
  std::vector<Rational> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_rational(rng));
  return out;
}

std::vector<CatalogItem> core_items() {
  std::vector<CatalogItem> out;
  for (auto& item : catalog_defaults()) {
    if (item.poset.size() <= kCoreSizeLimit) out.push_back(std::move(item));
  }
  return out;
}

// TV between the empirical law of `counts` (last bin: beyond the truncation)
// and an exact pdf whose missing mass sits in that last bin.
double tv_with_tail(const std::vector<std::uint64_t>& counts, const std::vector<Rational>& probs) {
  std::vector<double> exact;
  Rational rest(1);
  for (const auto& p : probs) {
    exact.push_back(to_double(p));
    rest -= p;
  }
  exact.push_back(to_double(rest));
  const auto empirical = normalize_counts(counts);
  return total_variation(empirical, exact);
}

// ---------------------------------------------------------------------------
// core

std::string check_mobius_roundtrip(const VerifyOptions& opt) {
  Rng rng = SeedSpec{opt.seed}.stream(1);
  for (const auto& item : core_items()) {
    const auto f = random_table(item.poset.size(), rng);
    const auto g = lower_op<Rational>(item.poset, f);
    if (mobius_invert_lower<Rational>(item.poset, g) != f) return item.name + ": inversion mismatch";
  }
  return {};
}

std::string check_duality(const VerifyOptions& opt) {
  Rng rng = SeedSpec{opt.seed}.stream(2);
  for (const auto& item : core_items()) {
    const auto n = item.poset.size();
    const auto f = random_table(n, rng);
    const auto g = random_table(n, rng);
    const std::vector<Rational> zero(n, Rational(0));
    const auto lf = lower_op<Rational>(item.poset, f);
    const auto ug = upper_op<Rational>(item.poset, g, std::span<const Rational>(zero));
    Rational lhs(0), rhs(0);
    for (std::size_t x = 0; x < n; ++x) {
      lhs += lf[x] * g[x];
      rhs += f[x] * ug[x];
    }
    if (lhs != rhs) return item.name + ": " + to_string(lhs) + " != " + to_string(rhs);
  }
  return {};
}

std::string check_cumulative(const VerifyOptions&) {
  for (const auto& item : core_items()) {
    const auto& P = item.poset;
    const auto table = cumulative(P, kMaxOrder);
    std::vector<Rational> row(P.size(), Rational(1));
    for (unsigned n = 0; n <= kMaxOrder; ++n) {
      if (table.order(n) != row) return item.name + ": lambda_" + std::to_string(n) + " differs from L^n 1";
      row = lower_op<Rational>(P, row);
    }
    const bool chainlike = item.name == "chain" || item.name == "geometric_chain" || item.name == "kary_tree";
    const bool subsets = item.name == "subsets" || item.name == "boolean";
    std::vector<unsigned> depth;
    if (chainlike) depth = tree_depths(P);
    for (unsigned n = 0; n <= kMaxOrder; ++n) {
      for (ElementId x = 0; x < P.size(); ++x) {
        Rational expect;
        if (chainlike) {
          expect = binomial(n + depth[x], n);
        } else if (subsets) {
          // #x = log2 |D[x]|
          unsigned size = 0;
          for (auto c = P.down_bits(x).count(); c > 1; c >>= 1) ++size;
          expect = pow(Rational(n + 1), size);
        } else {
          continue;
        }
        if (table.at(n, x) != expect) {
          return item.name + ": lambda_" + std::to_string(n) + "(" + item.labels[x] + ") = " +
                 to_string(table.at(n, x)) + ", closed form " + to_string(expect);
        }
      }
    }
  }
  const auto chain = catalog_build("chain", {{"n", "4"}});
  if (cumulative(chain.poset, 2).at(2, 3) != 10) return "chain: lambda_2(3) != 10";
  const auto subsets = catalog_build("subsets", {{"M", "3"}, {"m_cap", "3"}});
  for (ElementId x = 0; x < subsets.poset.size(); ++x) {
    if (subsets.labels[x] == "{1,3}" && cumulative(subsets.poset, 2).at(2, x) != 9) return "subsets: lambda_2({1,3}) != 9";
  }
  return {};
}

std::string check_rate_bound(const VerifyOptions&) {
  for (const auto& item : core_items()) {
    if (!item.pdf) continue;
    const auto r = rate(item.poset, *item.pdf).values;
    const auto cls = classify(item.poset);
    std::vector<bool> maximal(item.poset.size(), false);
    for (auto x : cls.maximal_elements) maximal[x] = true;
    for (ElementId x = 0; x < item.poset.size(); ++x) {
      if (r[x] > 1 || (r[x] == 1) != maximal[x]) return item.name + ": rate at " + item.labels[x] + " is " + to_string(r[x]);
    }
  }
  return {};
}

std::string check_classification(const VerifyOptions&) {
  for (const auto& item : catalog_defaults()) {
    const auto c = classify(item.poset);
    if (c.is_antichain != item.expected.antichain || c.is_connected != item.expected.connected ||
        c.is_rooted_tree != item.expected.rooted_tree) {
      return item.name + ": classification differs from the documented flags";
    }
    const auto again = catalog_build(item.name, item.params);
    if (again.poset.cover_pairs() != item.poset.cover_pairs()) return item.name + ": rebuild differs";
  }
  return {};
}

// ---------------------------------------------------------------------------
// trees

const Rational kAlphas[] = {Rational(3, 10), Rational(1, 2), Rational(7, 10)};

std::string check_constant_rate_trees(const VerifyOptions&) {
  for (std::uint32_t k = 1; k <= 3; ++k) {
    for (const auto& alpha : kAlphas) {
      const auto table = construct_constant_rate_upf(TreeRule::kary(k), alpha, Splitter::uniform(), 6);
      const auto pdf = table.pdf();
      const auto& P = table.tree.poset;
      std::ostringstream os;
      os << "k=" << k << " alpha=" << to_string(alpha) << ": ";
      const auto got = check_constant_rate(P, pdf);
      if (!got || *got != alpha) return os.str() + "constant rate not recovered";
      const auto depth = depth_distribution(P, pdf);
      for (unsigned n = 0; n < depth.at_least.size(); ++n) {
        if (depth.at_least[n] != pow(1 - alpha, n)) return os.str() + "P(d >= " + std::to_string(n) + ") wrong";
      }
      const Rational ratio = (1 - alpha) / Rational(k);
      for (ElementId x = 0; x < P.size(); ++x) {
        if (table.F.values[x] != pow(ratio, table.tree.depth[x])) return os.str() + "F differs from the closed form";
      }
    }
  }
  return {};
}

std::string check_nonunique(const VerifyOptions&) {
  const auto item = catalog_build("nonunique", {{"k", "3"}, {"depth", "6"}});
  const auto& P = item.poset;
  const auto F = upf_from_pdf(P, *item.pdf).values;
  const auto G = upf_from_pdf(P, *item.alt_pdf).values;
  if (F != G) return "UPFs differ";
  bool distinct = false;
  for (ElementId x = 0; x < P.size(); ++x) {
    if (!((*item.alt_pdf)[x] > 0)) return "g not positive at " + item.labels[x];
    distinct = distinct || (*item.pdf)[x] != (*item.alt_pdf)[x];
  }
  if (!distinct) return "pdfs coincide";
  for (ElementId a = 0; a < P.size(); ++a) {
    for (ElementId b = a + 1; b < P.size(); ++b) {
      const ElementId set[] = {a, b};
      if (generalized_upf<Rational>(P, *item.pdf, set) != generalized_upf<Rational>(P, *item.alt_pdf, set)) return {};
    }
  }
  return "generalized UPFs agree on every pair";
}

std::string check_percolation_structure(const VerifyOptions&) {
  const Rational alpha(1, 2);
  const auto table = construct_constant_rate_upf(TreeRule::kary(2), alpha, Splitter::uniform(), 4);
  for (const Rational& p : {Rational(1, 2), Rational(9, 10)}) {
    const auto perc = percolation_upf(table, p);
    const auto report = validate_upf_tree(perc.tree.poset, perc.F.values, perc.boundary_child_mass, 1 - p * (1 - alpha));
    if (!report.passed) return "p=" + to_string(p) + ": structural check failed";
    for (ElementId x = 0; x < perc.tree.poset.size(); ++x) {
      if (perc.F.values[x] != pow(p, perc.tree.depth[x]) * table.F.values[x]) return "F_p != p^d F";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// ladder

std::string check_ladder_pdfs(const VerifyOptions&) {
  const std::vector<CatalogItem> items = {
      catalog_build("geometric_chain", {{"n", "12"}, {"alpha", "1/3"}}),
      catalog_build("kary_tree", {{"k", "2"}, {"depth", "2"}, {"alpha", "1/2"}}),
      catalog_build("kary_tree", {{"k", "3"}, {"depth", "1"}, {"alpha", "2/5"}}),
      catalog_build("antichain", {{"n", "4"}}),
  };
  for (const auto& item : items) {
    const auto& P = item.poset;
    const auto tables = ladder_exact_pdfs(P, *item.pdf, 3);
    const auto g = ladder_transition(P, *item.pdf);
    std::vector<Rational> fm = item.pdf->probs();
    for (unsigned m = 1; m <= 3; ++m) {
      if (tables.f[m - 1] != fm) return item.name + ": f_" + std::to_string(m) + " differs from the kernel iterate";
      std::vector<Rational> next(P.size(), Rational(0));
      for (ElementId y = 0; y < P.size(); ++y) {
        for (ElementId z = 0; z < P.size(); ++z) next[z] += fm[y] * g[y][z];
      }
      fm = std::move(next);
    }
  }
  return {};
}

std::string check_uniform_conditional(const VerifyOptions&) {
  const auto table = construct_constant_rate_upf(TreeRule::kary(2), Rational(1, 2), Splitter::uniform(), 4);
  const auto report = uniformity_diagnostic(table.tree.poset, table.pdf());
  if (report.max_deviation != 0) return "max deviation " + to_string(report.max_deviation);
  return {};
}

std::string check_thinning(const VerifyOptions& opt) {
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  const auto exact = thin_exact(law, Rational(1, 2), 4);
  if (!exact.result.rate || *exact.result.rate != Rational(1, 3)) return "thinned rate is not 1/3";
  const auto& tree = exact.tree;
  const auto counts = replicate_counts<NodePath>(
      opt.replicates, SeedSpec{opt.seed}, opt.threads, tree.paths.size() + 1,
      [&](Rng& rng) { return thin_sample(law, 0.5, rng); }, [&](const NodePath& v) { return tree_bin(tree, v); });
  const double tv = tv_with_tail(counts, exact.result.law.probs());
  if (tv > 0.01) return "TV " + std::to_string(tv);
  return {};
}

std::string check_equivalence(const VerifyOptions&) {
  const auto uniform = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  const auto skew = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2),
                                           Splitter::rotating({Rational(7, 10), Rational(3, 10)}));
  const auto u = transition_matrices(uniform, 3);
  if (u.ladder != u.product) return "uniform split: kernels differ";
  const auto s = transition_matrices(skew, 3);
  Rational gap(0);
  for (std::size_t i = 0; i < s.ladder.size(); ++i) {
    for (std::size_t j = 0; j < s.ladder.size(); ++j) gap = std::max<Rational>(gap, abs(s.ladder[i][j] - s.product[i][j]));
  }
  if (!(gap > Rational(1, 1000))) return "70/30 split: gap " + to_string(gap);
  return {};
}

std::string check_percolation_mc(const VerifyOptions& opt) {
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), Rational(1, 2));
  const auto table = law.table(4);
  for (const double p : {0.5, 0.9}) {
    const auto perc = percolation_upf(table, rational_from_double(p));
    const auto exact = perc.pdf();
    const auto& tree = perc.tree;
    const auto counts = replicate_counts<NodePath>(
        opt.replicates, SeedSpec{opt.seed + 1}, opt.threads, tree.paths.size() + 1,
        [&](Rng& rng) { return sample_percolated(law, p, rng); },
        [&](const NodePath& v) { return tree_bin(tree, v); });
    const double tv = tv_with_tail(counts, exact.probs());
    if (tv > 0.01) return "p=" + std::to_string(p) + ": TV " + std::to_string(tv);
  }
  return {};
}

std::string check_moments(const VerifyOptions&) {
  for (std::uint32_t k = 1; k <= 3; ++k) {
    for (const auto& alpha : {Rational(3, 10), Rational(1, 2), Rational(7, 10)}) {
      const auto table = construct_constant_rate_upf(TreeRule::kary(k), alpha, Splitter::uniform(), k == 1 ? 8 : 4);
      const auto report = moment_identities(table.tree.poset, table.pdf(), 3, DepthTail{alpha, true}, 1e-9);
      if (!report.passed) return "k=" + std::to_string(k) + " alpha=" + to_string(alpha) + ": moment row failed";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// finder

std::string check_finder(const VerifyOptions& opt) {
  const auto grid = default_alpha_grid();
  for (const auto& r : alpha_grid_search(make_chain(5), grid, Rational(1, 1000000000), false, opt.threads)) {
    if (r.status != FeasibilityStatus::Infeasible) return "5-chain feasible at alpha " + to_string(r.alpha);
  }
  for (const auto& r : alpha_grid_search(make_antichain(4), grid, Rational(1, 1000000000), false, opt.threads)) {
    const bool feasible = r.status == FeasibilityStatus::Feasible;
    if (feasible != (r.alpha == 1)) return "antichain status wrong at alpha " + to_string(r.alpha);
  }
  const auto table = construct_constant_rate_upf(TreeRule::kary(2), Rational(1, 2), Splitter::uniform(), 5);
  const auto& P = table.tree.poset;
  const auto report = constant_rate_feasible_truncated(P, Rational(1, 2));
  if (report.status != FeasibilityStatus::Feasible) return "binary tree depth 5 not feasible";
  const auto pdf = table.pdf();
  std::vector<double> f, m;
  for (ElementId x = 0; x < P.size(); ++x) {
    f.push_back(to_double(pdf[x]));
    m.push_back(to_double((*pdf.upper_tail())[x]));
  }
  const auto problem = build_feasibility_problem(P, Rational(1, 2), Rational(1, 1000000000));
  const double residual = lp_residual(problem.lp, problem.point(f, m, to_double(pdf.tail_mass())));
  if (residual > 1e-6) return "closed-form witness residual " + std::to_string(residual);
  return {};
}

std::string check_poisson(const VerifyOptions&) {
  for (const double alpha : {0.3, 0.5, 0.8}) {
    const auto report = subsets_poisson_check(poisson_pmf(-std::log(alpha), 40), alpha);
    if (!report.passed) return "Poisson marginal fails at alpha " + std::to_string(alpha);
  }
  const auto geo = subsets_poisson_check(geometric_pmf(0.5, 40), 0.5);
  const double worst = std::max({geo.max_lemma, geo.max_binomial_moment, geo.max_alternating_moment});
  if (!(worst > 1e-3)) return "geometric marginal residual only " + std::to_string(worst);
  return {};
}

std::vector<Check> suite_checks(std::string_view suite, const VerifyOptions& opt) {
  auto bind = [&opt](std::string (*fn)(const VerifyOptions&)) { return [fn, &opt] { return fn(opt); }; };
  if (suite == "core") {
    return {{"mobius_roundtrip", bind(check_mobius_roundtrip)},
            {"duality", bind(check_duality)},
            {"cumulative_closed_forms", bind(check_cumulative)},
            {"rate_at_most_one", bind(check_rate_bound)},
            {"catalog_classification", bind(check_classification)}};
  }
  if (suite == "trees") {
    return {{"constant_rate_trees", bind(check_constant_rate_trees)},
            {"nonunique_pair", bind(check_nonunique)},
            {"percolation_structure", bind(check_percolation_structure)},
            {"moment_identities", bind(check_moments)}};
  }
  if (suite == "ladder") {
    return {{"ladder_pdfs", bind(check_ladder_pdfs)},
            {"uniform_conditional", bind(check_uniform_conditional)},
            {"thinning", bind(check_thinning)},
            {"exponential_equivalence", bind(check_equivalence)},
            {"percolation_simulation", bind(check_percolation_mc)}};
  }
  if (suite == "finder") {
    return {{"finder_soundness", bind(check_finder)}, {"poisson_conditions", bind(check_poisson)}};
  }
  raise(ErrorKind::InvalidArgument, "unknown suite '" + std::string(suite) + "'");
}

}  // namespace

std::vector<std::string> suite_names() { return {"core", "trees", "ladder", "finder", "all"}; }

SuiteReport run_suite(std::string_view name, const VerifyOptions& options) {
  SuiteReport report;
  report.suite = std::string(name);
  std::vector<std::pair<std::string, Check>> checks;
  if (name == "all") {
    for (const auto& s : {"core", "trees", "ladder", "finder"}) {
      for (auto& c : suite_checks(s, options)) checks.emplace_back(s, std::move(c));
    }
  } else {
    for (auto& c : suite_checks(name, options)) checks.emplace_back(std::string(name), std::move(c));
  }
  for (auto& [suite, check] : checks) {
    CheckResult result;
    result.suite = suite;
    result.name = check.name;
    const auto start = std::chrono::steady_clock::now();
    try {
      result.detail = check.run();
      result.passed = result.detail.empty();
    } catch (const Error& e) {
      result.detail = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (const std::exception& e) {
      result.detail = e.what();
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.passed = report.passed && result.passed;
    report.checks.push_back(std::move(result));
  }
  return report;
}

}  // namespace posrate
