#include "posrate/finder.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "posrate/error.hpp"

namespace posrate {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kExactLimit = 40;
constexpr double kWitnessTolerance = 1e-7;

}  // namespace

std::string to_string(FeasibilityStatus status) {
  switch (status) {
    case FeasibilityStatus::Feasible: return "feasible";
    case FeasibilityStatus::Infeasible: return "infeasible";
    case FeasibilityStatus::ResidualOnly: return "residual-only";
  }
  return "unknown";
}

FeasibilityProblem build_feasibility_problem(const Poset& poset, const Rational& alpha, const Rational& epsilon) {
  if (!(alpha > 0 && alpha <= 1)) raise(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  if (epsilon < 0) raise(ErrorKind::InvalidArgument, "epsilon must be non-negative");
  const std::size_t n = poset.size();
  if (n == 0) raise(ErrorKind::InvalidArgument, "empty poset");
  if (epsilon * Rational(static_cast<long>(n)) > 1) {
    raise(ErrorKind::EpsilonTooLarge, "positivity floor " + to_string(epsilon) + " exceeds 1/" + std::to_string(n));
  }

  FeasibilityProblem prob;
  prob.poset = poset;
  prob.alpha = alpha;
  prob.epsilon = epsilon;
  prob.slack_index.assign(n, kNone);
  const auto cls = classify(poset);
  std::size_t vars = n;
  if (poset.is_truncated()) {
    prob.tree_slack = cls.is_rooted_tree;
    for (ElementId x = 0; x < n; ++x) {
      const bool owns = prob.tree_slack ? poset.is_boundary(x) : poset.up_set_meets_boundary(x);
      if (owns) {
        prob.slack_index[x] = vars++;
        prob.slack_elements.push_back(x);
      }
    }
    if (!prob.tree_slack) prob.total_index = vars++;
  }
  auto& lp = prob.lp;
  lp.n_vars = vars;

  for (ElementId x = 0; x < n; ++x) {
    const auto& up = poset.up_bits(x);
    const Rational count(static_cast<long>(up.count()));
    auto& row = lp.add_row(RowSense::Eq, epsilon * (alpha * count - 1));
    for (auto y = up.find_first(); y != Poset::Bits::npos; y = up.find_next(y)) row.coeffs[y] -= alpha;
    row.coeffs[x] += 1;
    if (prob.tree_slack) {
      for (ElementId b : prob.slack_elements) {
        if (up.test(b)) row.coeffs[prob.slack_index[b]] -= alpha;
      }
    } else if (prob.slack_index[x] != kNone) {
      row.coeffs[prob.slack_index[x]] -= alpha;
    }
  }

  auto& norm = lp.add_row(RowSense::Eq, Rational(1) - epsilon * Rational(static_cast<long>(n)));
  for (ElementId x = 0; x < n; ++x) norm.coeffs[x] = 1;
  if (prob.tree_slack) {
    for (ElementId b : prob.slack_elements) norm.coeffs[prob.slack_index[b]] = 1;
  } else if (prob.total_index) {
    norm.coeffs[*prob.total_index] = 1;
  }

  if (prob.total_index) {
    for (ElementId x : prob.slack_elements) {
      std::vector<std::size_t> open_children;
      for (ElementId y : poset.children(x)) {
        if (prob.slack_index[y] != kNone) open_children.push_back(prob.slack_index[y]);
      }
      for (auto c : open_children) {
        auto& mono = lp.add_row(RowSense::Ge, Rational(0));
        mono.coeffs[prob.slack_index[x]] = 1;
        mono.coeffs[c] = -1;
      }
      if (!poset.is_boundary(x)) {
        auto& cap = lp.add_row(RowSense::Le, Rational(0));
        cap.coeffs[prob.slack_index[x]] = 1;
        for (auto c : open_children) cap.coeffs[c] -= 1;
      }
    }
    auto& total_cap = lp.add_row(RowSense::Le, Rational(0));
    total_cap.coeffs[*prob.total_index] = 1;
    for (ElementId x : cls.minimal_elements) {
      if (prob.slack_index[x] == kNone) continue;
      total_cap.coeffs[prob.slack_index[x]] -= 1;
      auto& floor = lp.add_row(RowSense::Ge, Rational(0));
      floor.coeffs[*prob.total_index] = 1;
      floor.coeffs[prob.slack_index[x]] = -1;
    }
  }
  return prob;
}

std::vector<double> FeasibilityProblem::point(std::span<const double> f, std::span<const double> m,
                                              double total) const {
  std::vector<double> x(lp.n_vars, 0.0);
  const double eps = to_double(epsilon);
  for (ElementId e = 0; e < poset.size(); ++e) x[e] = f[e] - eps;
  for (ElementId e : slack_elements) {
    double value = m[e];
    if (tree_slack) {
      // slack owned by b alone: m(b) minus what its children carry
      for (ElementId c : poset.children(e)) value -= m[c];
    }
    x[slack_index[e]] = value;
  }
  if (total_index) x[*total_index] = total;
  return x;
}

FeasibilityReport solve_feasibility(const FeasibilityProblem& problem, bool exact, std::string method) {
  FeasibilityReport report;
  report.alpha = problem.alpha;
  report.epsilon = to_double(problem.epsilon);
  report.method = std::move(method);
  const std::size_t n = problem.poset.size();
  if (exact && n > kExactLimit) {
    report.notes.push_back("rational track limited to " + std::to_string(kExactLimit) + " elements; used floats");
    exact = false;
  }
  report.exact = exact;

  std::vector<double> x;
  if (exact) {
    const auto res = solve_lp(problem.lp);
    report.pivots = res.pivots;
    if (res.status != LpStatus::Optimal) {
      report.status = FeasibilityStatus::Infeasible;
      report.residual = to_double(res.infeasibility);
      return report;
    }
    for (const auto& v : res.x) x.push_back(to_double(v));
  } else {
    // The floor epsilon is the margin that separates feasible from
    // infeasible, so the float tolerances must sit well below it.
    const auto res = solve_lp(to_float(problem.lp), std::min(1e-9, 1e-3 * report.epsilon));
    report.pivots = res.pivots;
    if (res.status != LpStatus::Optimal) {
      report.status = FeasibilityStatus::Infeasible;
      report.residual = res.infeasibility;
      return report;
    }
    x = res.x;
  }

  const double eps = report.epsilon;
  report.witness.resize(n);
  for (ElementId e = 0; e < n; ++e) report.witness[e] = x[e] + eps;
  report.witness_tail.assign(n, 0.0);
  if (problem.tree_slack) {
    for (ElementId e = 0; e < n; ++e) {
      const auto& up = problem.poset.up_bits(e);
      for (ElementId b : problem.slack_elements) {
        if (up.test(b)) report.witness_tail[e] += x[problem.slack_index[b]];
      }
    }
    for (ElementId b : problem.slack_elements) report.witness_total_tail += x[problem.slack_index[b]];
  } else {
    for (ElementId e : problem.slack_elements) report.witness_tail[e] = x[problem.slack_index[e]];
    if (problem.total_index) report.witness_total_tail = x[*problem.total_index];
  }
  report.residual = lp_residual(problem.lp, x);
  const double witness_tol = std::min(kWitnessTolerance, 1e-2 * eps);
  report.status = report.residual <= witness_tol ? FeasibilityStatus::Feasible : FeasibilityStatus::ResidualOnly;
  return report;
}

FeasibilityReport constant_rate_feasible_finite(const Poset& poset, const Rational& alpha, bool exact,
                                                const Rational& epsilon) {
  if (poset.is_truncated()) raise(ErrorKind::InvalidArgument, "poset has a truncation boundary");
  return solve_feasibility(build_feasibility_problem(poset, alpha, epsilon), exact, "finite");
}

FeasibilityReport constant_rate_feasible_truncated(const Poset& poset, const Rational& alpha,
                                                   const Rational& epsilon, bool exact) {
  if (!poset.is_truncated()) raise(ErrorKind::InvalidArgument, "poset has no truncation boundary");
  auto problem = build_feasibility_problem(poset, alpha, epsilon);
  const std::string method = problem.tree_slack ? "tree-slack" : "union-bound";
  auto report = solve_feasibility(problem, exact, method);
  if (!problem.tree_slack) report.notes.push_back("union-bound slack is an over-approximation");
  return report;
}

FeasibilityReport constant_rate_feasible(const Poset& poset, const Rational& alpha, const Rational& epsilon,
                                         bool exact) {
  return poset.is_truncated() ? constant_rate_feasible_truncated(poset, alpha, epsilon, exact)
                              : constant_rate_feasible_finite(poset, alpha, exact, epsilon);
}

std::vector<Rational> parse_alpha_grid(std::string_view spec) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() == 1) return {parse_rational(parts[0])};
  if (parts.size() != 3) raise(ErrorKind::Parse, "alpha grid must look like a:b:step");
  const Rational a = parse_rational(parts[0]);
  const Rational b = parse_rational(parts[1]);
  const Rational step = parse_rational(parts[2]);
  if (!(step > 0)) raise(ErrorKind::Parse, "alpha grid step must be positive");
  if (b < a) raise(ErrorKind::Parse, "alpha grid end is below its start");
  std::vector<Rational> out;
  for (Rational v = a; v <= b; v += step) {
    out.push_back(v);
    if (out.size() > 100000) raise(ErrorKind::Parse, "alpha grid too large");
  }
  return out;
}

std::vector<Rational> default_alpha_grid() { return parse_alpha_grid("1/20:1:1/20"); }

std::vector<FeasibilityReport> alpha_grid_search(const Poset& poset, std::span<const Rational> grid,
                                                 const Rational& epsilon, bool exact, unsigned threads) {
  std::vector<FeasibilityReport> out(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        out[i] = constant_rate_feasible(poset, grid[i], epsilon, exact);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1))));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Pdf<double> witness_pdf(const Poset& poset, const FeasibilityReport& report) {
  if (report.witness.size() != poset.size()) raise(ErrorKind::InvalidArgument, "report has no witness");
  std::optional<std::vector<double>> tail;
  if (poset.is_truncated()) tail = report.witness_tail;
  return Pdf<double>::make(poset, report.witness, report.witness_total_tail, std::move(tail), 1e-9);
}

double constant_rate_residual(const Poset& poset, const Pdf<double>& pdf, double alpha) {
  const auto F = upf_from_pdf(poset, pdf).values;
  double worst = 0.0;
  double total = pdf.tail_mass();
  for (ElementId x = 0; x < poset.size(); ++x) {
    worst = std::max(worst, std::abs(pdf[x] - alpha * F[x]));
    total += pdf[x];
  }
  return worst + std::abs(total - 1.0);
}

// ---------------------------------------------------------------------------
// Subsets

std::vector<double> poisson_pmf(double mu, unsigned K) {
  std::vector<double> out(K + 1);
  double term = std::exp(-mu);
  for (unsigned k = 0; k <= K; ++k) {
    out[k] = term;
    term *= mu / (k + 1.0);
  }
  return out;
}

std::vector<double> geometric_pmf(double success, unsigned K) {
  std::vector<double> out(K + 1);
  double term = success;
  for (unsigned k = 0; k <= K; ++k) {
    out[k] = term;
    term *= 1.0 - success;
  }
  return out;
}

PoissonCheckReport subsets_poisson_check(std::span<const double> marginal, double alpha, double tol,
                                         double tail_tol, std::span<const double> ts, unsigned shift_max) {
  if (marginal.empty()) raise(ErrorKind::InvalidArgument, "empty marginal");
  if (marginal.size() > 1001) raise(ErrorKind::InvalidArgument, "marginal longer than 1001 terms");
  if (!(alpha > 0.0 && alpha <= 1.0)) raise(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  const unsigned K = static_cast<unsigned>(marginal.size() - 1);
  PoissonCheckReport report;
  report.alpha = alpha;
  report.K = K;
  report.tolerance = tol;
  double total = 0.0;
  for (double p : marginal) {
    if (p < 0.0) raise(ErrorKind::InvalidArgument, "negative probability in marginal");
    total += p;
  }
  report.missing_mass = 1.0 - total;
  if (report.missing_mass > tail_tol) {
    raise(ErrorKind::TruncationTooSevere, "marginal misses mass " + std::to_string(report.missing_mass));
  }

  std::vector<std::vector<double>> C(K + 1, std::vector<double>(K + 1, 0.0));
  for (unsigned j = 0; j <= K; ++j) {
    C[j][0] = 1.0;
    for (unsigned k = 1; k <= j; ++k) C[j][k] = C[j - 1][k - 1] + (k < j ? C[j - 1][k] : 0.0);
  }
  auto push = [&](const char* cond, unsigned idx, double t, double lhs, double rhs, double& worst) {
    const double r = std::abs(lhs - rhs);
    worst = std::max(worst, r);
    report.rows.push_back({cond, idx, t, lhs, rhs, r});
  };

  for (unsigned k = 0; k <= K; ++k) {
    double rhs = 0.0;
    for (unsigned j = k; j <= K; ++j) rhs += ((j + k) % 2 == 0 ? 1.0 : -1.0) * C[j][k] * marginal[j];
    push("lemma", k, 0.0, alpha * marginal[k], rhs, report.max_lemma);
  }
  auto G = [&](double s) {
    double acc = 0.0;
    for (unsigned j = K + 1; j-- > 0;) acc = acc * s + marginal[j];
    return acc;
  };
  static constexpr double kDefaultTs[] = {0.0, 0.5, 1.0};
  if (ts.empty()) ts = kDefaultTs;
  for (double t : ts) {
    for (unsigned n = 1; n <= shift_max; ++n) {
      push("pgf_shift", n, t, G(t - n), std::pow(alpha, n) * G(t), report.max_pgf_shift);
    }
  }
  for (unsigned n = 0; n <= K; ++n) {
    double moment = 0.0;
    double alternating = 0.0;
    for (unsigned j = n; j <= K; ++j) {
      moment += C[j][n] * marginal[j];
      alternating += (j % 2 == 0 ? 1.0 : -1.0) * C[j][n] * marginal[j];
    }
    push("binomial_moment", n, 0.0, marginal[n], alpha * moment, report.max_binomial_moment);
    push("alternating_moment", n, 0.0, (n % 2 == 0 ? 1.0 : -1.0) * alternating, alpha * alpha * moment,
         report.max_alternating_moment);
  }
  report.passed = std::max({report.max_lemma, report.max_pgf_shift, report.max_binomial_moment,
                            report.max_alternating_moment}) < tol;
  return report;
}

std::vector<unsigned> semigroup_product_subsets(std::span<const unsigned> x, std::span<const unsigned> y) {
  std::vector<unsigned> xs(x.begin(), x.end());
  std::sort(xs.begin(), xs.end());
  if (!xs.empty() && xs.front() == 0) raise(ErrorKind::InvalidArgument, "subsets hold positive integers");
  std::vector<unsigned> out = xs;
  for (unsigned i : y) {
    if (i == 0) raise(ErrorKind::InvalidArgument, "subsets hold positive integers");
    // i-th positive integer not in x
    unsigned candidate = i;
    for (unsigned v : xs) {
      if (v <= candidate) ++candidate;
      else break;
    }
    out.push_back(candidate);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SubsetsPoset subsets_poset(unsigned M, unsigned m_cap, bool truncated) {
  if (M > 20) raise(ErrorKind::InvalidParams, "ground set larger than 20");
  m_cap = std::min(m_cap, M);
  SubsetsPoset out;
  std::vector<std::uint32_t> masks;
  for (std::uint32_t mask = 0; mask < (1u << M); ++mask) {
    if (static_cast<unsigned>(std::popcount(mask)) <= m_cap) masks.push_back(mask);
  }
  auto as_set = [M](std::uint32_t mask) {
    std::vector<unsigned> s;
    for (unsigned i = 0; i < M; ++i) {
      if (mask & (1u << i)) s.push_back(i + 1);
    }
    return s;
  };
  std::sort(masks.begin(), masks.end(), [&](std::uint32_t a, std::uint32_t b) {
    const int pa = std::popcount(a);
    const int pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    return as_set(a) < as_set(b);
  });
  std::vector<ElementId> id_of(1u << M, 0);
  for (ElementId i = 0; i < masks.size(); ++i) {
    id_of[masks[i]] = i;
    out.sets.push_back(as_set(masks[i]));
  }
  std::vector<CoverPair> covers;
  std::vector<bool> present(1u << M, false);
  for (auto mask : masks) present[mask] = true;
  for (auto mask : masks) {
    for (unsigned i = 0; i < M; ++i) {
      const std::uint32_t up = mask | (1u << i);
      if (up != mask && present[up]) covers.push_back({id_of[mask], id_of[up]});
    }
  }
  std::vector<ElementId> boundary;
  if (truncated) {
    for (ElementId i = 0; i < masks.size(); ++i) boundary.push_back(i);
  }
  out.poset = Poset::build(masks.size(), covers, boundary);
  return out;
}

FeasibilityReport search_subsets_poset(const Rational& alpha, unsigned M, unsigned m_cap, const Rational& epsilon,
                                       bool exact) {
  const auto sp = subsets_poset(M, m_cap, true);
  auto problem = build_feasibility_problem(sp.poset, alpha, epsilon);
  auto& lp = problem.lp;
  // f(empty) = alpha
  auto& root = lp.add_row(RowSense::Eq, alpha - epsilon);
  root.coeffs[problem.f_var(0)] = 1;
  const double mu = -std::log(to_double(alpha));
  const auto pmf = poisson_pmf(mu, m_cap);
  for (unsigned s = 1; s <= std::min(m_cap, M); ++s) {
    long count = 0;
    auto& level = lp.add_row(RowSense::Le, Rational(0));
    for (ElementId x = 0; x < sp.sets.size(); ++x) {
      if (sp.sets[x].size() == s) {
        level.coeffs[problem.f_var(x)] = 1;
        ++count;
      }
    }
    level.rhs = rational_from_double(pmf[s]) - epsilon * Rational(count);
  }
  auto report = solve_feasibility(problem, exact, "union-bound+poisson-marginal");
  report.notes.push_back("evidence at this truncation only; does not settle existence on all finite subsets");
  report.notes.push_back("union-bound slack is an over-approximation");
  return report;
}

Embedding universality_embed(const Poset& poset) {
  Embedding out;
  out.sets.reserve(poset.size());
  for (ElementId x = 0; x < poset.size(); ++x) {
    std::vector<unsigned> s;
    for (auto id : bits_to_ids(poset.down_bits(x))) s.push_back(id + 1);
    out.sets.push_back(std::move(s));
  }
  out.order_isomorphic = true;
  for (ElementId x = 0; x < poset.size() && out.order_isomorphic; ++x) {
    for (ElementId y = 0; y < poset.size(); ++y) {
      const bool subset = std::includes(out.sets[y].begin(), out.sets[y].end(), out.sets[x].begin(), out.sets[x].end());
      if (subset != poset.leq(x, y)) {
        out.order_isomorphic = false;
        break;
      }
    }
  }
  return out;
}

}  // namespace posrate
