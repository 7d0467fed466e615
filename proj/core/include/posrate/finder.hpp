#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posrate/distribution.hpp"
#include "posrate/poset.hpp"
#include "posrate/rational.hpp"
#include "posrate/simplex.hpp"

namespace posrate {

enum class FeasibilityStatus { Feasible, Infeasible, ResidualOnly };

std::string to_string(FeasibilityStatus status);

/// The constant-rate condition at a fixed alpha as a linear system in
/// f(x) = epsilon + v_x (v >= 0) and tail slack.
///
/// Finite posets: f(x) = alpha sum_{y >= x} f(y) and sum f = 1.
/// Truncations add m(x) >= 0, the mass above x beyond the boundary:
/// f(x) = alpha (sum_{y >= x} f(y) + m(x)), sum f + T = 1. On trees m is the
/// sum of the boundary slacks below x (exact). Elsewhere m(x) is a variable
/// with max over children <= m(x) <= sum over children (union bound), and T
/// lies between the largest and the sum of m over minimal elements. The
/// relaxation is an over-approximation: feasible does not imply existence.
struct FeasibilityProblem {
  Poset poset;
  Rational alpha;
  Rational epsilon;
  bool tree_slack = false;
  std::vector<ElementId> slack_elements;   // elements owning an m variable
  std::vector<std::size_t> slack_index;    // element -> variable, or npos
  std::optional<std::size_t> total_index;  // T, when it is a separate variable
  LpProblem<Rational> lp;

  std::size_t f_var(ElementId x) const { return x; }
  /// LP point from f values and per-element tail m(x) (m(x) for every x;
  /// T = max over minimal elements of m on trees).
  std::vector<double> point(std::span<const double> f, std::span<const double> m, double total) const;
};

/// Throws EpsilonTooLarge when |P| epsilon > 1, InvalidArgument for alpha
/// outside (0, 1].
FeasibilityProblem build_feasibility_problem(const Poset& poset, const Rational& alpha, const Rational& epsilon);

struct FeasibilityReport {
  Rational alpha;
  double epsilon = 0.0;
  bool exact = false;
  std::string method;  // finite | tree-slack | union-bound
  FeasibilityStatus status = FeasibilityStatus::Infeasible;
  std::vector<double> witness;        // f on represented elements
  std::vector<double> witness_tail;   // m(x) per element
  double witness_total_tail = 0.0;
  double residual = 0.0;              // witness residual, or phase-one infeasibility
  std::size_t pivots = 0;
  std::vector<std::string> notes;
};

/// Feasibility on a finite poset (no boundary).
FeasibilityReport constant_rate_feasible_finite(const Poset& poset, const Rational& alpha, bool exact = false,
                                                const Rational& epsilon = Rational(1, 1000000000));

/// Feasibility on a truncation. The rational track is used when `exact` and
/// the poset has at most 40 elements.
FeasibilityReport constant_rate_feasible_truncated(const Poset& poset, const Rational& alpha,
                                                   const Rational& epsilon = Rational(1, 1000000000),
                                                   bool exact = false);

/// Dispatches on poset.is_truncated().
FeasibilityReport constant_rate_feasible(const Poset& poset, const Rational& alpha, const Rational& epsilon,
                                         bool exact);

/// Solves an already built problem (possibly with extra rows).
FeasibilityReport solve_feasibility(const FeasibilityProblem& problem, bool exact, std::string method);

/// "a:b:step" with exact decimal or p/q endpoints, inclusive of b.
std::vector<Rational> parse_alpha_grid(std::string_view spec);
std::vector<Rational> default_alpha_grid();

/// Cells solve in parallel (up to `threads`); the output is ordered by alpha.
std::vector<FeasibilityReport> alpha_grid_search(const Poset& poset, std::span<const Rational> grid,
                                                 const Rational& epsilon, bool exact, unsigned threads);

/// Witness pdf on the truncation with per-element tails m(x).
Pdf<double> witness_pdf(const Poset& poset, const FeasibilityReport& report);

/// max_x |f(x) - alpha F(x)| plus the normalization defect, F including tails.
double constant_rate_residual(const Poset& poset, const Pdf<double>& pdf, double alpha);

// ---------------------------------------------------------------------------
// Finite subsets of the positive integers

struct PoissonCheckRow {
  std::string condition;  // lemma | pgf_shift | binomial_moment | alternating_moment
  unsigned index = 0;     // k or n
  double t = 0.0;         // pgf_shift only
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

struct PoissonCheckReport {
  double alpha = 0.0;
  unsigned K = 0;
  double missing_mass = 0.0;
  std::vector<PoissonCheckRow> rows;
  double max_lemma = 0.0;
  double max_pgf_shift = 0.0;
  double max_binomial_moment = 0.0;
  double max_alternating_moment = 0.0;
  double tolerance = 0.0;
  bool passed = false;  // every residual below tolerance
};

/// Necessary conditions on the law of U = #(X) for a constant-rate law with
/// rate alpha on the finite subsets, evaluated from P(U = k), k = 0..K:
///   lemma              alpha P(U=k) = E[(-1)^(U+k) C(U,k)]
///   pgf_shift          G(t - n) = alpha^n G(t), t in `ts`, n <= shift_max
///   binomial_moment    P(U=n) = alpha E[C(U,n)]
///   alternating_moment (-1)^n E[(-1)^U C(U,n)] = alpha^2 E[C(U,n)]
/// Throws TruncationTooSevere when the marginal misses more than `tail_tol`.
PoissonCheckReport subsets_poisson_check(std::span<const double> marginal, double alpha, double tol = 1e-10,
                                         double tail_tol = 1e-12, std::span<const double> ts = {},
                                         unsigned shift_max = 5);

std::vector<double> poisson_pmf(double mu, unsigned K);
std::vector<double> geometric_pmf(double success, unsigned K);

/// x y = x u {x^c(i) : i in y}, where x^c(i) is the i-th positive integer
/// not in x. Sets are sorted vectors of positive integers.
std::vector<unsigned> semigroup_product_subsets(std::span<const unsigned> x, std::span<const unsigned> y);

/// Subsets of {1..M} of size <= m_cap under inclusion, ordered by size then
/// lexicographically. Every element is on the truncation boundary when
/// `truncated` (the full poset of finite subsets continues above each).
struct SubsetsPoset {
  Poset poset;
  std::vector<std::vector<unsigned>> sets;
};

SubsetsPoset subsets_poset(unsigned M, unsigned m_cap, bool truncated);

/// Truncated feasibility search on the subsets poset with the necessary
/// marginal conditions f(empty) = alpha and level sums <= Poisson(-ln alpha).
/// The report is evidence at this truncation only.
FeasibilityReport search_subsets_poset(const Rational& alpha, unsigned M, unsigned m_cap,
                                       const Rational& epsilon = Rational(1, 1000000000), bool exact = false);

struct Embedding {
  std::vector<std::vector<unsigned>> sets;  // D[x] with elements labeled id + 1
  bool order_isomorphic = false;
};

Embedding universality_embed(const Poset& poset);

}  // namespace posrate
