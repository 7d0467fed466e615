#include <gtest/gtest.h>

#include "helpers.hpp"
#include "posrate/simplex.hpp"

using namespace posrate;

namespace {

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

}  // namespace

TEST(Simplex, TextbookMaximization) {
  // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6).
  LpProblem<Rational> lp;
  lp.n_vars = 2;
  lp.add_row(RowSense::Le, q(4)).coeffs = {q(1), q(0)};
  lp.add_row(RowSense::Le, q(12)).coeffs = {q(0), q(2)};
  lp.add_row(RowSense::Le, q(18)).coeffs = {q(3), q(2)};
  lp.objective = {q(-3), q(-5)};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_EQ(r.objective, q(-36));
  EXPECT_EQ(r.x, (std::vector<Rational>{q(2), q(6)}));
  const auto f = solve_lp(to_float(lp));
  ASSERT_EQ(f.status, LpStatus::Optimal);
  EXPECT_NEAR(f.objective, -36.0, 1e-9);
}

TEST(Simplex, EqualityAndGreaterRows) {
  // min x + y s.t. x + 2y = 4, x >= 1: optimum 5/2 at (1, 3/2).
  LpProblem<Rational> lp;
  lp.n_vars = 2;
  lp.add_row(RowSense::Eq, q(4)).coeffs = {q(1), q(2)};
  lp.add_row(RowSense::Ge, q(1)).coeffs = {q(1), q(0)};
  lp.objective = {q(1), q(1)};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_EQ(r.objective, q(5, 2));
  EXPECT_EQ(lp_residual(lp, {1.0, 1.5}), 0.0);
}

TEST(Simplex, NegativeRhsIsFlipped) {
  LpProblem<Rational> lp;
  lp.n_vars = 1;
  lp.add_row(RowSense::Le, q(-2)).coeffs = {q(-1)};
  lp.objective = {q(1)};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_EQ(r.x[0], q(2));
}

TEST(Simplex, Infeasible) {
  LpProblem<Rational> lp;
  lp.n_vars = 1;
  lp.add_row(RowSense::Ge, q(2)).coeffs = {q(1)};
  lp.add_row(RowSense::Le, q(1)).coeffs = {q(1)};
  const auto r = solve_lp(lp);
  EXPECT_EQ(r.status, LpStatus::Infeasible);
  EXPECT_EQ(r.infeasibility, q(1));
}

TEST(Simplex, Unbounded) {
  LpProblem<Rational> lp;
  lp.n_vars = 2;
  lp.add_row(RowSense::Ge, q(1)).coeffs = {q(1), q(-1)};
  lp.objective = {q(-1), q(0)};
  EXPECT_EQ(solve_lp(lp).status, LpStatus::Unbounded);
}

TEST(Simplex, DegenerateCycleProneInstance) {
  // Beale's example; cycles under the textbook rule, terminates under Bland's.
  LpProblem<Rational> lp;
  lp.n_vars = 4;
  lp.add_row(RowSense::Le, q(0)).coeffs = {q(1, 4), q(-8), q(-1), q(9)};
  lp.add_row(RowSense::Le, q(0)).coeffs = {q(1, 2), q(-12), q(-1, 2), q(3)};
  lp.add_row(RowSense::Le, q(1)).coeffs = {q(0), q(0), q(1), q(0)};
  lp.objective = {q(-3, 4), q(20), q(-1, 2), q(6)};
  const auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_EQ(r.objective, q(-5, 4));
}

TEST(Simplex, WrongRowWidthThrows) {
  LpProblem<Rational> lp;
  lp.n_vars = 2;
  lp.rows.push_back({{q(1)}, RowSense::Le, q(1)});
  EXPECT_THROW(solve_lp(lp), Error);
}

TEST(Simplex, RandomFeasibleSystemsAgreeAcrossTracks) {
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + rng.below(5);
    const std::size_t m = 1 + rng.below(4);
    std::vector<Rational> x0;
    for (std::size_t j = 0; j < n; ++j) x0.push_back(q(static_cast<long>(rng.below(5))));
    LpProblem<Rational> lp;
    lp.n_vars = n;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<Rational> row;
      Rational rhs(0);
      for (std::size_t j = 0; j < n; ++j) {
        row.push_back(fixtures::random_rational(rng, 5, 3));
        rhs += row.back() * x0[j];
      }
      const auto sense = static_cast<RowSense>(rng.below(3));
      lp.add_row(sense, rhs).coeffs = row;
    }
    auto& bound = lp.add_row(RowSense::Le, q(100));
    for (auto& c : bound.coeffs) c = q(1);
    lp.objective = fixtures::random_table(n, rng);
    const auto exact = solve_lp(lp);
    ASSERT_EQ(exact.status, LpStatus::Optimal);
    std::vector<double> xd;
    for (const auto& v : exact.x) xd.push_back(to_double(v));
    EXPECT_LE(lp_residual(lp, xd), 1e-12);
    const auto flt = solve_lp(to_float(lp));
    ASSERT_EQ(flt.status, LpStatus::Optimal);
    EXPECT_NEAR(flt.objective, to_double(exact.objective), 1e-7);
  }
}
