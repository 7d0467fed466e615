#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "posrate/error.hpp"
#include "posrate/rational.hpp"

namespace posrate {

enum class RowSense { Le, Eq, Ge };

/// min c.x subject to rows and x >= 0, dense.
template <Scalar T>
struct LpProblem {
  struct Row {
    std::vector<T> coeffs;
    RowSense sense = RowSense::Eq;
    T rhs = T(0);
  };

  std::size_t n_vars = 0;
  std::vector<Row> rows;
  std::vector<T> objective;  // empty means zero

  Row& add_row(RowSense sense, T rhs) {
    rows.push_back({std::vector<T>(n_vars, T(0)), sense, std::move(rhs)});
    return rows.back();
  }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

template <Scalar T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> x;
  T objective = T(0);
  T infeasibility = T(0);  // phase-one optimum: total artificial mass left
  std::size_t pivots = 0;
};

template <Scalar T>
LpProblem<double> to_float(const LpProblem<T>& lp) {
  LpProblem<double> out;
  out.n_vars = lp.n_vars;
  for (const auto& row : lp.rows) {
    auto& r = out.add_row(row.sense, to_double(row.rhs));
    for (std::size_t j = 0; j < lp.n_vars; ++j) r.coeffs[j] = to_double(row.coeffs[j]);
  }
  for (const auto& c : lp.objective) out.objective.push_back(to_double(c));
  return out;
}

/// Max violation of the rows and of x >= 0 at a point.
template <Scalar T>
double lp_residual(const LpProblem<T>& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (double v : x) worst = std::max(worst, -v);
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.n_vars; ++j) lhs += to_double(row.coeffs[j]) * x[j];
    const double d = lhs - to_double(row.rhs);
    switch (row.sense) {
      case RowSense::Le: worst = std::max(worst, d); break;
      case RowSense::Ge: worst = std::max(worst, -d); break;
      case RowSense::Eq: worst = std::max(worst, std::abs(d)); break;
    }
  }
  return worst;
}

namespace detail {

template <Scalar T>
bool is_negative(const T& v, double tol) {
  if constexpr (is_exact_v<T>) {
    (void)tol;
    return v < 0;
  } else {
    return v < -tol;
  }
}

template <Scalar T>
bool is_positive(const T& v, double tol) {
  if constexpr (is_exact_v<T>) {
    (void)tol;
    return v > 0;
  } else {
    return v > tol;
  }
}

template <Scalar T>
class Tableau {
 public:
  // cols: structural + slack/surplus + artificial; last column is the rhs.
  std::vector<std::vector<T>> a;
  std::vector<std::size_t> basis;
  std::size_t n_cols = 0;
  double tol = 1e-9;
  std::size_t pivots = 0;

  void pivot(std::size_t r, std::size_t c) {
    ++pivots;
    const T p = a[r][c];
    for (auto& v : a[r]) v /= p;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i == r) continue;
      const T factor = a[i][c];
      if (factor == 0) continue;
      for (std::size_t j = 0; j <= n_cols; ++j) {
        if (a[r][j] != 0) a[i][j] -= factor * a[r][j];
      }
    }
    basis[r] = c;
  }

  // Minimizes with reduced costs held in row `obj`; columns with allowed[j]
  // false never enter. Bland's rule: lowest eligible entering column, ties
  // in the ratio test broken by the lowest basic column.
  bool optimize(std::size_t obj, const std::vector<bool>& allowed) {
    const std::size_t m = basis.size();
    for (;;) {
      std::size_t enter = n_cols;
      for (std::size_t j = 0; j < n_cols; ++j) {
        if (allowed[j] && is_negative(a[obj][j], tol)) {
          enter = j;
          break;
        }
      }
      if (enter == n_cols) return true;
      std::size_t leave = m;
      T best_ratio(0);
      for (std::size_t i = 0; i < m; ++i) {
        if (!is_positive(a[i][enter], tol)) continue;
        const T ratio = a[i][n_cols] / a[i][enter];
        if (leave == m || ratio < best_ratio || (ratio == best_ratio && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace detail

/// Dense two-phase simplex with Bland's rule. Exact on the rational track;
/// on the float track pivots and reduced costs below `tol` count as zero.
template <Scalar T>
LpResult<T> solve_lp(const LpProblem<T>& lp, double tol = 1e-9) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.n_vars;
  std::size_t n_slack = 0;
  std::size_t n_art = 0;
  std::vector<int> flip(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    if (lp.rows[i].coeffs.size() != n) raise(ErrorKind::InvalidArgument, "LP row has the wrong width");
    RowSense s = lp.rows[i].sense;
    if (lp.rows[i].rhs < 0) {
      flip[i] = -1;
      if (s == RowSense::Le) s = RowSense::Ge;
      else if (s == RowSense::Ge) s = RowSense::Le;
    }
    if (s != RowSense::Eq) ++n_slack;
    if (s != RowSense::Le) ++n_art;
  }

  detail::Tableau<T> tab;
  tab.tol = tol;
  tab.n_cols = n + n_slack + n_art;
  // Rows 0..m-1 constraints, row m phase-two objective, row m+1 phase-one.
  tab.a.assign(m + 2, std::vector<T>(tab.n_cols + 1, T(0)));
  tab.basis.assign(m, 0);
  std::size_t slack = n;
  std::size_t art = n + n_slack;
  std::vector<bool> is_art(tab.n_cols, false);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& row = lp.rows[i];
    const T sign(flip[i]);
    for (std::size_t j = 0; j < n; ++j) tab.a[i][j] = sign * row.coeffs[j];
    tab.a[i][tab.n_cols] = sign * row.rhs;
    RowSense s = row.sense;
    if (flip[i] < 0 && s != RowSense::Eq) s = s == RowSense::Le ? RowSense::Ge : RowSense::Le;
    if (s == RowSense::Le) {
      tab.a[i][slack] = T(1);
      tab.basis[i] = slack++;
    } else {
      if (s == RowSense::Ge) tab.a[i][slack++] = T(-1);
      tab.a[i][art] = T(1);
      is_art[art] = true;
      tab.basis[i] = art++;
    }
  }
  for (std::size_t j = 0; j < n && j < lp.objective.size(); ++j) tab.a[m][j] = lp.objective[j];
  // Phase-one reduced costs: minus the sum of rows whose basic column is artificial.
  for (std::size_t i = 0; i < m; ++i) {
    if (!is_art[tab.basis[i]]) continue;
    for (std::size_t j = 0; j <= tab.n_cols; ++j) {
      if (!is_art[j]) tab.a[m + 1][j] -= tab.a[i][j];
    }
  }

  LpResult<T> result;
  std::vector<bool> all(tab.n_cols, true);
  tab.optimize(m + 1, all);
  result.infeasibility = -tab.a[m + 1][tab.n_cols];
  if (detail::is_positive(result.infeasibility, tol)) {
    result.status = LpStatus::Infeasible;
    result.pivots = tab.pivots;
    return result;
  }
  // Drive zero-valued artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (!is_art[tab.basis[i]]) continue;
    for (std::size_t j = 0; j < tab.n_cols; ++j) {
      if (!is_art[j] && (detail::is_positive(tab.a[i][j], tol) || detail::is_negative(tab.a[i][j], tol))) {
        tab.pivot(i, j);
        break;
      }
    }
  }
  std::vector<bool> allowed(tab.n_cols);
  for (std::size_t j = 0; j < tab.n_cols; ++j) allowed[j] = !is_art[j];
  // Phase two: price out the basic columns of the objective row.
  for (std::size_t i = 0; i < m; ++i) {
    const T factor = tab.a[m][tab.basis[i]];
    if (factor == 0) continue;
    for (std::size_t j = 0; j <= tab.n_cols; ++j) tab.a[m][j] -= factor * tab.a[i][j];
  }
  if (!tab.optimize(m, allowed)) {
    result.status = LpStatus::Unbounded;
    result.pivots = tab.pivots;
    return result;
  }
  result.status = LpStatus::Optimal;
  result.x.assign(n, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < n) result.x[tab.basis[i]] = tab.a[i][tab.n_cols];
  }
  result.objective = -tab.a[m][tab.n_cols];
  result.pivots = tab.pivots;
  return result;
}

}  // namespace posrate
