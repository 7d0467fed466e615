#pragma once

#include <optional>
#include <string>
#include <span>
#include <vector>

#include "posrate/error.hpp"
#include "posrate/poset.hpp"
#include "posrate/rational.hpp"

namespace posrate {

/// m(x, y). Throws NotComparable unless x <= y.
Rational mobius(const Poset& poset, ElementId x, ElementId y);

/// (Lf)(x) = sum over t <= x of f(t). Down-sets are always complete.
template <Scalar T>
std::vector<T> lower_op(const Poset& poset, std::span<const T> f) {
  if (f.size() != poset.size()) raise(ErrorKind::InvalidArgument, "table size does not match poset");
  std::vector<T> out(poset.size(), T(0));
  for (ElementId x = 0; x < poset.size(); ++x) {
    const auto& bits = poset.down_bits(x);
    T sum(0);
    for (auto t = bits.find_first(); t != Poset::Bits::npos; t = bits.find_next(t)) sum += f[t];
    out[x] = sum;
  }
  return out;
}

/// (Uf)(x) = sum over t >= x of f(t), plus tail[x] when per-element tail mass
/// beyond a truncation is supplied. Without tail data, any x whose up-set
/// meets the boundary raises TruncatedUpSet.
template <Scalar T>
std::vector<T> upper_op(const Poset& poset, std::span<const T> f,
                        std::optional<std::span<const T>> tail = std::nullopt) {
  if (f.size() != poset.size()) raise(ErrorKind::InvalidArgument, "table size does not match poset");
  if (tail && tail->size() != poset.size()) raise(ErrorKind::InvalidArgument, "tail size does not match poset");
  std::vector<T> out(poset.size(), T(0));
  for (ElementId x = 0; x < poset.size(); ++x) {
    if (!tail && poset.up_set_meets_boundary(x)) {
      raise(ErrorKind::TruncatedUpSet, "up-set of " + std::to_string(x) + " meets the truncation boundary");
    }
    const auto& bits = poset.up_bits(x);
    T sum(0);
    for (auto t = bits.find_first(); t != Poset::Bits::npos; t = bits.find_next(t)) sum += f[t];
    if (tail) sum += (*tail)[x];
    out[x] = sum;
  }
  return out;
}

/// Inverts L through the Möbius function: f(x) = sum_{t <= x} g(t) m(t, x).
template <Scalar T>
std::vector<T> mobius_invert_lower(const Poset& poset, std::span<const T> g) {
  if (g.size() != poset.size()) raise(ErrorKind::InvalidArgument, "table size does not match poset");
  std::vector<T> out(poset.size(), T(0));
  for (ElementId t = 0; t < poset.size(); ++t) {
    const auto& row = poset.mobius_row(t);
    const auto& above = poset.up_bits(t);
    for (auto x = above.find_first(); x != Poset::Bits::npos; x = above.find_next(x)) {
      if (row[x] != 0) out[x] += g[t] * T(static_cast<long>(row[x]));
    }
  }
  return out;
}

/// Rows lambda_0 .. lambda_n, with lambda_0 = 1 and lambda_{k+1} = L lambda_k.
class CumulativeTable {
 public:
  explicit CumulativeTable(std::vector<std::vector<Rational>> rows) : rows_(std::move(rows)) {}

  unsigned max_order() const { return static_cast<unsigned>(rows_.size() - 1); }
  const std::vector<Rational>& order(unsigned n) const { return rows_.at(n); }
  const Rational& at(unsigned n, ElementId x) const { return rows_.at(n).at(x); }

 private:
  std::vector<std::vector<Rational>> rows_;
};

CumulativeTable cumulative(const Poset& poset, unsigned n);

/// Generating function sum_k lambda_k(x) t^k truncated at n_max. On rooted
/// trees (chains included) the closed form 1/(1-t)^(d(x)+1) is also returned
/// and the tail bound is exact; elsewhere the bound uses lambda_k(x) <= |D[x]|^k.
struct GfValue {
  Rational partial_sum;
  std::optional<Rational> closed_form;
  double tail_bound = 0.0;
};

GfValue cumulative_gf(const Poset& poset, ElementId x, const Rational& t, unsigned n_max);

/// 1/(1-t)^(depth+1), the tree closed form. Throws GfDiverges for |t| >= 1.
Rational tree_gf(unsigned depth, const Rational& t);

}  // namespace posrate
