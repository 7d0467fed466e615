#include "posrate/incidence.hpp"

#include <cmath>
#include <limits>

namespace posrate {

Rational mobius(const Poset& poset, ElementId x, ElementId y) {
  if (!poset.leq(x, y)) {
    raise(ErrorKind::NotComparable, std::to_string(x) + " is not below " + std::to_string(y));
  }
  return Rational(static_cast<long>(poset.mobius_row(x)[y]));
}

CumulativeTable cumulative(const Poset& poset, unsigned n) {
  std::vector<std::vector<Rational>> rows;
  rows.reserve(n + 1);
  rows.emplace_back(poset.size(), Rational(1));
  for (unsigned k = 0; k < n; ++k) {
    rows.push_back(lower_op<Rational>(poset, rows.back()));
  }
  return CumulativeTable(std::move(rows));
}

Rational tree_gf(unsigned depth, const Rational& t) {
  if (abs(t) >= 1) raise(ErrorKind::GfDiverges, "generating function requires |t| < 1");
  return Rational(1) / pow(Rational(1) - t, depth + 1);
}

GfValue cumulative_gf(const Poset& poset, ElementId x, const Rational& t, unsigned n_max) {
  if (abs(t) >= 1) raise(ErrorKind::GfDiverges, "generating function requires |t| < 1");
  if (x >= poset.size()) raise(ErrorKind::InvalidArgument, "element id out of range");

  GfValue out;
  const auto table = cumulative(poset, n_max);
  Rational power(1);
  for (unsigned k = 0; k <= n_max; ++k) {
    out.partial_sum += table.at(k, x) * power;
    power *= t;
  }

  if (classify(poset).is_rooted_tree) {
    const auto depth = tree_depths(poset)[x];
    out.closed_form = tree_gf(depth, t);
    out.tail_bound = to_double(abs(*out.closed_form - out.partial_sum));
  } else {
    const double c = static_cast<double>(poset.down_bits(x).count()) * std::abs(to_double(t));
    out.tail_bound = c < 1.0 ? std::pow(c, static_cast<double>(n_max + 1)) / (1.0 - c)
                             : std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace posrate
