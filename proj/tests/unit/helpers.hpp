#pragma once

#include <vector>

#include "posrate/distribution.hpp"
#include "posrate/poset.hpp"
#include "posrate/rational.hpp"
#include "posrate/rng.hpp"

namespace posrate::fixtures {

inline Rational random_rational(Rng& rng, long span = 20, long max_den = 12) {
  Rational r(static_cast<long>(rng.below(2 * span + 1)) - span, static_cast<long>(rng.below(max_den)) + 1);
  r.canonicalize();
  return r;
}

inline std::vector<Rational> random_table(std::size_t n, Rng& rng) {
  std::vector<Rational> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_rational(rng));
  return out;
}

/// Random DAG on n elements: i < j related with probability `density`,
/// then reduced to its covers.
inline Poset random_poset(std::size_t n, double density, Rng& rng) {
  std::vector<CoverPair> rel;
  for (ElementId i = 0; i < n; ++i) {
    for (ElementId j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) rel.push_back({i, j});
    }
  }
  const auto covers = transitive_reduce(n, rel);
  return Poset::build(n, covers);
}

/// Strictly positive pdf with integer weights 1..9, normalized exactly.
inline Pdf<Rational> random_pdf(const Poset& poset, Rng& rng) {
  std::vector<Rational> w;
  Rational total(0);
  for (std::size_t i = 0; i < poset.size(); ++i) {
    w.emplace_back(static_cast<long>(rng.below(9)) + 1);
    total += w.back();
  }
  for (auto& v : w) v /= total;
  return Pdf<Rational>::make(poset, w);
}

/// Brute-force order closure from the covers alone.
inline std::vector<std::vector<bool>> closure(const Poset& poset) {
  const auto n = poset.size();
  std::vector<std::vector<bool>> leq(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) leq[i][i] = true;
  for (const auto& c : poset.cover_pairs()) leq[c.lower][c.upper] = true;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!leq[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (leq[k][j]) leq[i][j] = true;
      }
    }
  }
  return leq;
}

}  // namespace posrate::fixtures
