#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "posrate/distribution.hpp"
#include "posrate/error.hpp"
#include "posrate/poset.hpp"
#include "posrate/rng.hpp"
#include "posrate/trees.hpp"

namespace posrate {

enum class PathKind { Iid, Ladder, PartialProduct };

std::string to_string(PathKind kind);

/// A realized sequence. `indices` holds the 1-based ladder indices N_n for
/// ladder paths extracted from an IID path and is empty otherwise.
template <class V>
struct SamplePath {
  PathKind kind = PathKind::Iid;
  std::vector<V> nodes;
  std::vector<std::uint64_t> indices;
};

/// a is a prefix of b: the order of the free semigroup.
bool is_prefix(const NodePath& a, const NodePath& b);

/// Float-track law on a finite poset, sampled by inversion on the CDF in id
/// order. Conditional draws on I[y] enumerate the up-set.
class FiniteDist {
 public:
  FiniteDist(Poset poset, Pdf<double> pdf);
  static FiniteDist from_exact(const Poset& poset, const Pdf<Rational>& pdf);

  const Poset& poset() const noexcept { return poset_; }
  const Pdf<double>& pdf() const noexcept { return pdf_; }

  ElementId sample(Rng& rng) const;
  /// z with probability f(z) / F(y) on I[y].
  ElementId sample_above(ElementId y, Rng& rng) const;

 private:
  Poset poset_;
  Pdf<double> pdf_;
  std::vector<double> cdf_;
};

SamplePath<ElementId> sample_iid(const FiniteDist& dist, std::size_t n, Rng& rng);
SamplePath<NodePath> sample_iid(const TreeLaw& law, std::size_t n, Rng& rng);

/// Y_1 = X_1, N_1 = 1 and N_{n+1} = min{m > N_n : X_m >= Y_n}. Throws
/// Exhausted when the input ends before `length` ladder values are found.
template <class V, class Leq>
SamplePath<V> ladder_from_iid(const SamplePath<V>& iid, std::size_t length, Leq leq) {
  SamplePath<V> out;
  out.kind = PathKind::Ladder;
  if (length == 0) return out;
  if (iid.nodes.empty()) raise(ErrorKind::Exhausted, "empty IID path");
  out.nodes.push_back(iid.nodes.front());
  out.indices.push_back(1);
  for (std::size_t m = 1; m < iid.nodes.size() && out.nodes.size() < length; ++m) {
    if (leq(out.nodes.back(), iid.nodes[m])) {
      out.nodes.push_back(iid.nodes[m]);
      out.indices.push_back(m + 1);
    }
  }
  if (out.nodes.size() < length) {
    raise(ErrorKind::Exhausted, "IID path of length " + std::to_string(iid.nodes.size()) + " yields only " +
                                    std::to_string(out.nodes.size()) + " ladder values");
  }
  return out;
}

SamplePath<ElementId> ladder_from_iid(const Poset& poset, const SamplePath<ElementId>& iid, std::size_t length);
SamplePath<NodePath> ladder_from_iid(const SamplePath<NodePath>& iid, std::size_t length);

/// Ladder chain drawn directly from its transition density f(z) / F(y).
SamplePath<ElementId> ladder_markov_sample(const FiniteDist& dist, std::size_t n, Rng& rng);
SamplePath<NodePath> ladder_markov_sample(const TreeLaw& law, std::size_t n, Rng& rng);

/// g(y, z) = f(z) / F(y) for y <= z, else 0.
std::vector<std::vector<Rational>> ladder_transition(const Poset& poset, const Pdf<Rational>& pdf);

/// Density of (Y_1, ..., Y_n): prod_{i<n} r(y_i) * f(y_n) on chains, else 0.
Rational ladder_joint_pdf(const Poset& poset, const Pdf<Rational>& pdf, std::span<const ElementId> ys);

struct LadderTables {
  Rational alpha;
  std::vector<std::vector<Rational>> f;  // f[m-1] is the law of Y_m on represented elements
  std::vector<Rational> deficit;         // 1 - sum of f[m-1]
  std::vector<double> certified_tail;    // independent bound on the mass beyond the truncation
};

/// f_m = alpha^m lambda_{m-1} F for m = 1..n. Throws NotConstantRate.
/// On truncations the tail is left to the caller (certified_tail = deficit).
LadderTables ladder_exact_pdfs(const Poset& poset, const Pdf<Rational>& pdf, unsigned n);

struct TreeLadderTables {
  MaterializedTree tree;
  LadderTables tables;
};

/// Tree version; the mass of f_m below depth `depth` is the negative
/// binomial tail alpha^m sum_{d > depth} C(m-1+d, m-1) (1-alpha)^d.
TreeLadderTables ladder_exact_pdfs(const TreeLaw& law, unsigned n, unsigned depth);

// ---------------------------------------------------------------------------
// Thinning

struct ThinExact {
  Rational alpha;
  Rational p;
  Pdf<Rational> law;                    // law of the first accepted ladder point
  std::optional<Rational> rate;         // constant rate of `law`, if verified
  Rational expected_rate;               // p alpha / (1 - alpha + p alpha)
};

/// g(x) = p alpha F(x) / (1 - alpha (1 - p))^(d(x)+1) on a rooted tree (or an
/// antichain). On a truncated tree the mass below each boundary node is
/// summed in closed form, assuming the law keeps its constant rate there.
/// Throws GfUnavailable, NotConstantRate.
ThinExact thin_exact(const Poset& poset, const Pdf<Rational>& pdf, const Rational& p);

struct TreeThinExact {
  MaterializedTree tree;
  ThinExact result;
};

TreeThinExact thin_exact(const TreeLaw& law, const Rational& p, unsigned depth);

/// Y_M with M geometric(p) on {1, 2, ...} drawn by inversion.
ElementId thin_sample(const FiniteDist& dist, double p, Rng& rng);
NodePath thin_sample(const TreeLaw& law, double p, Rng& rng);

// ---------------------------------------------------------------------------
// Free semigroup

/// Z_n = X_1 X_2 ... X_n by concatenation. Throws NotFreeSemigroup unless the
/// rule is a uniform k-ary tree.
SamplePath<NodePath> partial_products(const SamplePath<NodePath>& iid, const TreeRule& rule);

struct EquivalenceReport {
  Rational max_gap;
  NodePath worst_from;
  NodePath worst_to;
  std::size_t pairs_checked = 0;
  bool exponential = false;  // max_gap == 0
};

/// max |f(z)/F(y) - f(y^{-1} z)| over y <= z with d(z) <= depth, computed
/// exactly. Throws NotFreeSemigroup.
EquivalenceReport equivalence_diagnostic(const TreeLaw& law, unsigned depth);

/// Ladder and partial-product kernels on nodes of depth <= depth, indexed by
/// materialized id.
struct TransitionPair {
  MaterializedTree tree;
  std::vector<std::vector<Rational>> ladder;
  std::vector<std::vector<Rational>> product;
};

TransitionPair transition_matrices(const TreeLaw& law, unsigned depth);

// ---------------------------------------------------------------------------
// Diagnostics

struct UniformityReport {
  std::vector<Rational> deviation;  // per y: max_x |P(Y_1 = x | Y_2 = y) - 1/|D[y]||
  Rational max_deviation;
  ElementId worst = 0;
};

/// P(Y_1 = x | Y_2 = y) is proportional to r(x) on D[y].
UniformityReport uniformity_diagnostic(const Poset& poset, const Pdf<Rational>& pdf);

struct PointCounts {
  std::vector<std::uint64_t> counts;  // N_x per requested element
};

template <class V, class Leq>
PointCounts point_counts(const SamplePath<V>& path, std::span<const V> elements, Leq leq) {
  PointCounts out;
  out.counts.reserve(elements.size());
  for (const auto& x : elements) {
    std::uint64_t n = 0;
    for (const auto& w : path.nodes) n += leq(w, x) ? 1 : 0;
    out.counts.push_back(n);
  }
  return out;
}

/// For an increasing path: W_n <= x iff N_x >= n, for every n and element,
/// and N is monotone over comparable element pairs.
template <class V, class Leq>
bool check_point_counts(const SamplePath<V>& path, std::span<const V> elements, const PointCounts& counts, Leq leq) {
  for (std::size_t i = 0; i < elements.size(); ++i) {
    for (std::size_t n = 1; n <= path.nodes.size(); ++n) {
      if (leq(path.nodes[n - 1], elements[i]) != (counts.counts[i] >= n)) return false;
    }
    for (std::size_t j = 0; j < elements.size(); ++j) {
      if (leq(elements[i], elements[j]) && counts.counts[i] > counts.counts[j]) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Replicates

/// Runs draw(rng_i) for replicates i < reps, where rng_i = seed.stream(i),
/// and histograms the results with bin(value) in [0, n_bins). Results do not
/// depend on `threads`.
template <class V>
std::vector<std::uint64_t> replicate_counts(std::size_t reps, const SeedSpec& seed, unsigned threads,
                                            std::size_t n_bins, const std::function<V(Rng&)>& draw,
                                            const std::function<std::size_t(const V&)>& bin);

/// Bin index of a tree node: its materialized id, or tree size when it lies
/// below the truncation.
std::size_t tree_bin(const MaterializedTree& tree, const NodePath& node);

}  // namespace posrate
