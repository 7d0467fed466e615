#include "posrate/ladder.hpp"

#include <algorithm>
#include <thread>

#include "posrate/incidence.hpp"
#include "series.hpp"

namespace posrate {

std::string to_string(PathKind kind) {
  switch (kind) {
    case PathKind::Iid: return "iid";
    case PathKind::Ladder: return "ladder";
    case PathKind::PartialProduct: return "partial_product";
  }
  return "unknown";
}

bool is_prefix(const NodePath& a, const NodePath& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

// ---------------------------------------------------------------------------
// FiniteDist

FiniteDist::FiniteDist(Poset poset, Pdf<double> pdf) : poset_(std::move(poset)), pdf_(std::move(pdf)) {
  if (pdf_.size() != poset_.size()) raise(ErrorKind::InvalidArgument, "pdf does not match poset");
  if (pdf_.tail_mass() != 0.0) raise(ErrorKind::InvalidArgument, "sampling needs a law without truncated tail");
  double acc = 0.0;
  cdf_.reserve(pdf_.size());
  for (const auto& p : pdf_.probs()) {
    acc += p;
    cdf_.push_back(acc);
  }
}

FiniteDist FiniteDist::from_exact(const Poset& poset, const Pdf<Rational>& pdf) {
  return FiniteDist(poset, to_float(pdf, poset));
}

ElementId FiniteDist::sample(Rng& rng) const {
  const double u = rng.uniform() * cdf_.back();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<ElementId>(it == cdf_.end() ? cdf_.size() - 1 : it - cdf_.begin());
}

ElementId FiniteDist::sample_above(ElementId y, Rng& rng) const {
  const auto& up = poset_.up_bits(y);
  double total = 0.0;
  for (auto z = up.find_first(); z != Poset::Bits::npos; z = up.find_next(z)) total += pdf_[z];
  const double u = rng.uniform() * total;
  double acc = 0.0;
  ElementId last = y;
  for (auto z = up.find_first(); z != Poset::Bits::npos; z = up.find_next(z)) {
    acc += pdf_[z];
    last = static_cast<ElementId>(z);
    if (u < acc) return last;
  }
  return last;
}

SamplePath<ElementId> sample_iid(const FiniteDist& dist, std::size_t n, Rng& rng) {
  SamplePath<ElementId> out;
  out.nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.nodes.push_back(dist.sample(rng));
  return out;
}

SamplePath<NodePath> sample_iid(const TreeLaw& law, std::size_t n, Rng& rng) {
  SamplePath<NodePath> out;
  out.nodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.nodes.push_back(law.sample(rng));
  return out;
}

SamplePath<ElementId> ladder_from_iid(const Poset& poset, const SamplePath<ElementId>& iid, std::size_t length) {
  return ladder_from_iid(iid, length, [&](ElementId a, ElementId b) { return poset.leq(a, b); });
}

SamplePath<NodePath> ladder_from_iid(const SamplePath<NodePath>& iid, std::size_t length) {
  return ladder_from_iid(iid, length, [](const NodePath& a, const NodePath& b) { return is_prefix(a, b); });
}

SamplePath<ElementId> ladder_markov_sample(const FiniteDist& dist, std::size_t n, Rng& rng) {
  SamplePath<ElementId> out;
  out.kind = PathKind::Ladder;
  if (n == 0) return out;
  out.nodes.push_back(dist.sample(rng));
  while (out.nodes.size() < n) out.nodes.push_back(dist.sample_above(out.nodes.back(), rng));
  return out;
}

SamplePath<NodePath> ladder_markov_sample(const TreeLaw& law, std::size_t n, Rng& rng) {
  SamplePath<NodePath> out;
  out.kind = PathKind::Ladder;
  if (n == 0) return out;
  out.nodes.push_back(law.sample(rng));
  while (out.nodes.size() < n) out.nodes.push_back(law.sample_above(out.nodes.back(), rng));
  return out;
}

std::vector<std::vector<Rational>> ladder_transition(const Poset& poset, const Pdf<Rational>& pdf) {
  const auto F = upf_from_pdf(poset, pdf).values;
  std::vector<std::vector<Rational>> g(poset.size(), std::vector<Rational>(poset.size(), Rational(0)));
  for (ElementId y = 0; y < poset.size(); ++y) {
    const auto& up = poset.up_bits(y);
    for (auto z = up.find_first(); z != Poset::Bits::npos; z = up.find_next(z)) g[y][z] = pdf[z] / F[y];
  }
  return g;
}

Rational ladder_joint_pdf(const Poset& poset, const Pdf<Rational>& pdf, std::span<const ElementId> ys) {
  if (ys.empty()) return Rational(1);
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
    if (!poset.leq(ys[i], ys[i + 1])) return Rational(0);
  }
  const auto r = rate(poset, pdf).values;
  Rational out = pdf[ys.back()];
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) out *= r[ys[i]];
  return out;
}

LadderTables ladder_exact_pdfs(const Poset& poset, const Pdf<Rational>& pdf, unsigned n) {
  const auto alpha = check_constant_rate(poset, pdf);
  if (!alpha) raise(ErrorKind::NotConstantRate, "ladder tables need a constant-rate law");
  const auto F = upf_from_pdf(poset, pdf).values;
  const auto lambda = cumulative(poset, n == 0 ? 0 : n - 1);
  LadderTables out;
  out.alpha = *alpha;
  Rational power(1);
  for (unsigned m = 1; m <= n; ++m) {
    power *= *alpha;
    std::vector<Rational> row(poset.size());
    Rational total(0);
    for (ElementId x = 0; x < poset.size(); ++x) {
      row[x] = power * lambda.at(m - 1, x) * F[x];
      total += row[x];
    }
    out.f.push_back(std::move(row));
    out.deficit.push_back(Rational(1) - total);
    out.certified_tail.push_back(to_double(out.deficit.back()));
  }
  return out;
}

TreeLadderTables ladder_exact_pdfs(const TreeLaw& law, unsigned n, unsigned depth) {
  if (!law.constant_rate()) raise(ErrorKind::NotConstantRate, "ladder tables need a constant-rate law");
  const auto table = law.table(depth);
  TreeLadderTables out{table.tree, ladder_exact_pdfs(table.tree.poset, table.pdf(), n)};
  const double alpha = to_double(*law.constant_rate());
  const double q = 1.0 - alpha;
  for (unsigned m = 1; m <= n; ++m) {
    // alpha^m sum_{j >= 1} C(m-1+depth+j, m-1) q^(depth+j)
    const auto s = detail::poly_geometric_sum(m - 1, depth, 1, q);
    const double scale = std::pow(alpha, m) * std::pow(q, depth + 1.0);
    out.tables.certified_tail[m - 1] = scale * (s.value + s.remainder);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Thinning

ThinExact thin_exact(const Poset& poset, const Pdf<Rational>& pdf, const Rational& p) {
  if (!(p > 0 && p <= 1)) raise(ErrorKind::InvalidArgument, "p must lie in (0, 1]");
  const auto cls = classify(poset);
  if (!cls.is_rooted_tree && !cls.is_antichain) {
    raise(ErrorKind::GfUnavailable, "no closed-form generating function for this poset");
  }
  const auto alpha = check_constant_rate(poset, pdf);
  if (!alpha) raise(ErrorKind::NotConstantRate, "thinning formula needs a constant-rate law");
  std::vector<unsigned> depth(poset.size(), 0);
  if (cls.is_rooted_tree) depth = tree_depths(poset);
  const auto F = upf_from_pdf(poset, pdf).values;

  const Rational a = *alpha;
  const Rational t = a * (Rational(1) - p);
  const Rational base = Rational(1) - t;
  std::vector<Rational> g(poset.size());
  for (ElementId x = 0; x < poset.size(); ++x) g[x] = p * a * F[x] / pow(base, depth[x] + 1);

  Rational tail(0);
  std::optional<std::vector<Rational>> upper;
  if (poset.is_truncated()) {
    // Below boundary b the level sums of F are (1 - alpha)^j F(b), so the
    // thinned mass there is p alpha F(b) / base^(d(b)+1) * rho / (1 - rho).
    const Rational rho = (Rational(1) - a) / base;
    std::vector<Rational> own(poset.size(), Rational(0));
    for (ElementId b : poset.boundary()) {
      own[b] = p * a * F[b] / pow(base, depth[b] + 1) * rho / (Rational(1) - rho);
      tail += own[b];
    }
    upper.emplace(poset.size(), Rational(0));
    for (ElementId x = 0; x < poset.size(); ++x) {
      const auto& up = poset.up_bits(x);
      for (ElementId b : poset.boundary()) {
        if (up.test(b)) (*upper)[x] += own[b];
      }
    }
  }
  ThinExact out{a, p, Pdf<Rational>::make(poset, std::move(g), tail, std::move(upper)), std::nullopt,
                p * a / (Rational(1) - a + p * a)};
  out.rate = check_constant_rate(poset, out.law);
  return out;
}

TreeThinExact thin_exact(const TreeLaw& law, const Rational& p, unsigned depth) {
  if (!law.constant_rate()) raise(ErrorKind::NotConstantRate, "thinning formula needs a constant-rate law");
  const auto table = law.table(depth);
  return {table.tree, thin_exact(table.tree.poset, table.pdf(), p)};
}

ElementId thin_sample(const FiniteDist& dist, double p, Rng& rng) {
  const auto m = rng.geometric(p);
  ElementId y = dist.sample(rng);
  for (std::uint64_t i = 1; i < m; ++i) y = dist.sample_above(y, rng);
  return y;
}

NodePath thin_sample(const TreeLaw& law, double p, Rng& rng) {
  const auto m = rng.geometric(p);
  NodePath y = law.sample(rng);
  for (std::uint64_t i = 1; i < m; ++i) y = law.sample_above(y, rng);
  return y;
}

// ---------------------------------------------------------------------------
// Free semigroup

namespace {

std::uint32_t free_arity(const TreeRule& rule) {
  const auto k = rule.uniform_arity();
  if (!k || *k == 0) raise(ErrorKind::NotFreeSemigroup, "tree rule '" + rule.name() + "' is not a uniform k-ary tree");
  return *k;
}

}  // namespace

SamplePath<NodePath> partial_products(const SamplePath<NodePath>& iid, const TreeRule& rule) {
  const auto k = free_arity(rule);
  SamplePath<NodePath> out;
  out.kind = PathKind::PartialProduct;
  NodePath z;
  for (const auto& x : iid.nodes) {
    for (auto c : x) {
      if (c >= k) raise(ErrorKind::NotFreeSemigroup, "letter outside the alphabet in " + path_key(x));
    }
    z.insert(z.end(), x.begin(), x.end());
    out.nodes.push_back(z);
  }
  return out;
}

TransitionPair transition_matrices(const TreeLaw& law, unsigned depth) {
  (void)free_arity(law.rule());
  const auto table = law.table(depth);
  const auto pdf = table.pdf();
  const auto& tree = table.tree;
  const auto& F = table.F.values;
  const std::size_t n = tree.paths.size();
  TransitionPair out{tree, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n, Rational(0))),
                     std::vector<std::vector<Rational>>(n, std::vector<Rational>(n, Rational(0)))};
  for (ElementId z = 0; z < n; ++z) {
    const auto& path = tree.paths[z];
    for (std::size_t len = 0; len <= path.size(); ++len) {
      const NodePath y(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(len));
      const NodePath suffix(path.begin() + static_cast<std::ptrdiff_t>(len), path.end());
      const ElementId yi = *tree.id(y);
      out.ladder[yi][z] = pdf[z] / F[yi];
      out.product[yi][z] = pdf[*tree.id(suffix)];
    }
  }
  return out;
}

EquivalenceReport equivalence_diagnostic(const TreeLaw& law, unsigned depth) {
  const auto pair = transition_matrices(law, depth);
  EquivalenceReport report;
  const auto& tree = pair.tree;
  for (ElementId z = 0; z < tree.paths.size(); ++z) {
    const auto& path = tree.paths[z];
    for (std::size_t len = 0; len <= path.size(); ++len) {
      const ElementId y = *tree.id(NodePath(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(len)));
      const Rational gap = abs(Rational(pair.ladder[y][z] - pair.product[y][z]));
      ++report.pairs_checked;
      if (gap > report.max_gap) {
        report.max_gap = gap;
        report.worst_from = tree.paths[y];
        report.worst_to = path;
      }
    }
  }
  report.exponential = report.max_gap == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Diagnostics

UniformityReport uniformity_diagnostic(const Poset& poset, const Pdf<Rational>& pdf) {
  const auto r = rate(poset, pdf).values;
  UniformityReport out;
  out.deviation.assign(poset.size(), Rational(0));
  for (ElementId y = 0; y < poset.size(); ++y) {
    const auto& down = poset.down_bits(y);
    Rational total(0);
    for (auto x = down.find_first(); x != Poset::Bits::npos; x = down.find_next(x)) total += r[x];
    const Rational uniform(1, static_cast<unsigned long>(down.count()));
    for (auto x = down.find_first(); x != Poset::Bits::npos; x = down.find_next(x)) {
      const Rational dev = abs(Rational(r[x] / total - uniform));
      if (dev > out.deviation[y]) out.deviation[y] = dev;
    }
    if (out.deviation[y] > out.max_deviation) {
      out.max_deviation = out.deviation[y];
      out.worst = y;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replicates

template <class V>
std::vector<std::uint64_t> replicate_counts(std::size_t reps, const SeedSpec& seed, unsigned threads,
                                            std::size_t n_bins, const std::function<V(Rng&)>& draw,
                                            const std::function<std::size_t(const V&)>& bin) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(reps, 1))));
  std::vector<std::vector<std::uint64_t>> partial(threads, std::vector<std::uint64_t>(n_bins, 0));
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned t) {
    try {
      const std::size_t lo = reps * t / threads;
      const std::size_t hi = reps * (t + 1) / threads;
      for (std::size_t i = lo; i < hi; ++i) {
        Rng rng = seed.stream(i);
        const auto b = bin(draw(rng));
        if (b >= n_bins) raise(ErrorKind::InvalidArgument, "bin index out of range");
        ++partial[t][b];
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<std::uint64_t> counts(n_bins, 0);
  for (const auto& part : partial) {
    for (std::size_t b = 0; b < n_bins; ++b) counts[b] += part[b];
  }
  return counts;
}

template std::vector<std::uint64_t> replicate_counts<ElementId>(std::size_t, const SeedSpec&, unsigned,
                                                                std::size_t,
                                                                const std::function<ElementId(Rng&)>&,
                                                                const std::function<std::size_t(const ElementId&)>&);
template std::vector<std::uint64_t> replicate_counts<NodePath>(std::size_t, const SeedSpec&, unsigned, std::size_t,
                                                               const std::function<NodePath(Rng&)>&,
                                                               const std::function<std::size_t(const NodePath&)>&);

std::size_t tree_bin(const MaterializedTree& tree, const NodePath& node) {
  if (node.size() > tree.max_depth) return tree.paths.size();
  const auto id = tree.id(node);
  return id ? *id : tree.paths.size();
}

}  // namespace posrate
