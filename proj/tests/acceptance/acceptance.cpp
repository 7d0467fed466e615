// Acceptance gate. Each criterion prints one PASS/FAIL line; the exit status
// is nonzero when any criterion fails. Oracles here are computed from the
// cover relation directly and do not reuse the library's closure, operators
// or closed forms unless a line says otherwise.

#include <algorithm>
#include <array>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "posrate/catalog.hpp"
#include "posrate/distribution.hpp"
#include "posrate/finder.hpp"
#include "posrate/incidence.hpp"
#include "posrate/ladder.hpp"
#include "posrate/poset.hpp"
#include "posrate/rng.hpp"
#include "posrate/simplex.hpp"
#include "posrate/stats.hpp"
#include "posrate/trees.hpp"

using namespace posrate;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr std::size_t kReplicates = 100000;

Rational q(long a, long b = 1) {
  Rational r(a, b);
  r.canonicalize();
  return r;
}

unsigned worker_count() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

// Failures collected by one criterion; the first few are printed.
struct Outcome {
  std::vector<std::string> failures;
  std::string summary;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

// ---------------------------------------------------------------------------
// Independent order oracle: reflexive closure from the cover pairs alone.

struct Closure {
  std::size_t n = 0;
  std::vector<std::vector<char>> leq;  // leq[x][y]: x <= y

  explicit Closure(const Poset& p) : n(p.size()), leq(n, std::vector<char>(n, 0)) {
    std::vector<std::vector<ElementId>> up(n);
    for (const auto& c : p.cover_pairs()) up[c.lower].push_back(c.upper);
    for (ElementId x = 0; x < n; ++x) {
      std::vector<ElementId> stack = {x};
      leq[x][x] = 1;
      while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        for (auto w : up[v]) {
          if (!leq[x][w]) {
            leq[x][w] = 1;
            stack.push_back(w);
          }
        }
      }
    }
  }
};

// lambda_0..lambda_order by summing over down-sets of the oracle closure.
std::vector<std::vector<Rational>> oracle_lambda(const Closure& c, unsigned order) {
  std::vector<std::vector<Rational>> rows(order + 1, std::vector<Rational>(c.n, q(0)));
  std::fill(rows[0].begin(), rows[0].end(), q(1));
  for (unsigned k = 0; k < order; ++k) {
    for (ElementId x = 0; x < c.n; ++x) {
      Rational s(0);
      for (ElementId t = 0; t < c.n; ++t) {
        if (c.leq[t][x]) s += rows[k][t];
      }
      rows[k + 1][x] = s;
    }
  }
  return rows;
}

// F(x) = sum of f over I[x] plus the mass above x beyond the truncation.
std::vector<Rational> oracle_upf(const Closure& c, const Pdf<Rational>& pdf) {
  std::vector<Rational> F(c.n, q(0));
  for (ElementId x = 0; x < c.n; ++x) {
    Rational s = pdf.upper_tail() ? (*pdf.upper_tail())[x] : q(0);
    for (ElementId y = 0; y < c.n; ++y) {
      if (c.leq[x][y]) s += pdf[y];
    }
    F[x] = s;
  }
  return F;
}

std::vector<Rational> random_table(std::size_t n, Rng& rng) {
  std::vector<Rational> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(q(static_cast<long>(rng.below(41)) - 20, 1 + rng.below(12)));
  return v;
}

Poset random_poset(std::size_t n, double density, Rng& rng) {
  std::vector<CoverPair> rel;
  for (ElementId i = 0; i < n; ++i) {
    for (ElementId j = i + 1; j < n; ++j) {
      if (rng.uniform() < density) rel.push_back({i, j});
    }
  }
  const auto covers = transitive_reduce(n, rel);
  return Poset::build(n, covers);
}

Pdf<Rational> random_pdf(const Poset& p, Rng& rng) {
  std::vector<Rational> w;
  Rational total(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    w.push_back(q(1 + static_cast<long>(rng.below(9))));
    total += w.back();
  }
  for (auto& v : w) v /= total;
  return Pdf<Rational>::make(p, w);
}

// Number of elements in a "{a,b,...}" label.
unsigned label_cardinality(const std::string& label) {
  if (label == "{}") return 0;
  return static_cast<unsigned>(std::count(label.begin(), label.end(), ',')) + 1;
}

// Total variation against an exact pdf whose missing mass is the last bin.
double tv_against(const std::vector<std::uint64_t>& counts, const std::vector<Rational>& probs) {
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

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Exact identities

Outcome criterion_exact_identities() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  std::vector<CatalogItem> items;
  for (auto& item : catalog_defaults()) items.push_back(std::move(item));
  items.push_back(catalog_build("chain", {{"n", "400"}}));
  items.push_back(catalog_build("kary_tree", {{"k", "3"}, {"depth", "5"}}));
  items.push_back(catalog_build("kary_tree", {{"k", "2"}, {"depth", "7"}}));
  items.push_back(catalog_build("subsets", {{"M", "6"}, {"m_cap", "4"}}));
  items.push_back(catalog_build("boolean", {{"M", "8"}}));
  items.push_back(catalog_build("product", {{"n1", "10"}, {"n2", "20"}}));

  Rng rng = SeedSpec{kSeed}.stream(1);
  constexpr unsigned kOrder = 6;
  std::size_t posets = 0;
  for (const auto& item : items) {
    const auto& P = item.poset;
    if (P.size() > 500) continue;
    ++posets;
    const Closure c(P);
    const std::string tag = item.name + "(" + std::to_string(P.size()) + ")";

    // Möbius: sum_{x <= z <= y} m(x, z) = delta(x, y), and the inversion roundtrip.
    bool delta_ok = true;
    for (ElementId x = 0; x < P.size() && delta_ok; ++x) {
      const auto& row = P.mobius_row(x);
      for (ElementId y = 0; y < P.size() && delta_ok; ++y) {
        if (!c.leq[x][y]) continue;
        std::int64_t s = 0;
        for (ElementId z = 0; z < P.size(); ++z) {
          if (c.leq[x][z] && c.leq[z][y]) s += row[z];
        }
        delta_ok = s == (x == y ? 1 : 0);
      }
    }
    out.expect(delta_ok, tag + ": Möbius delta identity");
    const auto f = random_table(P.size(), rng);
    const auto g = random_table(P.size(), rng);
    const auto lf = lower_op<Rational>(P, f);
    out.expect(mobius_invert_lower<Rational>(P, lf) == f, tag + ": Möbius inversion roundtrip");

    // Duality <Lf, g> = <f, Ug>, with zero tail data on truncations.
    const std::vector<Rational> zero(P.size(), q(0));
    const auto ug = upper_op<Rational>(P, g, std::span<const Rational>(zero));
    Rational lhs(0), rhs(0);
    for (ElementId x = 0; x < P.size(); ++x) {
      lhs += lf[x] * g[x];
      rhs += f[x] * ug[x];
    }
    out.expect(lhs == rhs, tag + ": duality");
    for (ElementId x = 0; x < P.size(); ++x) {
      Rational s(0);
      for (ElementId t = 0; t < P.size(); ++t) {
        if (c.leq[t][x]) s += f[t];
      }
      if (s != lf[x]) {
        out.expect(false, tag + ": L differs from the oracle sum");
        break;
      }
    }

    // lambda_n for n <= 6 against the oracle recursion and the closed forms.
    const auto lam = cumulative(P, kOrder);
    const auto oracle = oracle_lambda(c, kOrder);
    for (unsigned n = 0; n <= kOrder; ++n) out.expect(lam.order(n) == oracle[n], tag + ": lambda_" + std::to_string(n));
    const auto cls = classify(P);
    for (ElementId x = 0; x < P.size(); ++x) {
      for (unsigned n = 0; n <= kOrder; ++n) {
        std::optional<Rational> closed;
        if (item.name == "chain" || item.name == "geometric_chain") closed = binomial(n + x, x);
        if (item.name == "subsets" || item.name == "boolean") {
          closed = pow(q(static_cast<long>(n) + 1), label_cardinality(item.labels[x]));
        }
        if (item.name == "product") {
          const auto n2 = static_cast<ElementId>(std::stoul(item.params.at("n2")));
          closed = binomial(n + x / n2, x / n2) * binomial(n + x % n2, x % n2);
        }
        if (cls.is_rooted_tree && item.name == "kary_tree") {
          const unsigned d = static_cast<unsigned>(std::count(item.labels[x].begin(), item.labels[x].end(), '.')) +
                             (item.labels[x] == "e" ? 0 : 1);
          closed = binomial(n + d, n);
        }
        if (closed && lam.at(n, x) != *closed) {
          out.expect(false, tag + ": closed form at element " + item.labels[x] + " n=" + std::to_string(n));
          n = kOrder + 1;
          x = static_cast<ElementId>(P.size());
        }
      }
    }
  }

  // The named values.
  const auto chain = make_chain(6);
  out.expect(cumulative(chain, 2).at(2, 3) == q(10), "chain lambda_2(3) = 10");
  const auto subsets = catalog_build("subsets");
  const auto it = std::find(subsets.labels.begin(), subsets.labels.end(), "{1,3}");
  out.expect(it != subsets.labels.end() &&
                 cumulative(subsets.poset, 2).at(2, static_cast<ElementId>(it - subsets.labels.begin())) == q(9),
             "subsets lambda_2({1,3}) = 9");

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.expect(secs < 10.0, "runtime " + fmt(secs) + " s exceeds 10 s");
  out.summary = std::to_string(posets) + " posets, n <= 6, " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 2. Constant-rate tree construction

Outcome criterion_tree_construction() {
  Outcome out;
  for (std::uint32_t k = 1; k <= 3; ++k) {
    for (const auto& alpha : {q(3, 10), q(1, 2), q(7, 10)}) {
      const std::string tag = "k=" + std::to_string(k) + " alpha=" + to_string(alpha);
      const auto t = construct_constant_rate_upf(TreeRule::kary(k), alpha, Splitter::uniform(), 6);
      const auto& P = t.tree.poset;
      const auto pdf = t.pdf();
      out.expect(check_constant_rate(P, pdf) == alpha, tag + ": recovered rate");
      const Rational beta = (1 - alpha) / k;
      std::vector<Rational> level(7, q(0));
      for (ElementId x = 0; x < P.size(); ++x) {
        const unsigned d = t.tree.depth[x];
        if (t.F.values[x] != pow(beta, d)) out.expect(false, tag + ": F closed form at " + path_key(t.tree.paths[x]));
        if (pdf[x] != alpha * t.F.values[x]) out.expect(false, tag + ": f != alpha F");
        level[d] += t.F.values[x];
      }
      // On a tree, P(d(X) >= n) is the UPF mass of level n.
      const auto law = depth_distribution(P, pdf);
      for (unsigned n = 0; n <= 6; ++n) {
        out.expect(level[n] == pow(1 - alpha, n), tag + ": level mass n=" + std::to_string(n));
        out.expect(law.at_least.at(n) == pow(1 - alpha, n), tag + ": P(d >= " + std::to_string(n) + ")");
      }
    }
  }
  out.summary = "9 laws at depth 6";
  return out;
}

// ---------------------------------------------------------------------------
// 3. Ladder exactness

// Law of the next ladder value from y, straight from the construction: each
// draw lands on some outcome; outcomes not above y are skipped, so the hit
// distribution is f(z) [y <= z] / (1 - mass not above y). Outcomes beyond the
// truncation are lumped per boundary node b; they lie above y iff y <= b.
struct Outcomes {
  const Closure& c;
  const Pdf<Rational>& pdf;
  std::vector<ElementId> boundary;
  std::vector<Rational> lump;  // mass strictly beyond boundary[i]

  Rational not_above(ElementId y) const {
    Rational s(0);
    for (ElementId x = 0; x < c.n; ++x) {
      if (!c.leq[y][x]) s += pdf[x];
    }
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      if (!c.leq[y][boundary[i]]) s += lump[i];
    }
    // Beyond-truncation mass that is not assigned to a boundary node.
    Rational assigned(0);
    for (const auto& v : lump) assigned += v;
    return s + (pdf.tail_mass() - assigned);
  }
};

std::vector<std::vector<Rational>> brute_ladder_laws(const Outcomes& o, unsigned n) {
  std::vector<std::vector<Rational>> laws;
  std::vector<Rational> cur(o.c.n);
  for (ElementId x = 0; x < o.c.n; ++x) cur[x] = o.pdf[x];
  laws.push_back(cur);
  for (unsigned m = 1; m < n; ++m) {
    std::vector<Rational> next(o.c.n, q(0));
    for (ElementId y = 0; y < o.c.n; ++y) {
      if (cur[y] == 0) continue;
      const Rational stay = o.not_above(y);
      for (ElementId z = 0; z < o.c.n; ++z) {
        if (o.c.leq[y][z]) next[z] += cur[y] * o.pdf[z] / (1 - stay);
      }
    }
    cur = next;
    laws.push_back(cur);
  }
  return laws;
}

Outcome criterion_ladder() {
  Outcome out;
  std::size_t checked = 0;

  // f_n = alpha^n lambda_{n-1} F on constant-rate laws with at most 12 elements.
  std::vector<CatalogItem> rated = {
      catalog_build("antichain", {{"n", "4"}}),
      catalog_build("antichain", {{"n", "12"}}),
      catalog_build("geometric_chain", {{"n", "12"}, {"alpha", "1/3"}}),
      catalog_build("geometric_chain", {{"n", "5"}, {"alpha", "7/10"}}),
      catalog_build("kary_tree", {{"k", "2"}, {"depth", "2"}, {"alpha", "1/2"}}),
      catalog_build("kary_tree", {{"k", "3"}, {"depth", "1"}, {"alpha", "2/5"}}),
      catalog_build("kary_tree", {{"k", "2"}, {"depth", "2"}, {"alpha", "3/10"}}),
  };
  for (const auto& item : rated) {
    const auto& P = item.poset;
    const auto& pdf = *item.pdf;
    const std::string tag = item.name + "(" + std::to_string(P.size()) + ")";
    const Closure c(P);
    Outcomes o{c, pdf, {}, {}};
    for (auto b : P.boundary()) {
      o.boundary.push_back(b);
      o.lump.push_back((*pdf.upper_tail())[b]);
    }
    const auto brute = brute_ladder_laws(o, 3);
    const auto lam = oracle_lambda(c, 2);
    const auto F = oracle_upf(c, pdf);
    const auto alpha = *item.alpha;
    const auto tables = ladder_exact_pdfs(P, pdf, 3);
    for (unsigned m = 1; m <= 3; ++m) {
      std::vector<Rational> formula(P.size());
      for (ElementId x = 0; x < P.size(); ++x) formula[x] = pow(alpha, m) * lam[m - 1][x] * F[x];
      out.expect(brute[m - 1] == formula, tag + ": construction vs alpha^n lambda F, n=" + std::to_string(m));
      out.expect(tables.f[m - 1] == formula, tag + ": library f_" + std::to_string(m));
      ++checked;
    }
  }

  // Joint density of (Y_1, Y_2, Y_3) on random posets with arbitrary laws.
  Rng rng = SeedSpec{kSeed}.stream(3);
  for (int trial = 0; trial < 60; ++trial) {
    const auto P = random_poset(1 + rng.below(12), 0.1 + 0.5 * rng.uniform(), rng);
    const auto pdf = random_pdf(P, rng);
    const Closure c(P);
    const Outcomes o{c, pdf, {}, {}};
    for (ElementId a = 0; a < P.size(); ++a) {
      for (ElementId b = 0; b < P.size(); ++b) {
        for (ElementId d = 0; d < P.size(); ++d) {
          Rational brute(0);
          if (c.leq[a][b] && c.leq[b][d]) {
            brute = pdf[a] * (pdf[b] / (1 - o.not_above(a))) * (pdf[d] / (1 - o.not_above(b)));
          }
          const std::vector<ElementId> ys = {a, b, d};
          if (ladder_joint_pdf(P, pdf, std::span<const ElementId>(ys)) != brute) {
            out.expect(false, "joint pdf on random poset, trial " + std::to_string(trial));
            a = b = d = static_cast<ElementId>(P.size());
          }
        }
      }
    }
    ++checked;
  }

  // Binary tree, alpha = 1/2, depth 4: Y_1 | Y_2 = y is uniform on D[y].
  const auto t = construct_constant_rate_upf(TreeRule::kary(2), q(1, 2), Splitter::uniform(), 4);
  const auto& T = t.tree.poset;
  const auto tpdf = t.pdf();
  const Closure tc(T);
  const auto TF = oracle_upf(tc, tpdf);
  for (ElementId y = 0; y < T.size(); ++y) {
    std::vector<Rational> joint;
    Rational total(0);
    for (ElementId x = 0; x < T.size(); ++x) {
      if (!tc.leq[x][y]) continue;
      joint.push_back(tpdf[x] * tpdf[y] / TF[x]);
      total += joint.back();
    }
    for (const auto& v : joint) {
      if (v / total != q(1, static_cast<long>(joint.size()))) {
        out.expect(false, "conditional not uniform at " + path_key(t.tree.paths[y]));
        break;
      }
    }
  }
  out.expect(uniformity_diagnostic(T, tpdf).max_deviation == 0, "library uniformity diagnostic");
  out.summary = std::to_string(checked) + " exact table comparisons, uniform conditional on 31 nodes";
  return out;
}

// ---------------------------------------------------------------------------
// 4. Thinning

Outcome criterion_thinning() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const auto alpha = q(1, 2);
  const auto p = q(1, 2);
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), alpha);
  const auto exact = thin_exact(law, p, 4);
  const auto& res = exact.result;
  out.expect(res.rate.has_value() && *res.rate == q(1, 3), "thinned rate is not 1/3");
  out.expect(res.expected_rate == p * alpha / (1 - alpha + p * alpha), "expected rate p alpha / (1 - alpha + p alpha)");

  // Oracle: g = sum_m p (1-p)^(m-1) f_m with f_m = alpha^m C(m-1+d, d) F on the tree.
  const auto& tree = exact.tree;
  double worst = 0.0;
  for (ElementId x = 0; x < tree.paths.size(); ++x) {
    const unsigned d = tree.depth[x];
    const long double F = std::pow(0.25L, static_cast<long double>(d));
    long double g = 0.0L, coef = 1.0L;  // coef = C(m-1+d, d)
    for (unsigned m = 1; m <= 200; ++m) {
      g += 0.5L * std::pow(0.5L, m - 1.0L) * std::pow(0.5L, static_cast<long double>(m)) * coef * F;
      coef = coef * static_cast<long double>(m + d) / static_cast<long double>(m);
    }
    worst = std::max(worst, static_cast<double>(std::fabs(g - static_cast<long double>(to_double(res.law[x])))));
  }
  out.expect(worst < 1e-15, "thinned law differs from the series by " + fmt(worst));

  const auto counts = replicate_counts<NodePath>(
      kReplicates, SeedSpec{kSeed + 4}, worker_count(), tree.paths.size() + 1,
      [&](Rng& rng) { return thin_sample(law, 0.5, rng); }, [&](const NodePath& v) { return tree_bin(tree, v); });
  const double tv = tv_against(counts, res.law.probs());
  out.expect(tv <= 0.01, "TV " + fmt(tv));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.expect(secs < 60.0, "runtime " + fmt(secs) + " s exceeds 60 s");
  out.summary = "rate 1/3, TV " + fmt(tv) + " at 1e5 replicates, " + fmt(secs) + " s";
  return out;
}

// ---------------------------------------------------------------------------
// 5. Exponential equivalence

bool prefix_of(const NodePath& a, const NodePath& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

Rational kernel_gap(const TreeLaw& law, unsigned depth, Outcome& out, const std::string& tag) {
  const auto pair = transition_matrices(law, depth);
  const auto& paths = pair.tree.paths;
  Rational gap(0);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t j = 0; j < paths.size(); ++j) {
      Rational ladder(0), product(0);
      if (prefix_of(paths[i], paths[j])) {
        ladder = law.pdf(paths[j]) / law.upf(paths[i]);
        product = law.pdf(NodePath(paths[j].begin() + static_cast<std::ptrdiff_t>(paths[i].size()), paths[j].end()));
      }
      if (pair.ladder[i][j] != ladder || pair.product[i][j] != product) {
        out.expect(false, tag + ": library kernel differs from the oracle");
        return gap;
      }
      gap = std::max<Rational>(gap, abs(ladder - product));
    }
  }
  return gap;
}

Outcome criterion_equivalence() {
  Outcome out;
  const auto uniform = TreeLaw::constant_rate(TreeRule::kary(2), q(1, 2));
  const auto skew = TreeLaw::constant_rate(TreeRule::kary(2), q(1, 2), Splitter::rotating({q(7, 10), q(3, 10)}));
  const auto g0 = kernel_gap(uniform, 3, out, "uniform");
  const auto g1 = kernel_gap(skew, 3, out, "70/30");
  out.expect(g0 == 0, "uniform split: kernels differ by " + to_string(g0));
  out.expect(g1 > q(1, 1000), "70/30 split: gap " + to_string(g1));
  out.expect(check_constant_rate(skew.table(3).tree.poset, skew.table(3).pdf()) == q(1, 2), "70/30 law rate");
  out.summary = "uniform gap 0, 70/30 gap " + fmt(to_double(g1));
  return out;
}

// ---------------------------------------------------------------------------
// 6. Non-uniqueness

Outcome criterion_nonunique() {
  Outcome out;
  const auto item = catalog_build("nonunique", {{"k", "3"}, {"depth", "6"}});
  const auto& P = item.poset;
  if (!item.pdf || !item.alt_pdf) {
    out.expect(false, "catalog pair missing");
    return out;
  }
  const auto& f = *item.pdf;
  const auto& g = *item.alt_pdf;
  const Closure c(P);
  for (ElementId x = 0; x < P.size(); ++x) out.expect(f[x] > 0 && g[x] > 0, "non-positive entry");
  out.expect(f.probs() != g.probs(), "pdfs coincide");
  const auto Ff = oracle_upf(c, f);
  const auto Fg = oracle_upf(c, g);
  out.expect(Ff == Fg, "UPFs differ");
  out.expect(upf_from_pdf(P, f).values == Ff && upf_from_pdf(P, g).values == Fg, "library UPF differs from oracle");

  // P(X >= a and X >= b). Beyond the truncation every element lies above all
  // represented ones, so each pair sees the whole tail.
  for (ElementId x = 0; x < P.size(); ++x) {
    out.expect((*f.upper_tail())[x] == f.tail_mass() && (*g.upper_tail())[x] == g.tail_mass(), "tail not above all");
  }
  auto joint = [&](const Pdf<Rational>& h, ElementId a, ElementId b) -> Rational {
    Rational s = h.tail_mass();
    for (ElementId y = 0; y < P.size(); ++y) {
      if (c.leq[a][y] && c.leq[b][y]) s += h[y];
    }
    return s;
  };
  std::size_t differing = 0;
  for (ElementId a = 0; a < P.size(); ++a) {
    for (ElementId b = a + 1; b < P.size(); ++b) {
      const Rational jf = joint(f, a, b);
      const Rational jg = joint(g, a, b);
      const std::vector<ElementId> s = {a, b};
      out.expect(generalized_upf(P, f, std::span<const ElementId>(s)) == jf, "library generalized UPF");
      if (jf != jg) ++differing;
    }
  }
  out.expect(differing > 0, "generalized UPFs agree on every pair");
  out.summary = std::to_string(P.size()) + " elements, c = " + to_string(*item.nonunique_c) + ", " +
                std::to_string(differing) + " pairs separate the laws";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Finder soundness

// Canonical form of a poset on n <= 8 elements: the smallest strict-order
// bitmask over labelings that respect an iteratively refined invariant.
struct SmallPoset {
  unsigned n = 0;
  std::array<std::uint8_t, 8> up{};  // strict up-set bitmask per element

  std::uint64_t mask() const {
    std::uint64_t m = 0;
    for (unsigned i = 0; i < n; ++i) m |= static_cast<std::uint64_t>(up[i]) << (8 * i);
    return m;
  }
};

std::uint64_t canonical(const SmallPoset& p) {
  const unsigned n = p.n;
  std::vector<std::uint64_t> color(n);
  for (unsigned i = 0; i < n; ++i) {
    unsigned below = 0;
    for (unsigned j = 0; j < n; ++j) below += (p.up[j] >> i) & 1u;
    color[i] = (static_cast<std::uint64_t>(std::popcount(p.up[i])) << 8) | below;
  }
  for (unsigned round = 0; round < n; ++round) {
    std::vector<std::vector<std::uint64_t>> sig(n);
    for (unsigned i = 0; i < n; ++i) {
      std::vector<std::uint64_t> ups, downs;
      for (unsigned j = 0; j < n; ++j) {
        if ((p.up[i] >> j) & 1u) ups.push_back(color[j]);
        if ((p.up[j] >> i) & 1u) downs.push_back(color[j]);
      }
      std::sort(ups.begin(), ups.end());
      std::sort(downs.begin(), downs.end());
      sig[i] = {color[i], ups.size()};
      sig[i].insert(sig[i].end(), ups.begin(), ups.end());
      sig[i].push_back(0xffffffff);
      sig[i].insert(sig[i].end(), downs.begin(), downs.end());
    }
    auto sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::uint64_t> next(n);
    for (unsigned i = 0; i < n; ++i) {
      next[i] = static_cast<std::uint64_t>(std::lower_bound(sorted.begin(), sorted.end(), sig[i]) - sorted.begin());
    }
    const bool stable = std::set<std::uint64_t>(next.begin(), next.end()).size() ==
                        std::set<std::uint64_t>(color.begin(), color.end()).size();
    color = next;
    if (stable) break;
  }
  // Order elements by color; permute within color classes.
  std::vector<unsigned> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](unsigned a, unsigned b) { return color[a] < color[b]; });
  std::vector<std::pair<unsigned, unsigned>> classes;  // [begin, end) in `order`
  for (unsigned i = 0; i < n;) {
    unsigned j = i;
    while (j < n && color[order[j]] == color[order[i]]) ++j;
    classes.push_back({i, j});
    i = j;
  }
  std::uint64_t best = ~std::uint64_t{0};
  std::function<void(std::size_t)> search = [&](std::size_t k) {
    if (k == classes.size()) {
      std::uint64_t m = 0;
      for (unsigned i = 0; i < n; ++i) {
        std::uint64_t row = 0;
        for (unsigned j = 0; j < n; ++j) {
          if ((p.up[order[i]] >> order[j]) & 1u) row |= 1u << j;
        }
        m |= row << (8 * i);
      }
      best = std::min(best, m);
      return;
    }
    auto [b, e] = classes[k];
    std::sort(order.begin() + b, order.begin() + e);
    do {
      search(k + 1);
    } while (std::next_permutation(order.begin() + b, order.begin() + e));
  };
  search(0);
  return best;
}

// All unlabeled posets with 1..max_n elements: every poset arises from one
// with one element fewer by adding a maximal element above an order ideal.
std::vector<std::vector<SmallPoset>> enumerate_posets(unsigned max_n) {
  std::vector<std::vector<SmallPoset>> by_size(max_n + 1);
  SmallPoset one;
  one.n = 1;
  by_size[1].push_back(one);
  for (unsigned n = 2; n <= max_n; ++n) {
    std::set<std::uint64_t> seen;
    for (const auto& base : by_size[n - 1]) {
      const unsigned m = n - 1;
      for (unsigned ideal = 0; ideal < (1u << m); ++ideal) {
        bool closed = true;
        for (unsigned i = 0; i < m && closed; ++i) {
          // i in ideal and j < i forces j in ideal
          if (!((ideal >> i) & 1u)) continue;
          for (unsigned j = 0; j < m; ++j) {
            if (((base.up[j] >> i) & 1u) && !((ideal >> j) & 1u)) {
              closed = false;
              break;
            }
          }
        }
        if (!closed) continue;
        SmallPoset next = base;
        next.n = n;
        for (unsigned i = 0; i < m; ++i) {
          if ((ideal >> i) & 1u) next.up[i] |= static_cast<std::uint8_t>(1u << m);
        }
        const auto key = canonical(next);
        if (seen.insert(key).second) by_size[n].push_back(next);
      }
    }
  }
  return by_size;
}

Poset to_poset(const SmallPoset& s) {
  std::vector<CoverPair> rel;
  for (ElementId i = 0; i < s.n; ++i) {
    for (ElementId j = 0; j < s.n; ++j) {
      if ((s.up[i] >> j) & 1u) rel.push_back({i, j});
    }
  }
  const auto covers = transitive_reduce(s.n, rel);
  return Poset::build(s.n, covers);
}

// Alphas in `grid` admitting f(x) = k_x / N, k_x >= 1, with f = alpha F exactly.
std::set<std::size_t> grid_brute_force(const SmallPoset& s, std::span<const Rational> grid, unsigned N) {
  std::set<std::size_t> hits;
  const unsigned n = s.n;
  std::vector<unsigned> k(n, 1);
  std::function<void(unsigned, unsigned)> place = [&](unsigned i, unsigned left) {
    if (i + 1 == n) {
      k[i] = left;
      std::optional<Rational> alpha;
      for (unsigned x = 0; x < n; ++x) {
        long up = k[x];
        for (unsigned y = 0; y < n; ++y) {
          if ((s.up[x] >> y) & 1u) up += k[y];
        }
        const Rational r = q(static_cast<long>(k[x]), up);
        if (alpha && *alpha != r) return;
        alpha = r;
      }
      for (std::size_t g = 0; g < grid.size(); ++g) {
        if (grid[g] == *alpha) hits.insert(g);
      }
      return;
    }
    for (unsigned v = 1; v + (n - i - 1) <= left; ++v) {
      k[i] = v;
      place(i + 1, left - v);
    }
  };
  if (n <= N) place(0, N);
  return hits;
}

Outcome criterion_finder() {
  Outcome out;
  const auto grid = default_alpha_grid();
  const Rational eps(1, 1000000000);
  for (const auto& r : alpha_grid_search(make_chain(5), grid, eps, false, worker_count())) {
    out.expect(r.status == FeasibilityStatus::Infeasible, "5-chain feasible at alpha " + to_string(r.alpha));
  }
  for (const auto& r : alpha_grid_search(make_chain(5), grid, eps, true, worker_count())) {
    out.expect(r.status == FeasibilityStatus::Infeasible, "5-chain (exact) feasible at " + to_string(r.alpha));
  }
  for (const auto& r : alpha_grid_search(make_antichain(4), grid, eps, false, worker_count())) {
    out.expect((r.status == FeasibilityStatus::Feasible) == (r.alpha == 1), "antichain at alpha " + to_string(r.alpha));
  }

  // Binary tree truncated at depth 5, alpha = 1/2, against the closed-form law.
  const auto table = construct_constant_rate_upf(TreeRule::kary(2), q(1, 2), Splitter::uniform(), 5);
  const auto& T = table.tree.poset;
  const auto report = constant_rate_feasible_truncated(T, q(1, 2));
  out.expect(report.status == FeasibilityStatus::Feasible, "binary tree depth 5 not feasible");
  const auto pdf = table.pdf();
  std::vector<double> f, m;
  for (ElementId x = 0; x < T.size(); ++x) {
    f.push_back(std::pow(0.5, table.tree.depth[x] * 2.0 + 1.0));
    m.push_back(to_double((*pdf.upper_tail())[x]));
  }
  const auto problem = build_feasibility_problem(T, q(1, 2), eps);
  const double witness_residual = lp_residual(problem.lp, problem.point(f, m, to_double(pdf.tail_mass())));
  out.expect(witness_residual <= 1e-6, "closed-form witness residual " + fmt(witness_residual));
  out.expect(report.residual <= 1e-6, "solver witness residual " + fmt(report.residual));

  // Every poset with at most 8 elements: LP status against an exact grid search.
  const auto all = enumerate_posets(8);
  const std::vector<std::size_t> expected_counts = {0, 1, 2, 5, 16, 63, 318, 2045, 16999};
  std::vector<const SmallPoset*> flat;
  for (unsigned n = 1; n <= 8; ++n) {
    out.expect(all[n].size() == expected_counts[n],
               "found " + std::to_string(all[n].size()) + " posets on " + std::to_string(n) + " elements");
    for (const auto& s : all[n]) flat.push_back(&s);
  }
  const unsigned workers = worker_count();
  std::vector<std::future<std::vector<std::string>>> jobs;
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      std::vector<std::string> bad;
      for (std::size_t i = w; i < flat.size(); i += workers) {
        const auto& s = *flat[i];
        const auto P = to_poset(s);
        const auto brute = grid_brute_force(s, grid, 12);
        for (std::size_t g = 0; g < grid.size(); ++g) {
          const auto r = constant_rate_feasible_finite(P, grid[g], false, eps);
          const bool lp = r.status == FeasibilityStatus::Feasible;
          if (lp != (brute.count(g) > 0)) {
            bad.push_back("poset " + std::to_string(i) + " (n=" + std::to_string(s.n) + ") alpha " + to_string(grid[g]));
          }
        }
      }
      return bad;
    }));
  }
  std::size_t disagreements = 0;
  for (auto& j : jobs) {
    for (auto& b : j.get()) {
      ++disagreements;
      out.expect(false, "grid disagreement: " + b);
    }
  }
  out.summary = std::to_string(flat.size()) + " posets x " + std::to_string(grid.size()) + " alphas, " +
                std::to_string(disagreements) + " disagreements, witness residual " + fmt(witness_residual);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Poisson marginal

Outcome criterion_poisson() {
  Outcome out;
  double worst_pass = 0.0;
  for (const double alpha : {0.3, 0.5, 0.8}) {
    const auto pmf = poisson_pmf(-std::log(alpha), 40);
    const auto report = subsets_poisson_check(pmf, alpha);
    const double worst = std::max({report.max_lemma, report.max_pgf_shift, report.max_binomial_moment,
                                   report.max_alternating_moment});
    worst_pass = std::max(worst_pass, worst);
    out.expect(report.passed && worst < 1e-10, "Poisson alpha " + fmt(alpha) + " residual " + fmt(worst));
    // Oracle for the lemma: alpha P(U=k) = E[(-1)^(U+k) C(U,k)].
    for (unsigned k = 0; k <= 10; ++k) {
      long double rhs = 0.0L;
      for (unsigned u = k; u <= 40; ++u) {
        long double c = 1.0L;
        for (unsigned i = 1; i <= k; ++i) c = c * (u - k + i) / i;
        rhs += (((u + k) % 2) ? -1.0L : 1.0L) * c * pmf[u];
      }
      out.expect(std::fabs(static_cast<double>(alpha * pmf[k] - rhs)) < 1e-12, "oracle lemma at k=" + std::to_string(k));
    }
  }
  const auto geo = subsets_poisson_check(geometric_pmf(0.5, 40), 0.5);
  const double worst_geo = std::max({geo.max_lemma, geo.max_binomial_moment, geo.max_alternating_moment});
  out.expect(!geo.passed && worst_geo > 1e-3, "geometric marginal residual " + fmt(worst_geo));
  out.summary = "Poisson max residual " + fmt(worst_pass) + ", geometric " + fmt(worst_geo);
  return out;
}

// ---------------------------------------------------------------------------
// 9. Percolation

Outcome criterion_percolation() {
  Outcome out;
  const auto alpha = q(1, 2);
  const auto law = TreeLaw::constant_rate(TreeRule::kary(2), alpha);
  const auto table = law.table(4);
  std::string tvs;
  for (const auto& [p, pd] : {std::pair{q(1, 2), 0.5}, std::pair{q(9, 10), 0.9}}) {
    const std::string tag = "p=" + to_string(p);
    const auto perc = percolation_upf(table, p);
    const auto& P = perc.tree.poset;
    out.expect(perc.F.values[0] == 1, tag + ": F_p(e) != 1");
    for (ElementId x = 0; x < P.size(); ++x) {
      out.expect(perc.F.values[x] == pow(p, perc.tree.depth[x]) * table.F.values[x], tag + ": F_p != p^d F");
      Rational below = P.is_boundary(x) ? perc.boundary_child_mass[x] : q(0);
      for (auto ch : P.children(x)) below += perc.F.values[ch];
      out.expect(below < perc.F.values[x], tag + ": child sum not strictly below F_p");
    }
    const auto rep = validate_upf_tree(P, perc.F.values, perc.boundary_child_mass, 1 - p * (1 - alpha));
    out.expect(rep.passed, tag + ": library structural check");

    const auto counts = replicate_counts<NodePath>(
        kReplicates, SeedSpec{kSeed + 9}, worker_count(), perc.tree.paths.size() + 1,
        [&](Rng& rng) { return sample_percolated(law, pd, rng); },
        [&](const NodePath& v) { return tree_bin(perc.tree, v); });
    const double tv = tv_against(counts, perc.pdf().probs());
    out.expect(tv <= 0.01, tag + ": TV " + fmt(tv));
    tvs += (tvs.empty() ? "" : ", ") + tag + " TV " + fmt(tv);
  }
  out.summary = tvs;
  return out;
}

// ---------------------------------------------------------------------------
// 10. Moments

Outcome criterion_moments() {
  Outcome out;
  double widest = 0.0;
  double worst_oracle = 0.0;
  for (std::uint32_t k = 1; k <= 3; ++k) {
    for (const auto& alpha : {q(3, 10), q(1, 2), q(7, 10)}) {
      const std::string tag = "k=" + std::to_string(k) + " alpha=" + to_string(alpha);
      const unsigned depth = k == 1 ? 8 : 4;
      const auto t = construct_constant_rate_upf(TreeRule::kary(k), alpha, Splitter::uniform(), depth);
      const auto pdf = t.pdf();
      const auto report = moment_identities(t.tree.poset, pdf, 3, DepthTail{alpha, true}, 1e-9);
      out.expect(report.passed, tag + ": library moment rows");
      out.expect(report.max_tail_width <= 1e-9, tag + ": tail width " + fmt(report.max_tail_width));
      widest = std::max(widest, report.max_tail_width);

      // Oracle: exact sum over represented nodes plus the depth series beyond.
      const Closure c(t.tree.poset);
      const auto lam = oracle_lambda(c, 3);
      const double a = to_double(alpha);
      for (unsigned n = 1; n <= 3; ++n) {
        Rational inside(0);
        for (ElementId x = 0; x < t.tree.poset.size(); ++x) inside += pdf[x] * lam[n][x];
        long double beyond = 0.0L;
        for (unsigned d = depth + 1; d < depth + 4000; ++d) {
          long double c_nd = 1.0L;
          for (unsigned i = 1; i <= n; ++i) c_nd = c_nd * (d + i) / i;
          beyond += a * std::pow(1.0L - a, static_cast<long double>(d)) * c_nd;
        }
        const long double total = static_cast<long double>(to_double(inside)) + beyond;
        const double err = static_cast<double>(std::fabs(total - std::pow(static_cast<long double>(a), -1.0L * n)));
        worst_oracle = std::max(worst_oracle, err);
        out.expect(err <= 1e-9, tag + ": E[lambda_" + std::to_string(n) + "] oracle error " + fmt(err));
      }
    }
  }
  out.summary = "9 laws, n <= 3, tail width " + fmt(widest) + ", oracle error " + fmt(worst_oracle);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 exact identities", criterion_exact_identities},
      {"2 constant-rate tree construction", criterion_tree_construction},
      {"3 ladder exactness", criterion_ladder},
      {"4 thinning", criterion_thinning},
      {"5 exponential equivalence", criterion_equivalence},
      {"6 non-uniqueness", criterion_nonunique},
      {"7 finder soundness", criterion_finder},
      {"8 Poisson necessary conditions", criterion_poisson},
      {"9 percolation", criterion_percolation},
      {"10 moment identities", criterion_moments},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.failures.empty();
    failed += pass ? 0 : 1;
    std::printf("%s criterion %s: %s [%.2f s]\n", pass ? "PASS" : "FAIL", c.name, o.summary.c_str(), secs);
    for (std::size_t i = 0; i < o.failures.size() && i < 5; ++i) std::printf("    %s\n", o.failures[i].c_str());
    if (o.failures.size() > 5) std::printf("    ... %zu more\n", o.failures.size() - 5);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
