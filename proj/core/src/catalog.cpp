#include "posrate/catalog.hpp"

#include <cmath>
#include <functional>
#include <set>

#include "posrate/error.hpp"
#include "posrate/finder.hpp"
#include "posrate/trees.hpp"

namespace posrate {

namespace {

class ParamReader {
 public:
  ParamReader(std::string_view entry, const CatalogParams& defaults, const CatalogParams& given)
      : entry_(entry), resolved_(defaults) {
    for (const auto& [key, value] : given) {
      if (!defaults.contains(key)) {
        raise(ErrorKind::InvalidParams, "unknown parameter '" + key + "' for " + std::string(entry));
      }
      resolved_[key] = value;
    }
  }

  unsigned uint(const std::string& key, unsigned lo, unsigned hi) const {
    const auto& text = resolved_.at(key);
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || text.empty() || text.front() == '-' || v < lo || v > hi) {
      raise(ErrorKind::InvalidParams, entry_ + ": " + key + " must be an integer in [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "], got '" + text + "'");
    }
    return static_cast<unsigned>(v);
  }

  Rational rational(const std::string& key) const {
    try {
      return parse_rational(resolved_.at(key));
    } catch (const Error&) {
      raise(ErrorKind::InvalidParams, entry_ + ": " + key + " is not a rational: '" + resolved_.at(key) + "'");
    }
  }

  bool flag(const std::string& key) const { return uint(key, 0, 1) == 1; }
  const std::string& text(const std::string& key) const { return resolved_.at(key); }
  const CatalogParams& resolved() const { return resolved_; }

 private:
  std::string entry_;
  CatalogParams resolved_;
};

void require_open_unit(const Rational& v, const std::string& what, bool allow_one) {
  if (!(v > 0 && (v < 1 || (allow_one && v == 1)))) {
    raise(ErrorKind::InvalidParams, what + " must lie in (0, 1" + (allow_one ? "]" : ")"));
  }
}

std::string set_label(const std::vector<unsigned>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "}";
}

std::vector<std::string> id_labels(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

Pdf<Rational> uniform_pdf(const Poset& poset) {
  const Rational each(1, static_cast<long>(poset.size()));
  return Pdf<Rational>::make(poset, std::vector<Rational>(poset.size(), each));
}

// Nonunique pair poset: level 0 is {e}, levels 1..depth are k-antichains,
// every element of a level below every element of the next.
struct LevelSum {
  Poset poset;
  std::vector<unsigned> level;
};

LevelSum level_sum(unsigned k, unsigned depth) {
  const std::size_t n = 1 + static_cast<std::size_t>(k) * depth;
  auto id = [k](unsigned lvl, unsigned j) { return static_cast<ElementId>(lvl == 0 ? 0 : 1 + (lvl - 1) * k + j); };
  auto width = [k](unsigned lvl) { return lvl == 0 ? 1u : k; };
  std::vector<CoverPair> covers;
  for (unsigned lvl = 0; lvl < depth; ++lvl) {
    for (unsigned a = 0; a < width(lvl); ++a) {
      for (unsigned b = 0; b < k; ++b) covers.push_back({id(lvl, a), id(lvl + 1, b)});
    }
  }
  std::vector<ElementId> boundary;
  for (unsigned j = 0; j < width(depth); ++j) boundary.push_back(id(depth, j));
  LevelSum out{Poset::build(n, covers, boundary), {}};
  for (unsigned lvl = 0; lvl <= depth; ++lvl) {
    for (unsigned j = 0; j < width(lvl); ++j) out.level.push_back(lvl);
  }
  return out;
}

struct NonuniquePair {
  std::vector<Rational> f;
  std::vector<Rational> g;
  Rational tail_f;
  Rational tail_g;
};

// f: level n carries (1/2)^(n+1), split evenly; g = f + q^n c with
// q = -1/(k-1). The tail of g absorbs sum_{m > depth} k q^m c = -c q^depth.
NonuniquePair nonunique_pair(unsigned k, unsigned depth, const Rational& c) {
  const auto ls = level_sum(k, depth);
  const Rational q(-1, static_cast<long>(k - 1));
  NonuniquePair out;
  for (unsigned lvl : ls.level) {
    Rational f = pow(Rational(1, 2), lvl + 1);
    if (lvl > 0) f /= k;
    out.f.push_back(f);
    out.g.push_back(f + pow(q, lvl) * c);
  }
  out.tail_f = pow(Rational(1, 2), depth + 1);
  out.tail_g = out.tail_f - c * pow(q, depth);
  return out;
}

bool pair_positive(const NonuniquePair& pair) {
  if (!(pair.tail_g > 0)) return false;
  for (const auto& v : pair.g) {
    if (!(v > 0)) return false;
  }
  return true;
}

using Builder = std::function<CatalogItem(const ParamReader&)>;

struct Entry {
  CatalogEntryInfo info;
  Builder build;
};

CatalogItem chain_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned n = r.uint("n", 1, 100000);
  it.poset = make_chain(n);
  it.labels = id_labels(n);
  it.expected = {n == 1, true, true};
  it.pdf = uniform_pdf(it.poset);
  return it;
}

CatalogItem geometric_chain_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned n = r.uint("n", 1, 100000);
  const Rational alpha = r.rational("alpha");
  require_open_unit(alpha, "alpha", false);
  it.poset = make_chain(n, true);
  it.labels = id_labels(n);
  it.expected = {n == 1, true, true};
  std::vector<Rational> f;
  Rational survive(1);
  for (unsigned i = 0; i < n; ++i) {
    f.push_back(alpha * survive);
    survive *= 1 - alpha;
  }
  it.pdf = Pdf<Rational>::make(it.poset, f, survive, std::vector<Rational>(n, survive));
  it.alpha = alpha;
  return it;
}

CatalogItem antichain_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned n = r.uint("n", 1, 100000);
  it.poset = make_antichain(n);
  it.labels = id_labels(n);
  it.expected = {true, n == 1, n == 1};
  it.pdf = uniform_pdf(it.poset);
  it.alpha = Rational(1);
  return it;
}

CatalogItem kary_tree_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned k = r.uint("k", 1, 64);
  const unsigned depth = r.uint("depth", 0, 64);
  const Rational alpha = r.rational("alpha");
  require_open_unit(alpha, "alpha", false);
  double nodes = 0.0;
  for (unsigned d = 0; d <= depth; ++d) nodes += std::pow(static_cast<double>(k), d);
  if (nodes > 1 << 20) raise(ErrorKind::InvalidParams, "kary_tree larger than 2^20 nodes");
  const auto table = construct_constant_rate_upf(TreeRule::kary(k), alpha, Splitter::uniform(), depth);
  it.poset = table.tree.poset;
  for (const auto& p : table.tree.paths) it.labels.push_back(path_key(p));
  it.expected = {it.poset.size() == 1, true, true};
  it.pdf = table.pdf();
  it.alpha = alpha;
  return it;
}

CatalogItem nonunique_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned k = r.uint("k", 2, 64);
  const unsigned depth = r.uint("depth", 1, 64);
  Rational c;
  if (r.text("c") == "auto") {
    const auto found = nonunique_c_search(k, depth);
    if (!found) raise(ErrorKind::InvalidParams, "no positive c in the 1/120 grid for k=" + std::to_string(k));
    c = *found;
  } else {
    c = r.rational("c");
    if (c == 0) raise(ErrorKind::InvalidParams, "c must be nonzero");
  }
  const auto ls = level_sum(k, depth);
  const auto pair = nonunique_pair(k, depth, c);
  if (!pair_positive(pair)) raise(ErrorKind::InvalidParams, "c = " + to_string(c) + " makes g non-positive");
  it.poset = ls.poset;
  for (std::size_t i = 0; i < ls.level.size(); ++i) {
    it.labels.push_back(ls.level[i] == 0 ? "0:e" : std::to_string(ls.level[i]) + ":" + std::to_string((i - 1) % k));
  }
  it.expected = {false, true, false};
  const std::size_t n = it.poset.size();
  it.pdf = Pdf<Rational>::make(it.poset, pair.f, pair.tail_f, std::vector<Rational>(n, pair.tail_f));
  it.alt_pdf = Pdf<Rational>::make(it.poset, pair.g, pair.tail_g, std::vector<Rational>(n, pair.tail_g));
  it.nonunique_c = c;
  return it;
}

CatalogItem parallel_chains_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned n = r.uint("n", 1, 100000);
  const auto mix = mixture_counterexample(r.rational("p"), r.rational("alpha"), r.rational("beta"), n - 1);
  it.poset = mix.poset;
  for (std::size_t i = 0; i < it.poset.size(); ++i) {
    it.labels.push_back(std::to_string(i / n) + ":" + std::to_string(i % n));
  }
  const bool single = it.poset.size() == n;
  it.expected = {single && n == 1, single, single};
  it.pdf = mix.pdf;
  if (r.rational("alpha") == r.rational("beta") || single) it.alpha = r.rational("alpha");
  return it;
}

CatalogItem subsets_entry(const ParamReader& r, bool boolean) {
  CatalogItem it;
  const unsigned M = r.uint("M", 0, 16);
  const unsigned cap = boolean ? M : std::min(r.uint("m_cap", 0, 16), M);
  const bool truncated = boolean ? false : r.flag("truncated");
  auto sp = subsets_poset(M, cap, truncated);
  it.poset = sp.poset;
  for (const auto& s : sp.sets) it.labels.push_back(set_label(s));
  const bool single = it.poset.size() == 1;
  it.expected = {single, true, M <= 1 || cap <= 1};
  if (boolean) it.pdf = uniform_pdf(it.poset);
  return it;
}

CatalogItem product_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned a = r.uint("n1", 1, 1000);
  const unsigned b = r.uint("n2", 1, 1000);
  it.poset = product_poset(make_chain(a), make_chain(b));
  for (unsigned i = 0; i < a; ++i) {
    for (unsigned j = 0; j < b; ++j) it.labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  it.expected = {a * b == 1, true, a == 1 || b == 1};
  it.pdf = uniform_pdf(it.poset);
  return it;
}

CatalogItem lex_product_entry(const ParamReader& r) {
  CatalogItem it;
  const unsigned n = r.uint("n", 1, 1000);
  const unsigned k = r.uint("k", 1, 1000);
  it.poset = lexicographic_product(make_chain(n), make_antichain(k));
  for (unsigned i = 0; i < n; ++i) {
    for (unsigned j = 0; j < k; ++j) it.labels.push_back("(" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  it.expected = {n == 1, n > 1 || k == 1, k == 1};
  it.pdf = uniform_pdf(it.poset);
  return it;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {{"chain", 1, "finite chain 0 < 1 < ... < n-1 with the uniform law", {{"n", "6"}}}, chain_entry},
      {{"geometric_chain", 1, "truncated chain with the geometric law of rate alpha",
        {{"n", "8"}, {"alpha", "1/2"}}},
       geometric_chain_entry},
      {{"antichain", 1, "n incomparable elements with the uniform law (rate 1)", {{"n", "5"}}}, antichain_entry},
      {{"kary_tree", 1, "k-ary tree to a depth, constant rate alpha with uniform split",
        {{"k", "2"}, {"depth", "5"}, {"alpha", "1/2"}}},
       kary_tree_entry},
      {{"nonunique", 1, "lexicographic sum of k-antichains with two laws sharing one UPF",
        {{"k", "3"}, {"depth", "6"}, {"c", "auto"}}},
       nonunique_entry},
      {{"parallel_chains", 1, "two parallel chains carrying a mixture of geometric laws",
        {{"n", "6"}, {"p", "1/2"}, {"alpha", "3/10"}, {"beta", "3/5"}}},
       parallel_chains_entry},
      {{"subsets", 1, "subsets of {1..M} of size <= m_cap under inclusion",
        {{"M", "4"}, {"m_cap", "3"}, {"truncated", "0"}}},
       [](const ParamReader& r) { return subsets_entry(r, false); }},
      {{"boolean", 1, "Boolean lattice of subsets of {1..M} with the uniform law", {{"M", "3"}}},
       [](const ParamReader& r) { return subsets_entry(r, true); }},
      {{"product", 1, "product order of two chains", {{"n1", "3"}, {"n2", "4"}}}, product_entry},
      {{"lex_product", 1, "lexicographic product of a chain and an antichain", {{"n", "3"}, {"k", "2"}}},
       lex_product_entry},
  };
  return entries;
}

}  // namespace

std::vector<CatalogEntryInfo> catalog_list() {
  std::vector<CatalogEntryInfo> out;
  for (const auto& e : registry()) out.push_back(e.info);
  return out;
}

CatalogItem catalog_build(std::string_view name, const CatalogParams& params) {
  for (const auto& e : registry()) {
    if (e.info.name != name) continue;
    const ParamReader reader(name, e.info.defaults, params);
    auto item = e.build(reader);
    item.name = e.info.name;
    item.version = e.info.version;
    item.params = reader.resolved();
    return item;
  }
  raise(ErrorKind::InvalidParams, "unknown catalog entry '" + std::string(name) + "'");
}

CatalogItem catalog_build_ref(std::string_view ref) {
  const auto colon = ref.find(':');
  const std::string_view name = ref.substr(0, colon);
  CatalogParams params;
  if (colon != std::string_view::npos) {
    std::string_view rest = ref.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view kv = rest.substr(0, comma);
      const auto eq = kv.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        raise(ErrorKind::InvalidParams, "expected key=value in '" + std::string(kv) + "'");
      }
      params[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  }
  return catalog_build(name, params);
}

std::vector<CatalogItem> catalog_defaults() {
  std::vector<CatalogItem> out;
  for (const auto& e : registry()) out.push_back(catalog_build(e.info.name));
  return out;
}

MixtureCounterexample mixture_counterexample(const Rational& p, const Rational& alpha, const Rational& beta,
                                             unsigned depth) {
  require_open_unit(p, "p", true);
  require_open_unit(alpha, "alpha", false);
  require_open_unit(beta, "beta", false);
  const unsigned len = depth + 1;
  auto geometric = [len](const Rational& weight, const Rational& a, std::vector<Rational>& f) {
    Rational survive = weight;
    for (unsigned i = 0; i < len; ++i) {
      f.push_back(a * survive);
      survive *= 1 - a;
    }
    return survive;
  };
  std::vector<Rational> f;
  const Rational tail1 = geometric(p, alpha, f);
  if (p == 1) {
    auto chain = make_chain(len, true);
    auto pdf = Pdf<Rational>::make(chain, f, tail1, std::vector<Rational>(len, tail1));
    return {std::move(chain), std::move(pdf)};
  }
  const Rational tail2 = geometric(1 - p, beta, f);
  auto poset = disjoint_union(make_chain(len, true), make_chain(len, true));
  std::vector<Rational> upper(2 * len, tail1);
  for (unsigned i = len; i < 2 * len; ++i) upper[i] = tail2;
  auto pdf = Pdf<Rational>::make(poset, f, tail1 + tail2, std::move(upper));
  return {std::move(poset), std::move(pdf)};
}

std::optional<Rational> nonunique_c_search(unsigned k, unsigned depth) {
  if (k < 2) raise(ErrorKind::InvalidParams, "nonunique needs k >= 2");
  for (long j = 120; j >= 1; --j) {
    Rational c(j, 120);
    c.canonicalize();
    if (pair_positive(nonunique_pair(k, depth, c))) return c;
  }
  return std::nullopt;
}

}  // namespace posrate
