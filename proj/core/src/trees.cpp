#include "posrate/trees.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <mutex>
#include <shared_mutex>

#include "posrate/error.hpp"

namespace posrate {

std::string path_key(const NodePath& path) {
  if (path.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(path[i]);
  }
  return out;
}

NodePath parse_path(std::string_view key) {
  NodePath out;
  if (key == "e" || key.empty()) return out;
  while (!key.empty()) {
    const auto dot = key.find('.');
    const auto part = key.substr(0, dot);
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || part.empty()) {
      raise(ErrorKind::Parse, "bad node path '" + std::string(key) + "'");
    }
    out.push_back(v);
    if (dot == std::string_view::npos) break;
    key.remove_prefix(dot + 1);
    if (key.empty()) raise(ErrorKind::Parse, "node path ends with '.'");
  }
  return out;
}

// ---------------------------------------------------------------------------
// TreeRule

TreeRule::TreeRule(std::string name, CountFn count, std::optional<std::uint32_t> uniform_arity)
    : name_(std::move(name)), count_(std::move(count)), arity_(uniform_arity) {}

TreeRule TreeRule::kary(std::uint32_t k) {
  return TreeRule("kary:" + std::to_string(k), [k](const NodePath&) { return k; }, k);
}

TreeRule TreeRule::explicit_counts(std::map<std::string, std::uint32_t> counts) {
  for (const auto& [key, c] : counts) (void)parse_path(key);
  auto shared = std::make_shared<const std::map<std::string, std::uint32_t>>(std::move(counts));
  return TreeRule("explicit", [shared](const NodePath& node) {
    const auto it = shared->find(path_key(node));
    return it == shared->end() ? 0u : it->second;
  });
}

TreeRule TreeRule::registered(std::string_view name) {
  if (name == "binary") return TreeRule("binary", [](const NodePath&) { return 2u; }, 2u);
  if (name == "ternary") return TreeRule("ternary", [](const NodePath&) { return 3u; }, 3u);
  if (name == "alt12") {
    return TreeRule("alt12", [](const NodePath& node) { return node.size() % 2 == 0 ? 1u : 2u; });
  }
  if (name == "golden") {
    return TreeRule("golden", [](const NodePath& node) { return !node.empty() && node.back() == 1 ? 1u : 2u; });
  }
  raise(ErrorKind::InvalidArgument, "unknown tree rule '" + std::string(name) + "'");
}

std::vector<std::string> TreeRule::registered_names() { return {"alt12", "binary", "golden", "ternary"}; }

// ---------------------------------------------------------------------------
// Splitter

Splitter Splitter::uniform() {
  return Splitter("uniform", [](const NodePath&, std::uint32_t n) {
    return std::vector<Rational>(n, Rational(1, n));
  });
}

namespace {

std::string weights_name(std::string prefix, const std::vector<Rational>& weights) {
  if (weights.empty()) raise(ErrorKind::InvalidArgument, "splitter needs at least one weight");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0)) raise(ErrorKind::InvalidArgument, "splitter weights must be positive");
    if (i) prefix += ",";
    prefix += to_string(weights[i]);
  }
  return prefix;
}

std::vector<Rational> cycled(const std::vector<Rational>& weights, std::size_t shift, std::uint32_t n) {
  std::vector<Rational> out(n);
  Rational total(0);
  for (std::uint32_t i = 0; i < n; ++i) {
    out[i] = weights[(i + shift) % weights.size()];
    total += out[i];
  }
  for (auto& w : out) w /= total;
  return out;
}

}  // namespace

Splitter Splitter::weighted(std::vector<Rational> weights) {
  auto name = weights_name("weighted:", weights);
  return Splitter(std::move(name), [weights = std::move(weights)](const NodePath&, std::uint32_t n) {
    return cycled(weights, 0, n);
  });
}

Splitter Splitter::rotating(std::vector<Rational> weights) {
  auto name = weights_name("rotating:", weights);
  return Splitter(std::move(name), [weights = std::move(weights)](const NodePath& node, std::uint32_t n) {
    return cycled(weights, node.size(), n);
  });
}

Splitter Splitter::seeded(std::uint64_t seed) {
  return Splitter("seeded:" + std::to_string(seed), [seed](const NodePath& node, std::uint32_t n) {
    std::uint64_t h = splitmix64(seed);
    for (auto c : node) h = splitmix64(h ^ (c + 0x100000000ULL));
    std::vector<Rational> out(n);
    long total = 0;
    std::vector<long> w(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      w[i] = 1 + static_cast<long>(splitmix64(h + i) % 8);
      total += w[i];
    }
    for (std::uint32_t i = 0; i < n; ++i) out[i] = Rational(w[i], total);
    for (auto& r : out) r.canonicalize();
    return out;
  });
}

std::vector<Rational> Splitter::proportions(const NodePath& node, std::uint32_t n_children) const {
  if (n_children == 0) return {};
  auto props = fn_(node, n_children);
  if (props.size() != n_children) raise(ErrorKind::InvalidArgument, "splitter returned the wrong count");
  Rational total(0);
  for (const auto& p : props) {
    if (!(p > 0)) raise(ErrorKind::InvalidArgument, "splitter proportions must be positive");
    total += p;
  }
  if (total != 1) raise(ErrorKind::InvalidArgument, "splitter proportions must sum to 1");
  return props;
}

std::vector<Rational> Splitter::split(const NodePath& node, std::uint32_t n_children, const Rational& mass) const {
  auto props = proportions(node, n_children);
  for (auto& p : props) p *= mass;
  return props;
}

// ---------------------------------------------------------------------------
// Materialization

std::optional<ElementId> MaterializedTree::id(const NodePath& path) const {
  const auto it = index.find(path_key(path));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

std::vector<ElementId> MaterializedTree::level(unsigned d) const {
  std::vector<ElementId> out;
  for (ElementId x = 0; x < depth.size(); ++x) {
    if (depth[x] == d) out.push_back(x);
  }
  return out;
}

MaterializedTree materialize(const TreeRule& rule, unsigned depth) {
  MaterializedTree out;
  out.max_depth = depth;
  std::vector<CoverPair> covers;
  std::vector<ElementId> boundary;
  out.paths.push_back({});
  out.depth.push_back(0);
  for (ElementId x = 0; x < out.paths.size(); ++x) {
    const NodePath node = out.paths[x];
    const auto n = rule.children(node);
    if (out.depth[x] == depth) {
      if (n > 0) boundary.push_back(x);
      continue;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      NodePath child = node;
      child.push_back(i);
      const auto id = static_cast<ElementId>(out.paths.size());
      out.paths.push_back(std::move(child));
      out.depth.push_back(out.depth[x] + 1);
      covers.push_back({x, id});
    }
  }
  for (ElementId x = 0; x < out.paths.size(); ++x) out.index.emplace(path_key(out.paths[x]), x);
  out.poset = Poset::build(out.paths.size(), covers, boundary);
  return out;
}

Pdf<Rational> TreeTable::pdf() const {
  return pdf_from_upf_tree<Rational>(tree.poset, F, boundary_child_mass);
}

// ---------------------------------------------------------------------------
// Construction

namespace {

// F on the materialized tree from per-node rates; `check` validates each
// node's (rate, children count) before splitting.
template <typename Check>
TreeTable build_table(const TreeRule& rule, const TreeRateFn& rate, const Splitter& splitter, unsigned depth,
                      Check check) {
  TreeTable out;
  out.tree = materialize(rule, depth);
  const auto n = out.tree.paths.size();
  out.F.values.assign(n, Rational(0));
  out.boundary_child_mass.assign(n, Rational(0));
  out.F.values[0] = 1;
  for (ElementId x = 0; x < n; ++x) {
    const auto& node = out.tree.paths[x];
    const auto kids = rule.children(node);
    const Rational r = rate(node);
    check(node, r, kids);
    if (kids == 0) continue;
    const Rational child_mass = (Rational(1) - r) * out.F.values[x];
    if (out.tree.depth[x] == depth) {
      out.boundary_child_mass[x] = child_mass;
      continue;
    }
    const auto masses = splitter.split(node, kids, child_mass);
    for (std::uint32_t i = 0; i < kids; ++i) {
      NodePath child = node;
      child.push_back(i);
      out.F.values[*out.tree.id(child)] = masses[i];
    }
  }
  return out;
}

}  // namespace

TreeTable construct_upf_from_rate(const TreeRule& rule, const TreeRateFn& rate, const Splitter& splitter,
                                  unsigned depth, const std::optional<Rational>& rate_bound) {
  if (!rate_bound) raise(ErrorKind::RateBoundMissing, "a lower bound alpha > 0 on the rate must be declared");
  if (!(*rate_bound > 0 && *rate_bound <= 1)) raise(ErrorKind::InvalidArgument, "rate bound must lie in (0, 1]");
  return build_table(rule, rate, splitter, depth, [&](const NodePath& node, const Rational& r, std::uint32_t kids) {
    const auto key = path_key(node);
    if (!(r > 0 && r <= 1)) raise(ErrorKind::InvalidArgument, "rate at " + key + " outside (0, 1]");
    if (kids == 0 && r != 1) raise(ErrorKind::LeafRateNotOne, "leaf " + key + " has rate " + to_string(r));
    if (kids > 0 && r == 1) raise(ErrorKind::InvalidArgument, "rate 1 at non-leaf " + key);
    if (r < *rate_bound) {
      raise(ErrorKind::InvalidArgument, "rate at " + key + " is below the declared bound " + to_string(*rate_bound));
    }
  });
}

TreeTable construct_constant_rate_upf(const TreeRule& rule, const Rational& alpha, const Splitter& splitter,
                                      unsigned depth) {
  if (!(alpha > 0 && alpha <= 1)) raise(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  const bool root_only = rule.children({}) == 0;
  if (alpha == 1 && !root_only) raise(ErrorKind::InvalidArgument, "alpha = 1 requires the root-only tree");
  auto rate = [&](const NodePath&) { return alpha; };
  return build_table(rule, rate, splitter, depth, [&](const NodePath& node, const Rational&, std::uint32_t kids) {
    if (kids == 0 && !(root_only && alpha == 1)) {
      raise(ErrorKind::LeafEncountered, "leaf " + path_key(node) + " admits no constant rate below 1");
    }
  });
}

TreeTable percolation_upf(const TreeTable& table, const Rational& p) {
  if (!(p > 0 && p <= 1)) raise(ErrorKind::InvalidArgument, "p must lie in (0, 1]");
  const auto& tree = table.tree;
  const auto& F = table.F.values;
  for (ElementId x = 0; x < F.size(); ++x) {
    Rational below = table.boundary_child_mass[x];
    for (ElementId y : tree.poset.children(x)) below += F[y];
    if (F[x] < below) {
      raise(ErrorKind::WeakInequalityViolation, "F(x) < sum of children at " + path_key(tree.paths[x]));
    }
  }
  TreeTable out = table;
  for (ElementId x = 0; x < F.size(); ++x) {
    out.F.values[x] = F[x] * pow(p, tree.depth[x]);
    out.boundary_child_mass[x] = table.boundary_child_mass[x] * pow(p, tree.max_depth + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// TreeLaw

struct TreeLaw::Cache {
  std::shared_mutex mutex;
  std::unordered_map<std::string, StepData> steps;
};

TreeLaw::TreeLaw(TreeRule rule, TreeRateFn rate, Splitter splitter, std::optional<Rational> rate_bound,
                 std::optional<Rational> constant_rate)
    : rule_(std::move(rule)),
      rate_(std::move(rate)),
      splitter_(std::move(splitter)),
      bound_(std::move(rate_bound)),
      alpha_(std::move(constant_rate)),
      cache_(std::make_shared<Cache>()) {}

TreeLaw TreeLaw::constant_rate(TreeRule rule, const Rational& alpha, Splitter splitter) {
  if (!(alpha > 0 && alpha <= 1)) raise(ErrorKind::InvalidArgument, "alpha must lie in (0, 1]");
  return TreeLaw(std::move(rule), [alpha](const NodePath&) { return alpha; }, std::move(splitter), alpha, alpha);
}

Rational TreeLaw::upf(const NodePath& node) const {
  Rational F(1);
  NodePath prefix;
  prefix.reserve(node.size());
  for (auto c : node) {
    const auto kids = rule_.children(prefix);
    if (c >= kids) raise(ErrorKind::InvalidArgument, "path " + path_key(node) + " leaves the tree");
    const auto masses = splitter_.split(prefix, kids, (Rational(1) - rate_(prefix)) * F);
    F = masses[c];
    prefix.push_back(c);
  }
  return F;
}

TreeTable TreeLaw::table(unsigned depth) const {
  if (alpha_) return construct_constant_rate_upf(rule_, *alpha_, splitter_, depth);
  return construct_upf_from_rate(rule_, rate_, splitter_, depth, bound_);
}

const TreeLaw::StepData& TreeLaw::step(const NodePath& node) const {
  const auto key = path_key(node);
  {
    std::shared_lock lock(cache_->mutex);
    const auto it = cache_->steps.find(key);
    if (it != cache_->steps.end()) return it->second;
  }
  StepData data;
  const auto kids = rule_.children(node);
  const Rational r = rate_(node);
  if (!(r > 0 && r <= 1)) raise(ErrorKind::InvalidArgument, "rate at " + key + " outside (0, 1]");
  if (kids == 0 && r != 1) raise(ErrorKind::LeafEncountered, "leaf " + key + " has rate " + to_string(r));
  data.stop = to_double(r);
  Rational acc(0);
  for (const auto& p : splitter_.proportions(node, kids)) {
    acc += p;
    data.cumulative.push_back(to_double(acc));
  }
  std::unique_lock lock(cache_->mutex);
  return cache_->steps.emplace(key, std::move(data)).first->second;
}

NodePath TreeLaw::sample(Rng& rng) const { return sample_above({}, rng); }

NodePath TreeLaw::sample_above(const NodePath& y, Rng& rng) const {
  constexpr std::size_t kMaxSteps = 10'000'000;
  NodePath node = y;
  for (std::size_t s = 0; s < kMaxSteps; ++s) {
    const auto& data = step(node);
    if (rng.uniform() < data.stop || data.cumulative.empty()) return node;
    const double v = rng.uniform();
    const auto it = std::upper_bound(data.cumulative.begin(), data.cumulative.end(), v);
    const auto child = it == data.cumulative.end() ? data.cumulative.size() - 1 : it - data.cumulative.begin();
    node.push_back(static_cast<std::uint32_t>(child));
  }
  raise(ErrorKind::InvalidArgument, "descent walk did not stop; rate too small");
}

TreeLaw percolate(const TreeLaw& law, const Rational& p) {
  if (!(p > 0 && p <= 1)) raise(ErrorKind::InvalidArgument, "p must lie in (0, 1]");
  auto base = law;
  auto rate = [base, p](const NodePath& node) -> Rational { return Rational(1) - p * (Rational(1) - base.rate(node)); };
  std::optional<Rational> bound;
  if (law.rate_bound()) bound = Rational(1) - p * (Rational(1) - *law.rate_bound());
  std::optional<Rational> alpha;
  if (law.constant_rate()) alpha = Rational(1) - p * (Rational(1) - *law.constant_rate());
  return TreeLaw(law.rule(), std::move(rate), law.splitter(), bound, alpha);
}

NodePath sample_percolated(const TreeLaw& law, double p, Rng& rng) {
  NodePath x = law.sample(rng);
  std::size_t keep = 0;
  while (keep < x.size() && rng.uniform() < p) ++keep;
  x.resize(keep);
  return x;
}

// ---------------------------------------------------------------------------
// Validation

UpfTreeReport validate_upf_tree(const Poset& tree, const std::vector<Rational>& F,
                                const std::optional<std::vector<Rational>>& boundary_child_mass,
                                const std::optional<Rational>& rate_bound) {
  const auto depth = tree_depths(tree);
  if (F.size() != tree.size()) raise(ErrorKind::InvalidArgument, "UPF does not match tree");
  UpfTreeReport report;
  report.rate_bound = rate_bound;
  const ElementId root = static_cast<ElementId>(std::find(depth.begin(), depth.end(), 0u) - depth.begin());
  report.root_is_one = F[root] == 1;
  if (!report.root_is_one) report.issues.push_back("RootNotOne");

  unsigned max_depth = 0;
  for (auto d : depth) max_depth = std::max(max_depth, d);
  report.level_sums.assign(max_depth + 1, Rational(0));
  for (ElementId x = 0; x < tree.size(); ++x) {
    report.level_sums[depth[x]] += F[x];
    if (tree.is_boundary(x) && !boundary_child_mass) continue;
    Rational below(0);
    for (ElementId y : tree.children(x)) below += F[y];
    if (boundary_child_mass && tree.is_boundary(x)) below += (*boundary_child_mass)[x];
    if (!(F[x] > below)) report.child_sum_violations.push_back(x);
  }
  if (!report.child_sum_violations.empty()) report.issues.push_back("ChildSumViolation");

  if (rate_bound) {
    report.decay_established = true;
    Rational bound(1);
    for (const auto& s : report.level_sums) {
      if (s > bound) report.decay_established = false;
      bound *= Rational(1) - *rate_bound;
    }
  }
  if (!report.decay_established) report.issues.push_back("DecayNotEstablished");
  report.passed = report.root_is_one && report.child_sum_violations.empty() &&
                  (!rate_bound || report.decay_established);
  return report;
}

DepthLaw depth_distribution(const Poset& tree, const Pdf<Rational>& pdf) {
  const auto depth = tree_depths(tree);
  const auto F = upf_from_pdf(tree, pdf).values;
  unsigned max_depth = 0;
  for (auto d : depth) max_depth = std::max(max_depth, d);
  DepthLaw out;
  out.at_least.assign(max_depth + 1, Rational(0));
  out.exactly.assign(max_depth + 1, Rational(0));
  for (ElementId x = 0; x < tree.size(); ++x) {
    out.at_least[depth[x]] += F[x];
    out.exactly[depth[x]] += pdf[x];
  }
  return out;
}

}  // namespace posrate
