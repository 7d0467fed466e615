#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "posrate/distribution.hpp"
#include "posrate/poset.hpp"
#include "posrate/rational.hpp"
#include "posrate/rng.hpp"

namespace posrate {

/// Root-to-node sequence of child indices. The empty path is the root e.
using NodePath = std::vector<std::uint32_t>;

/// "e" for the root, otherwise dot-separated child indices ("0.1.1").
std::string path_key(const NodePath& path);
NodePath parse_path(std::string_view key);

/// Deterministic children count per node; generates a locally finite rooted
/// tree lazily.
class TreeRule {
 public:
  using CountFn = std::function<std::uint32_t(const NodePath&)>;

  TreeRule(std::string name, CountFn count, std::optional<std::uint32_t> uniform_arity = std::nullopt);

  static TreeRule kary(std::uint32_t k);
  /// Nodes absent from the map are leaves.
  static TreeRule explicit_counts(std::map<std::string, std::uint32_t> counts);
  /// "binary", "ternary", "alt12" (1 child at even depth, 2 at odd) and
  /// "golden" (a node reached through child 1 has one child, else two).
  static TreeRule registered(std::string_view name);
  static std::vector<std::string> registered_names();

  std::uint32_t children(const NodePath& node) const { return count_(node); }
  /// k when every node has exactly k children; such trees are free semigroups.
  std::optional<std::uint32_t> uniform_arity() const noexcept { return arity_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  CountFn count_;
  std::optional<std::uint32_t> arity_;
};

/// Distributes a parent's child mass among its children. Masses are built as
/// mass * proportion so they are positive and sum exactly to the input.
class Splitter {
 public:
  static Splitter uniform();
  /// Child i gets weight weights[i mod size], normalized over the children.
  static Splitter weighted(std::vector<Rational> weights);
  /// Child i at depth d gets weights[(i + d) mod size]. Unlike `weighted`,
  /// the split varies along a path, so F is not multiplicative.
  static Splitter rotating(std::vector<Rational> weights);
  /// Pseudo-random integer weights in 1..8 derived from (seed, node).
  static Splitter seeded(std::uint64_t seed);

  std::vector<Rational> split(const NodePath& node, std::uint32_t n_children, const Rational& mass) const;
  std::vector<Rational> proportions(const NodePath& node, std::uint32_t n_children) const;
  const std::string& name() const noexcept { return name_; }

 private:
  using Fn = std::function<std::vector<Rational>(const NodePath&, std::uint32_t)>;
  Splitter(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  std::string name_;
  Fn fn_;
};

/// Breadth-first materialization of a tree rule to a fixed depth. Nodes at
/// the last level that have children form the truncation boundary.
struct MaterializedTree {
  Poset poset;
  std::vector<NodePath> paths;
  std::vector<unsigned> depth;
  std::unordered_map<std::string, ElementId> index;
  unsigned max_depth = 0;

  std::optional<ElementId> id(const NodePath& path) const;
  std::vector<ElementId> level(unsigned d) const;
};

MaterializedTree materialize(const TreeRule& rule, unsigned depth);

/// UPF values on a materialized tree plus, at boundary nodes, the UPF mass of
/// the unrepresented children.
struct TreeTable {
  MaterializedTree tree;
  Upf<Rational> F;
  std::vector<Rational> boundary_child_mass;

  Pdf<Rational> pdf() const;
};

using TreeRateFn = std::function<Rational(const NodePath&)>;

/// A tree law defined by its rate function and a splitter, evaluated lazily:
/// F(e) = 1 and the children of x share (1 - r(x)) F(x).
class TreeLaw {
 public:
  TreeLaw(TreeRule rule, TreeRateFn rate, Splitter splitter, std::optional<Rational> rate_bound = std::nullopt,
          std::optional<Rational> constant_rate = std::nullopt);

  static TreeLaw constant_rate(TreeRule rule, const Rational& alpha, Splitter splitter = Splitter::uniform());

  const TreeRule& rule() const noexcept { return rule_; }
  const Splitter& splitter() const noexcept { return splitter_; }
  const std::optional<Rational>& rate_bound() const noexcept { return bound_; }
  /// The declared constant rate, if the law was built as constant-rate.
  const std::optional<Rational>& constant_rate() const noexcept { return alpha_; }

  Rational rate(const NodePath& node) const { return rate_(node); }
  Rational upf(const NodePath& node) const;
  Rational pdf(const NodePath& node) const { return rate(node) * upf(node); }

  /// Validated table to `depth`; see construct_upf_from_rate.
  TreeTable table(unsigned depth) const;

  /// Draw from the law by the descent walk from the root.
  NodePath sample(Rng& rng) const;
  /// Draw z from f(z)/F(y) on I[y] by the descent walk from y.
  NodePath sample_above(const NodePath& y, Rng& rng) const;

 private:
  struct StepData {
    double stop = 1.0;
    std::vector<double> cumulative;  // child choice CDF given no stop
  };
  const StepData& step(const NodePath& node) const;

  struct Cache;
  TreeRule rule_;
  TreeRateFn rate_;
  Splitter splitter_;
  std::optional<Rational> bound_;
  std::optional<Rational> alpha_;
  std::shared_ptr<Cache> cache_;
};

/// Builds the UPF with child sums [1 - r(x)] F(x). Requires r in (0, 1],
/// r = 1 exactly at leaves and a declared lower bound on r.
/// Throws RateBoundMissing, LeafRateNotOne, InvalidArgument.
TreeTable construct_upf_from_rate(const TreeRule& rule, const TreeRateFn& rate, const Splitter& splitter,
                                  unsigned depth, const std::optional<Rational>& rate_bound);

/// Child sums (1 - alpha) F(x). Throws LeafEncountered when a leaf appears
/// within `depth` (alpha = 1 is accepted on the root-only tree).
TreeTable construct_constant_rate_upf(const TreeRule& rule, const Rational& alpha, const Splitter& splitter,
                                      unsigned depth);

/// F_p(x) = p^d(x) F(x). Requires F(x) >= sum of children (boundary child
/// mass included). Throws WeakInequalityViolation.
TreeTable percolation_upf(const TreeTable& table, const Rational& p);

/// The law of the maximal working prefix when every edge works with
/// probability p: rate 1 - p(1 - r), same split proportions.
TreeLaw percolate(const TreeLaw& law, const Rational& p);

/// X from the law, then cut at the first failed edge along its path.
NodePath sample_percolated(const TreeLaw& law, double p, Rng& rng);

struct UpfTreeReport {
  bool root_is_one = false;
  std::vector<ElementId> child_sum_violations;
  std::vector<Rational> level_sums;  // s_n = sum of F over depth n
  std::optional<Rational> rate_bound;
  bool decay_established = false;
  std::vector<std::string> issues;  // RootNotOne, ChildSumViolation, DecayNotEstablished
  bool passed = false;
};

/// Checks F(e) = 1, the strict child-sum inequality and, given a rate bound
/// alpha, s_n <= (1 - alpha)^n. Boundary nodes are checked only when their
/// child mass is supplied.
UpfTreeReport validate_upf_tree(const Poset& tree, const std::vector<Rational>& F,
                                const std::optional<std::vector<Rational>>& boundary_child_mass = std::nullopt,
                                const std::optional<Rational>& rate_bound = std::nullopt);

struct DepthLaw {
  std::vector<Rational> at_least;  // P(d(X) >= n), n = 0..D
  std::vector<Rational> exactly;   // P(d(X) = n), n = 0..D
};

DepthLaw depth_distribution(const Poset& tree, const Pdf<Rational>& pdf);

}  // namespace posrate
