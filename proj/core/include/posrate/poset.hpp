#pragma once

#include <boost/dynamic_bitset.hpp>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace posrate {

/// Dense handle 0..N-1 of a represented poset element.
using ElementId = std::uint32_t;

/// `upper` covers `lower` (a Hasse-graph edge lower -> upper).
struct CoverPair {
  ElementId lower;
  ElementId upper;

  auto operator<=>(const CoverPair&) const = default;
};

/// Result of an up-set style query; `truncated` is set when the set meets the
/// truncation boundary and therefore misses unrepresented elements.
struct ElementSet {
  std::vector<ElementId> elements;
  bool truncated = false;
};

struct Classification {
  bool is_antichain = false;
  bool is_connected = false;
  bool is_rooted_tree = false;
  std::vector<ElementId> maximal_elements;  // excludes boundary elements
  std::vector<ElementId> minimal_elements;
};

namespace detail {
struct MobiusCache;
}

/// A finite, or depth-truncated, locally finite poset stored as its covering
/// DAG together with the cached reachability closure.
///
/// Truncated posets carry a boundary: elements whose strict up-sets extend
/// beyond what is represented. Down-sets are always complete.
///
/// Instances are immutable after `build`; copies share the Möbius memo.
class Poset {
 public:
  using Bits = boost::dynamic_bitset<std::uint64_t>;

  Poset();

  /// Throws CycleDetected, RedundantCover, or InvalidArgument (bad ids,
  /// duplicate pairs, bad boundary ids).
  static Poset build(std::size_t n, std::span<const CoverPair> covers,
                     std::span<const ElementId> boundary = {});

  std::size_t size() const noexcept { return children_.size(); }

  std::span<const ElementId> children(ElementId x) const { return children_.at(x); }
  std::span<const ElementId> parents(ElementId x) const { return parents_.at(x); }

  bool leq(ElementId x, ElementId y) const;
  bool less(ElementId x, ElementId y) const { return x != y && leq(x, y); }
  bool comparable(ElementId x, ElementId y) const { return leq(x, y) || leq(y, x); }

  ElementSet up_set(ElementId x) const;      // I[x]
  ElementSet strict_up(ElementId x) const;   // I(x)
  ElementSet down_set(ElementId x) const;    // D[x]
  ElementSet children_set(ElementId x) const;  // A(x)

  const Bits& up_bits(ElementId x) const { return up_.at(x); }
  const Bits& down_bits(ElementId x) const { return down_.at(x); }

  bool is_truncated() const noexcept { return !boundary_.empty(); }
  bool is_boundary(ElementId x) const { return boundary_bits_.test(x); }
  std::span<const ElementId> boundary() const noexcept { return boundary_; }
  bool up_set_meets_boundary(ElementId x) const { return up_.at(x).intersects(boundary_bits_); }

  /// A linear extension: every element appears after all elements below it.
  std::span<const ElementId> topological_order() const noexcept { return topo_; }

  std::vector<CoverPair> cover_pairs() const;
  std::size_t cover_count() const noexcept;

  /// Row x of the Möbius function: m(x, y) at index y for y in I[x], zero
  /// elsewhere. Memoized; safe to call concurrently.
  const std::vector<std::int64_t>& mobius_row(ElementId x) const;

 private:
  std::vector<std::vector<ElementId>> children_;
  std::vector<std::vector<ElementId>> parents_;
  std::vector<Bits> up_;
  std::vector<Bits> down_;
  std::vector<ElementId> topo_;
  std::vector<ElementId> boundary_;
  Bits boundary_bits_;
  std::shared_ptr<detail::MobiusCache> mobius_;
};

/// Unique transitive reduction of a DAG relation. Reflexive pairs (x, x) are
/// ignored; throws CycleDetected otherwise.
std::vector<CoverPair> transitive_reduce(std::size_t n, std::span<const CoverPair> pairs);

Classification classify(const Poset& poset);

/// d(x) for a poset whose covering graph is a rooted tree; throws NotATree.
std::vector<unsigned> tree_depths(const Poset& poset);

std::vector<ElementId> bits_to_ids(const Poset::Bits& bits);

// Basic constructions. Element (i, j) of a two-factor construction has id
// i * |Q| + j.
Poset make_chain(std::size_t n, bool truncated = false);
Poset make_antichain(std::size_t n);
Poset product_poset(const Poset& p, const Poset& q);
Poset lexicographic_product(const Poset& p, const Poset& q);
Poset disjoint_union(const Poset& p, const Poset& q);

}  // namespace posrate
