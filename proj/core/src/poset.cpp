#include "posrate/poset.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <numeric>
#include <set>
#include <string>

#include "posrate/error.hpp"

namespace posrate {

namespace detail {

struct MobiusCache {
  explicit MobiusCache(std::size_t n) : flags(new std::once_flag[n]), rows(n) {}

  std::unique_ptr<std::once_flag[]> flags;
  std::vector<std::vector<std::int64_t>> rows;
};

}  // namespace detail

namespace {

std::string pair_text(ElementId x, ElementId y) {
  return "(" + std::to_string(x) + ", " + std::to_string(y) + ")";
}

// Kahn's algorithm with a FIFO seeded in id order. Returns fewer than n ids
// when a cycle exists.
std::vector<ElementId> topological_sort(const std::vector<std::vector<ElementId>>& children) {
  const std::size_t n = children.size();
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& row : children) {
    for (ElementId c : row) ++indegree[c];
  }
  std::deque<ElementId> ready;
  for (ElementId x = 0; x < n; ++x) {
    if (indegree[x] == 0) ready.push_back(x);
  }
  std::vector<ElementId> order;
  order.reserve(n);
  while (!ready.empty()) {
    ElementId x = ready.front();
    ready.pop_front();
    order.push_back(x);
    for (ElementId c : children[x]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  return order;
}

void check_ids(std::size_t n, std::span<const CoverPair> pairs) {
  for (const auto& p : pairs) {
    if (p.lower >= n || p.upper >= n) {
      raise(ErrorKind::InvalidArgument, "element id out of range in pair " + pair_text(p.lower, p.upper));
    }
  }
}

}  // namespace

Poset::Poset() : boundary_bits_(0), mobius_(std::make_shared<detail::MobiusCache>(0)) {}

Poset Poset::build(std::size_t n, std::span<const CoverPair> covers,
                   std::span<const ElementId> boundary) {
  check_ids(n, covers);
  std::set<CoverPair> seen;
  for (const auto& p : covers) {
    if (p.lower == p.upper) raise(ErrorKind::CycleDetected, "self-loop at " + std::to_string(p.lower));
    if (!seen.insert(p).second) {
      raise(ErrorKind::InvalidArgument, "duplicate cover pair " + pair_text(p.lower, p.upper));
    }
  }

  Poset out;
  out.children_.assign(n, {});
  out.parents_.assign(n, {});
  for (const auto& p : covers) {
    out.children_[p.lower].push_back(p.upper);
    out.parents_[p.upper].push_back(p.lower);
  }
  for (auto& row : out.children_) std::sort(row.begin(), row.end());
  for (auto& row : out.parents_) std::sort(row.begin(), row.end());

  out.topo_ = topological_sort(out.children_);
  if (out.topo_.size() != n) raise(ErrorKind::CycleDetected, "covering relation contains a directed cycle");

  out.up_.assign(n, Bits(n));
  out.down_.assign(n, Bits(n));
  for (auto it = out.topo_.rbegin(); it != out.topo_.rend(); ++it) {
    ElementId x = *it;
    out.up_[x].set(x);
    for (ElementId c : out.children_[x]) out.up_[x] |= out.up_[c];
  }
  for (ElementId x : out.topo_) {
    out.down_[x].set(x);
    for (ElementId p : out.parents_[x]) out.down_[x] |= out.down_[p];
  }

  // An edge x -> y is redundant when y is reachable through another child.
  for (ElementId x = 0; x < n; ++x) {
    for (ElementId y : out.children_[x]) {
      for (ElementId c : out.children_[x]) {
        if (c != y && out.up_[c].test(y)) {
          raise(ErrorKind::RedundantCover,
                "edge " + pair_text(x, y) + " is implied by transitivity through " + std::to_string(c));
        }
      }
    }
  }

  out.boundary_bits_ = Bits(n);
  for (ElementId b : boundary) {
    if (b >= n) raise(ErrorKind::InvalidArgument, "boundary id out of range: " + std::to_string(b));
    if (out.boundary_bits_.test(b)) raise(ErrorKind::InvalidArgument, "duplicate boundary id " + std::to_string(b));
    out.boundary_bits_.set(b);
  }
  out.boundary_.assign(boundary.begin(), boundary.end());
  std::sort(out.boundary_.begin(), out.boundary_.end());
  out.mobius_ = std::make_shared<detail::MobiusCache>(n);
  return out;
}

bool Poset::leq(ElementId x, ElementId y) const {
  if (x >= size() || y >= size()) raise(ErrorKind::InvalidArgument, "element id out of range");
  return up_[x].test(y);
}

std::vector<ElementId> bits_to_ids(const Poset::Bits& bits) {
  std::vector<ElementId> out;
  out.reserve(bits.count());
  for (auto i = bits.find_first(); i != Poset::Bits::npos; i = bits.find_next(i)) {
    out.push_back(static_cast<ElementId>(i));
  }
  return out;
}

ElementSet Poset::up_set(ElementId x) const {
  return {bits_to_ids(up_.at(x)), up_set_meets_boundary(x)};
}

ElementSet Poset::strict_up(ElementId x) const {
  Bits bits = up_.at(x);
  bits.reset(x);
  return {bits_to_ids(bits), up_set_meets_boundary(x)};
}

ElementSet Poset::down_set(ElementId x) const { return {bits_to_ids(down_.at(x)), false}; }

ElementSet Poset::children_set(ElementId x) const {
  const auto& row = children_.at(x);
  return {std::vector<ElementId>(row.begin(), row.end()), is_boundary(x)};
}

std::vector<CoverPair> Poset::cover_pairs() const {
  std::vector<CoverPair> out;
  for (ElementId x = 0; x < size(); ++x) {
    for (ElementId y : children_[x]) out.push_back({x, y});
  }
  return out;
}

std::size_t Poset::cover_count() const noexcept {
  std::size_t total = 0;
  for (const auto& row : children_) total += row.size();
  return total;
}

const std::vector<std::int64_t>& Poset::mobius_row(ElementId x) const {
  if (x >= size()) raise(ErrorKind::InvalidArgument, "element id out of range");
  auto& cache = *mobius_;
  std::call_once(cache.flags[x], [&] {
    // m(x, x) = 1 and m(x, y) = -sum_{x <= t < y} m(x, t), visiting I[x] in
    // topological order so every m(x, t) with t < y is already known.
    std::vector<std::int64_t> row(size(), 0);
    const Bits& above = up_[x];
    for (ElementId y : topo_) {
      if (!above.test(y)) continue;
      if (y == x) {
        row[y] = 1;
        continue;
      }
      Bits interval = above & down_[y];
      interval.reset(y);
      std::int64_t sum = 0;
      for (auto t = interval.find_first(); t != Bits::npos; t = interval.find_next(t)) {
        if (__builtin_add_overflow(sum, row[t], &sum)) {
          raise(ErrorKind::Overflow, "Möbius accumulation overflow");
        }
      }
      row[y] = -sum;
    }
    cache.rows[x] = std::move(row);
  });
  return cache.rows[x];
}

std::vector<CoverPair> transitive_reduce(std::size_t n, std::span<const CoverPair> pairs) {
  check_ids(n, pairs);
  std::vector<std::vector<ElementId>> succ(n);
  for (const auto& p : pairs) {
    if (p.lower != p.upper) succ[p.lower].push_back(p.upper);
  }
  for (auto& row : succ) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  auto order = topological_sort(succ);
  if (order.size() != n) raise(ErrorKind::CycleDetected, "relation contains a directed cycle");

  std::vector<Poset::Bits> reach(n, Poset::Bits(n));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    for (ElementId y : succ[*it]) {
      reach[*it].set(y);
      reach[*it] |= reach[y];
    }
  }
  std::vector<CoverPair> out;
  for (ElementId x = 0; x < n; ++x) {
    for (auto y = reach[x].find_first(); y != Poset::Bits::npos; y = reach[x].find_next(y)) {
      bool covered = true;
      for (auto z = reach[x].find_first(); z != Poset::Bits::npos; z = reach[x].find_next(z)) {
        if (z != y && reach[z].test(y)) {
          covered = false;
          break;
        }
      }
      if (covered) out.push_back({x, static_cast<ElementId>(y)});
    }
  }
  return out;
}

Classification classify(const Poset& poset) {
  Classification out;
  const std::size_t n = poset.size();
  out.is_antichain = poset.cover_count() == 0;

  std::vector<ElementId> root(n);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](ElementId x) {
    while (root[x] != x) {
      root[x] = root[root[x]];
      x = root[x];
    }
    return x;
  };
  for (const auto& edge : poset.cover_pairs()) {
    root[find(edge.lower)] = find(edge.upper);
  }
  std::size_t components = 0;
  for (ElementId x = 0; x < n; ++x) {
    if (find(x) == x) ++components;
    if (poset.parents(x).empty()) out.minimal_elements.push_back(x);
    if (poset.children(x).empty() && !poset.is_boundary(x)) out.maximal_elements.push_back(x);
  }
  out.is_connected = components == 1;

  if (n > 0 && out.minimal_elements.size() == 1) {
    out.is_rooted_tree = true;
    for (ElementId x = 0; x < n; ++x) {
      if (x != out.minimal_elements.front() && poset.parents(x).size() != 1) {
        out.is_rooted_tree = false;
        break;
      }
    }
  }
  return out;
}

std::vector<unsigned> tree_depths(const Poset& poset) {
  if (!classify(poset).is_rooted_tree) raise(ErrorKind::NotATree, "covering graph is not a rooted tree");
  std::vector<unsigned> depth(poset.size(), 0);
  for (ElementId x : poset.topological_order()) {
    if (!poset.parents(x).empty()) depth[x] = depth[poset.parents(x).front()] + 1;
  }
  return depth;
}

Poset make_chain(std::size_t n, bool truncated) {
  std::vector<CoverPair> pairs;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    pairs.push_back({static_cast<ElementId>(i), static_cast<ElementId>(i + 1)});
  }
  std::vector<ElementId> boundary;
  if (truncated && n > 0) boundary.push_back(static_cast<ElementId>(n - 1));
  return Poset::build(n, pairs, boundary);
}

Poset make_antichain(std::size_t n) { return Poset::build(n, {}); }

Poset product_poset(const Poset& p, const Poset& q) {
  const std::size_t m = q.size();
  auto id = [m](std::size_t i, std::size_t j) { return static_cast<ElementId>(i * m + j); };
  std::vector<CoverPair> pairs;
  std::vector<ElementId> boundary;
  for (ElementId i = 0; i < p.size(); ++i) {
    for (ElementId j = 0; j < m; ++j) {
      for (ElementId c : p.children(i)) pairs.push_back({id(i, j), id(c, j)});
      for (ElementId c : q.children(j)) pairs.push_back({id(i, j), id(i, c)});
      if (p.is_boundary(i) || q.is_boundary(j)) boundary.push_back(id(i, j));
    }
  }
  return Poset::build(p.size() * m, pairs, boundary);
}

Poset lexicographic_product(const Poset& p, const Poset& q) {
  if (q.is_truncated()) raise(ErrorKind::InvalidArgument, "second lexicographic factor must be finite");
  const std::size_t m = q.size();
  auto id = [m](std::size_t i, std::size_t j) { return static_cast<ElementId>(i * m + j); };
  const auto q_class = classify(q);
  std::vector<CoverPair> pairs;
  std::vector<ElementId> boundary;
  for (ElementId i = 0; i < p.size(); ++i) {
    for (ElementId j = 0; j < m; ++j) {
      for (ElementId c : q.children(j)) pairs.push_back({id(i, j), id(i, c)});
      if (q.children(j).empty()) {
        for (ElementId c : p.children(i)) {
          for (ElementId low : q_class.minimal_elements) pairs.push_back({id(i, j), id(c, low)});
        }
      }
      if (p.is_boundary(i)) boundary.push_back(id(i, j));
    }
  }
  return Poset::build(p.size() * m, pairs, boundary);
}

Poset disjoint_union(const Poset& p, const Poset& q) {
  const auto offset = static_cast<ElementId>(p.size());
  std::vector<CoverPair> pairs = p.cover_pairs();
  for (const auto& e : q.cover_pairs()) pairs.push_back({e.lower + offset, e.upper + offset});
  std::vector<ElementId> boundary(p.boundary().begin(), p.boundary().end());
  for (ElementId b : q.boundary()) boundary.push_back(b + offset);
  return Poset::build(p.size() + q.size(), pairs, boundary);
}

}  // namespace posrate
