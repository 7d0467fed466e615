#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "posrate/poset.hpp"
#include "posrate/rational.hpp"

namespace posrate {

/// Default float-track tolerance for identity checks.
inline constexpr double kIdentityTolerance = 1e-9;

/// Probability table over a represented poset with full support.
///
/// On truncated posets the mass beyond the boundary is `tail_mass`. When
/// present, `upper_tail()[x]` is the part of that mass lying above x, which
/// is what upper-set computations need.
template <Scalar T>
class Pdf {
 public:
  /// Rejects non-positive entries, a mass defect, and inconsistent tail data
  /// with InvalidDistribution. Normalization is exact on the rational track
  /// and within `tol` on the float track.
  static Pdf make(const Poset& poset, std::vector<T> probs, T tail_mass = T(0),
                  std::optional<std::vector<T>> upper_tail = std::nullopt, double tol = 1e-12);

  std::size_t size() const noexcept { return probs_.size(); }
  const std::vector<T>& probs() const noexcept { return probs_; }
  const T& operator[](ElementId x) const { return probs_.at(x); }
  const T& tail_mass() const noexcept { return tail_mass_; }
  const std::optional<std::vector<T>>& upper_tail() const noexcept { return upper_tail_; }

 private:
  Pdf(std::vector<T> probs, T tail_mass, std::optional<std::vector<T>> upper_tail)
      : probs_(std::move(probs)), tail_mass_(std::move(tail_mass)), upper_tail_(std::move(upper_tail)) {}

  std::vector<T> probs_;
  T tail_mass_;
  std::optional<std::vector<T>> upper_tail_;
};

Pdf<double> to_float(const Pdf<Rational>& pdf, const Poset& poset);

template <Scalar T>
struct Upf {
  std::vector<T> values;
};

template <Scalar T>
struct RateFn {
  std::vector<T> values;
};

/// F = Uf, including per-element tail mass on truncations.
template <Scalar T>
Upf<T> upf_from_pdf(const Poset& poset, const Pdf<T>& pdf);

/// f(x) = F(x) - sum over children of F(y). On a truncated tree the children
/// of a boundary node are not represented, so their total UPF mass must be
/// supplied in `boundary_child_mass` (indexed by element, read only at
/// boundary nodes). Throws NotATree, NonPositivePdf, TruncatedUpSet.
template <Scalar T>
Pdf<T> pdf_from_upf_tree(const Poset& tree, const Upf<T>& upf,
                         const std::optional<std::vector<T>>& boundary_child_mass = std::nullopt);

/// P(X >= a for all a in `set`). The empty set gives 1.
template <Scalar T>
T generalized_upf(const Poset& poset, const Pdf<T>& pdf, std::span<const ElementId> set);

template <Scalar T>
using GeneralizedUpfFn = std::function<T(std::span<const ElementId>)>;

/// Inclusion-exclusion over subsets of children:
/// f(x) = sum over B subset of A(x) of (-1)^|B| F({x} u B).
/// Throws TooManyChildren (> 20 children), InconsistentUpf, TruncatedUpSet.
template <Scalar T>
Pdf<T> pdf_from_generalized_upf(const Poset& poset, const GeneralizedUpfFn<T>& upf);

template <Scalar T>
RateFn<T> rate(const Poset& poset, const Pdf<T>& pdf);

/// The rate alpha = f(x0)/F(x0) at the first minimal element when f = alpha F
/// everywhere (exactly on the rational track, within `tol` otherwise).
template <Scalar T>
std::optional<T> check_constant_rate(const Poset& poset, const Pdf<T>& pdf, double tol = kIdentityTolerance);

/// Partition by identical strict up-sets I(x), each class sorted, classes
/// ordered by their smallest element.
std::vector<std::vector<ElementId>> upper_equivalence_classes(const Poset& poset);

template <Scalar T>
Pdf<T> mixture(const Poset& poset, std::span<const Pdf<T>> components, std::span<const T> weights);

template <Scalar T>
struct JointLaw {
  Poset poset;
  Pdf<T> pdf;
};

/// Independent pair on the product order.
template <Scalar T>
JointLaw<T> product_dist(const Poset& p, const Pdf<T>& f, const Poset& q, const Pdf<T>& g);

/// (X, Y) on the lexicographic product with Y uniform on the finite poset q.
template <Scalar T>
JointLaw<T> lex_product(const Poset& p, const Pdf<T>& f, const Poset& q);

// ---------------------------------------------------------------------------
// Moment identities

/// Tail model for a truncated rooted tree. Below each boundary node b the
/// unrepresented mass S_b spreads over deeper levels with
/// P(d(X) >= d(b) + j | X > b) <= (1 - rate_lower_bound)^(j-1), with equality
/// when `exact_geometric` (constant rate equal to the bound).
struct DepthTail {
  Rational rate_lower_bound;
  bool exact_geometric = false;
};

struct MomentRow {
  std::string check;  // "upf_moment" or "rate_moment"
  unsigned n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
  double tail_width = 0.0;  // certified width of the tail contribution
  bool exact = false;       // compared without rounding
  bool pass = false;
};

struct MomentReport {
  std::vector<MomentRow> rows;
  std::optional<Rational> constant_rate;
  double max_tail_width = 0.0;
  bool passed = true;
};

/// Checks sum_x lambda_n(x) F(x) = E[lambda_{n+1}(X)] for n <= n_max and,
/// when f has constant rate alpha, E[lambda_n(X)] = alpha^{-n}. Truncated
/// posets require a DepthTail model and per-element tails; throws
/// TailBoundTooLoose when the certified tail width exceeds `max_tail_width`.
MomentReport moment_identities(const Poset& poset, const Pdf<Rational>& pdf, unsigned n_max,
                               const std::optional<DepthTail>& tail = std::nullopt,
                               double max_tail_width = 1e-9, double tol = 1e-12);

}  // namespace posrate
