#include "posrate/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "posrate/error.hpp"
#include "posrate/incidence.hpp"
#include "series.hpp"

namespace posrate {

namespace {

template <Scalar T>
bool is_positive(const T& v) {
  return v > 0;
}

template <Scalar T>
bool close_enough(const T& a, const T& b, double tol) {
  if constexpr (is_exact_v<T>) {
    (void)tol;
    return a == b;
  } else {
    return std::abs(a - b) <= tol;
  }
}

template <Scalar T>
std::string show(const T& v) {
  if constexpr (is_exact_v<T>) {
    return to_string(v);
  } else {
    return std::to_string(v);
  }
}

}  // namespace

template <Scalar T>
Pdf<T> Pdf<T>::make(const Poset& poset, std::vector<T> probs, T tail_mass,
                    std::optional<std::vector<T>> upper_tail, double tol) {
  if (probs.size() != poset.size()) {
    raise(ErrorKind::InvalidDistribution, "probability table has " + std::to_string(probs.size()) +
                                              " entries for a poset of " + std::to_string(poset.size()));
  }
  T total(0);
  for (ElementId x = 0; x < probs.size(); ++x) {
    if (!is_positive(probs[x])) {
      raise(ErrorKind::InvalidDistribution,
            "support must be the whole poset; f(" + std::to_string(x) + ") = " + show(probs[x]));
    }
    total += probs[x];
  }
  if (tail_mass < 0) raise(ErrorKind::InvalidDistribution, "negative tail mass");
  if (tail_mass > 0 && !poset.is_truncated()) {
    raise(ErrorKind::InvalidDistribution, "tail mass on a poset without truncation boundary");
  }
  if (!close_enough<T>(total + tail_mass, T(1), tol)) {
    raise(ErrorKind::InvalidDistribution, "total mass " + show(T(total + tail_mass)) + " != 1");
  }
  if (upper_tail) {
    if (upper_tail->size() != poset.size()) raise(ErrorKind::InvalidDistribution, "upper tail size mismatch");
    for (ElementId x = 0; x < poset.size(); ++x) {
      const T& u = (*upper_tail)[x];
      if (u < 0 || (u > tail_mass && !close_enough<T>(u, tail_mass, tol))) {
        raise(ErrorKind::InvalidDistribution, "upper tail at " + std::to_string(x) + " outside [0, tail]");
      }
      if (u > 0 && !poset.up_set_meets_boundary(x)) {
        raise(ErrorKind::InvalidDistribution,
              "upper tail at " + std::to_string(x) + " but its up-set is fully represented");
      }
    }
  }
  return Pdf(std::move(probs), std::move(tail_mass), std::move(upper_tail));
}

Pdf<double> to_float(const Pdf<Rational>& pdf, const Poset& poset) {
  std::vector<double> probs;
  probs.reserve(pdf.size());
  for (const auto& p : pdf.probs()) probs.push_back(p.get_d());
  std::optional<std::vector<double>> tail;
  if (pdf.upper_tail()) {
    tail.emplace();
    for (const auto& u : *pdf.upper_tail()) tail->push_back(u.get_d());
  }
  return Pdf<double>::make(poset, std::move(probs), pdf.tail_mass().get_d(), std::move(tail), 1e-12);
}

template <Scalar T>
Upf<T> upf_from_pdf(const Poset& poset, const Pdf<T>& pdf) {
  if (pdf.size() != poset.size()) raise(ErrorKind::InvalidArgument, "pdf does not match poset");
  if (pdf.upper_tail()) {
    return {upper_op<T>(poset, pdf.probs(), std::span<const T>(*pdf.upper_tail()))};
  }
  if (pdf.tail_mass() == 0 && poset.is_truncated()) {
    std::vector<T> zeros(poset.size(), T(0));
    return {upper_op<T>(poset, pdf.probs(), std::span<const T>(zeros))};
  }
  return {upper_op<T>(poset, pdf.probs())};
}

template <Scalar T>
Pdf<T> pdf_from_upf_tree(const Poset& tree, const Upf<T>& upf,
                         const std::optional<std::vector<T>>& boundary_child_mass) {
  if (!classify(tree).is_rooted_tree) raise(ErrorKind::NotATree, "covering graph is not a rooted tree");
  if (upf.values.size() != tree.size()) raise(ErrorKind::InvalidArgument, "UPF does not match poset");
  if (tree.is_truncated() && !boundary_child_mass) {
    raise(ErrorKind::TruncatedUpSet, "boundary nodes need the UPF mass of their unrepresented children");
  }
  if (boundary_child_mass && boundary_child_mass->size() != tree.size()) {
    raise(ErrorKind::InvalidArgument, "boundary child mass size mismatch");
  }
  const auto& F = upf.values;
  std::vector<T> probs(tree.size(), T(0));
  std::vector<T> own_tail(tree.size(), T(0));
  for (ElementId x = 0; x < tree.size(); ++x) {
    T children(0);
    for (ElementId y : tree.children(x)) children += F[y];
    if (tree.is_boundary(x)) {
      if (!tree.children(x).empty()) {
        raise(ErrorKind::InvalidArgument, "boundary node " + std::to_string(x) + " has represented children");
      }
      own_tail[x] = (*boundary_child_mass)[x];
      children += own_tail[x];
    }
    probs[x] = F[x] - children;
    if (!(probs[x] > 0)) {
      raise(ErrorKind::NonPositivePdf,
            "F(x) <= sum of children at node " + std::to_string(x) + " (f = " + show(probs[x]) + ")");
    }
  }
  if (!tree.is_truncated()) return Pdf<T>::make(tree, std::move(probs));

  std::vector<T> upper(tree.size(), T(0));
  const auto order = tree.topological_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const ElementId x = *it;
    upper[x] = own_tail[x];
    for (ElementId y : tree.children(x)) upper[x] += upper[y];
  }
  T tail(0);
  for (ElementId b : tree.boundary()) tail += own_tail[b];
  return Pdf<T>::make(tree, std::move(probs), tail, std::move(upper));
}

template <Scalar T>
T generalized_upf(const Poset& poset, const Pdf<T>& pdf, std::span<const ElementId> set) {
  if (set.empty()) return T(1);
  Poset::Bits common = poset.up_bits(set.front());
  for (ElementId a : set.subspan(1)) common &= poset.up_bits(a);
  T total(0);
  for (auto x = common.find_first(); x != Poset::Bits::npos; x = common.find_next(x)) total += pdf[x];

  if (pdf.tail_mass() == 0) return total;
  const auto& upper = pdf.upper_tail();
  if (!upper) raise(ErrorKind::TruncatedUpSet, "generalized UPF on a truncation needs per-element tails");
  if (set.size() == 1) return total + (*upper)[set.front()];
  bool all_full = true;
  for (ElementId a : set) {
    if ((*upper)[a] == 0) return total;
    if (!((*upper)[a] == pdf.tail_mass())) all_full = false;
  }
  if (!all_full) {
    raise(ErrorKind::TruncatedUpSet, "joint tail mass above the set is not determined by the truncation");
  }
  return total + pdf.tail_mass();
}

template <Scalar T>
Pdf<T> pdf_from_generalized_upf(const Poset& poset, const GeneralizedUpfFn<T>& upf) {
  if (poset.is_truncated()) {
    raise(ErrorKind::TruncatedUpSet, "recovery from the generalized UPF needs a finite poset");
  }
  constexpr std::size_t kMaxChildren = 20;
  std::vector<T> probs(poset.size(), T(0));
  std::vector<ElementId> set;
  for (ElementId x = 0; x < poset.size(); ++x) {
    const auto kids = poset.children(x);
    if (kids.size() > kMaxChildren) {
      raise(ErrorKind::TooManyChildren, std::to_string(kids.size()) + " children at " + std::to_string(x));
    }
    T value(0);
    const std::uint32_t subsets = 1u << kids.size();
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
      set.assign(1, x);
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (mask & (1u << i)) set.push_back(kids[i]);
      }
      const T term = upf(set);
      if (std::popcount(mask) % 2 == 0) {
        value += term;
      } else {
        value -= term;
      }
    }
    if (!(value > 0)) {
      raise(ErrorKind::InconsistentUpf, "recovered f(" + std::to_string(x) + ") = " + show(value));
    }
    probs[x] = value;
  }
  try {
    return Pdf<T>::make(poset, std::move(probs));
  } catch (const Error& e) {
    raise(ErrorKind::InconsistentUpf, e.what());
  }
}

template <Scalar T>
RateFn<T> rate(const Poset& poset, const Pdf<T>& pdf) {
  const auto F = upf_from_pdf(poset, pdf);
  RateFn<T> out;
  out.values.reserve(poset.size());
  for (ElementId x = 0; x < poset.size(); ++x) out.values.push_back(pdf[x] / F.values[x]);
  return out;
}

template <Scalar T>
std::optional<T> check_constant_rate(const Poset& poset, const Pdf<T>& pdf, double tol) {
  if (poset.size() == 0) return std::nullopt;
  const auto F = upf_from_pdf(poset, pdf);
  const auto minimal = classify(poset).minimal_elements;
  const ElementId x0 = minimal.front();
  const T alpha = pdf[x0] / F.values[x0];
  for (ElementId x = 0; x < poset.size(); ++x) {
    if (!close_enough<T>(pdf[x], T(alpha * F.values[x]), tol)) return std::nullopt;
  }
  return alpha;
}

std::vector<std::vector<ElementId>> upper_equivalence_classes(const Poset& poset) {
  std::map<Poset::Bits, std::vector<ElementId>> groups;
  for (ElementId x = 0; x < poset.size(); ++x) {
    Poset::Bits strict = poset.up_bits(x);
    strict.reset(x);
    groups[strict].push_back(x);
  }
  std::vector<std::vector<ElementId>> out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) out.push_back(std::move(members));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

template <Scalar T>
Pdf<T> mixture(const Poset& poset, std::span<const Pdf<T>> components, std::span<const T> weights) {
  if (components.empty() || components.size() != weights.size()) {
    raise(ErrorKind::InvalidArgument, "mixture needs one weight per component");
  }
  T weight_total(0);
  for (const auto& w : weights) {
    if (w < 0) raise(ErrorKind::InvalidArgument, "negative mixture weight");
    weight_total += w;
  }
  if (!close_enough<T>(weight_total, T(1), 1e-12)) raise(ErrorKind::InvalidArgument, "weights must sum to 1");

  std::vector<T> probs(poset.size(), T(0));
  T tail(0);
  bool have_upper = true;
  std::vector<T> upper(poset.size(), T(0));
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    if (c.size() != poset.size()) raise(ErrorKind::InvalidArgument, "component does not match poset");
    for (ElementId x = 0; x < poset.size(); ++x) probs[x] += weights[i] * c[x];
    tail += weights[i] * c.tail_mass();
    if (c.upper_tail()) {
      for (ElementId x = 0; x < poset.size(); ++x) upper[x] += weights[i] * (*c.upper_tail())[x];
    } else if (c.tail_mass() > 0) {
      have_upper = false;
    }
  }
  std::optional<std::vector<T>> upper_opt;
  if (tail > 0 && have_upper) upper_opt = std::move(upper);
  return Pdf<T>::make(poset, std::move(probs), tail, std::move(upper_opt));
}

template <Scalar T>
JointLaw<T> product_dist(const Poset& p, const Pdf<T>& f, const Poset& q, const Pdf<T>& g) {
  Poset joint = product_poset(p, q);
  const std::size_t m = q.size();
  std::vector<T> probs(joint.size(), T(0));
  for (ElementId i = 0; i < p.size(); ++i) {
    for (ElementId j = 0; j < m; ++j) probs[i * m + j] = f[i] * g[j];
  }
  const T tail = T(1) - (T(1) - f.tail_mass()) * (T(1) - g.tail_mass());
  if (tail == 0) return {joint, Pdf<T>::make(joint, std::move(probs))};

  auto has_tails = [](const Pdf<T>& d) { return d.tail_mass() == 0 || d.upper_tail().has_value(); };
  if (!has_tails(f) || !has_tails(g)) {
    return {joint, Pdf<T>::make(joint, std::move(probs), tail)};
  }
  // Mass above (i, j) beyond the product truncation is F_f(i) F_g(j) minus
  // the represented part R_f(i) R_g(j).
  const auto Ff = upf_from_pdf(p, f).values;
  const auto Fg = upf_from_pdf(q, g).values;
  auto own = [](const Pdf<T>& d, ElementId x) { return d.upper_tail() ? (*d.upper_tail())[x] : T(0); };
  std::vector<T> upper(joint.size(), T(0));
  for (ElementId i = 0; i < p.size(); ++i) {
    for (ElementId j = 0; j < m; ++j) {
      upper[i * m + j] = Ff[i] * Fg[j] - (Ff[i] - own(f, i)) * (Fg[j] - own(g, j));
    }
  }
  return {joint, Pdf<T>::make(joint, std::move(probs), tail, std::move(upper))};
}

template <Scalar T>
JointLaw<T> lex_product(const Poset& p, const Pdf<T>& f, const Poset& q) {
  Poset joint = lexicographic_product(p, q);
  const std::size_t m = q.size();
  if (m == 0) raise(ErrorKind::InvalidArgument, "empty second factor");
  std::vector<T> probs(joint.size(), T(0));
  std::optional<std::vector<T>> upper;
  if (f.upper_tail()) upper.emplace(joint.size(), T(0));
  for (ElementId i = 0; i < p.size(); ++i) {
    for (ElementId j = 0; j < m; ++j) {
      probs[i * m + j] = f[i] / T(static_cast<long>(m));
      if (upper) (*upper)[i * m + j] = (*f.upper_tail())[i];
    }
  }
  return {joint, Pdf<T>::make(joint, std::move(probs), f.tail_mass(), std::move(upper))};
}

// ---------------------------------------------------------------------------

namespace {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double width() const { return hi - lo; }
};

}  // namespace

MomentReport moment_identities(const Poset& poset, const Pdf<Rational>& pdf, unsigned n_max,
                               const std::optional<DepthTail>& tail, double max_tail_width, double tol) {
  MomentReport report;
  const auto lambda = cumulative(poset, n_max + 1);
  const auto F = upf_from_pdf(poset, pdf).values;
  report.constant_rate = check_constant_rate(poset, pdf);

  auto exact_sum = [&](unsigned n, bool with_upf) {
    Rational total(0);
    for (ElementId x = 0; x < poset.size(); ++x) total += lambda.at(n, x) * (with_upf ? F[x] : pdf[x]);
    return total;
  };

  if (pdf.tail_mass() == 0) {
    auto push = [&](std::string check, unsigned n, const Rational& lhs, const Rational& rhs) {
      MomentRow row{std::move(check), n, to_double(lhs), to_double(rhs),
                    to_double(abs(Rational(lhs - rhs))), 0.0, true, lhs == rhs};
      report.passed = report.passed && row.pass;
      report.rows.push_back(std::move(row));
    };
    for (unsigned n = 0; n <= n_max; ++n) push("upf_moment", n, exact_sum(n, true), exact_sum(n + 1, false));
    if (report.constant_rate) {
      for (unsigned n = 0; n <= n_max; ++n) {
        push("rate_moment", n, exact_sum(n, false), Rational(1) / pow(*report.constant_rate, n));
      }
    }
    return report;
  }

  if (!tail) raise(ErrorKind::TailBoundTooLoose, "truncated law without a certified tail model");
  if (!pdf.upper_tail()) raise(ErrorKind::TailBoundTooLoose, "truncated law without per-element tails");
  const auto depth = tree_depths(poset);
  const double beta = to_double(tail->rate_lower_bound);
  if (!(beta > 0.0 && beta <= 1.0)) raise(ErrorKind::InvalidArgument, "rate lower bound must lie in (0, 1]");
  const double q = 1.0 - beta;

  // Contribution of the unrepresented subtrees to sum lambda_n(x) w(x), where
  // w = f (probability weights) or w = F (UPF weights).
  auto tail_interval = [&](unsigned n, bool with_upf) {
    Interval acc;
    for (ElementId b : poset.boundary()) {
      const double mass = to_double((*pdf.upper_tail())[b]);
      if (mass == 0.0) continue;
      const unsigned m = depth[b];
      const auto full = detail::poly_geometric_sum(n, m, 1, q);
      const double first = to_double(binomial(n + m + 1, n));
      if (tail->exact_geometric) {
        const double scale = with_upf ? mass : mass * beta;
        acc.lo += scale * full.value;
        acc.hi += scale * (full.value + full.remainder);
      } else if (with_upf) {
        acc.lo += mass * first;
        acc.hi += mass * (full.value + full.remainder);
      } else {
        acc.lo += mass * first;
        double extra = 0.0;
        if (n > 0) {
          const auto diffs = detail::poly_geometric_sum(n - 1, m, 2, q);
          extra = diffs.value + diffs.remainder;
        }
        acc.hi += mass * (first + extra);
      }
    }
    return acc;
  };

  auto side = [&](unsigned n, bool with_upf) {
    Interval t = tail_interval(n, with_upf);
    const double represented = to_double(exact_sum(n, with_upf));
    return Interval{represented + t.lo, represented + t.hi};
  };

  auto push = [&](std::string check, unsigned n, Interval lhs, Interval rhs) {
    MomentRow row;
    row.check = std::move(check);
    row.n = n;
    row.lhs = lhs.mid();
    row.rhs = rhs.mid();
    row.abs_err = std::abs(row.lhs - row.rhs);
    row.tail_width = lhs.width() + rhs.width();
    if (row.tail_width > max_tail_width) {
      raise(ErrorKind::TailBoundTooLoose, row.check + " n=" + std::to_string(n) + " certified tail width " +
                                              std::to_string(row.tail_width) + " exceeds " +
                                              std::to_string(max_tail_width));
    }
    const double scale = std::max({1.0, std::abs(row.lhs), std::abs(row.rhs)});
    row.pass = row.abs_err <= 0.5 * row.tail_width + tol * scale;
    report.max_tail_width = std::max(report.max_tail_width, row.tail_width);
    report.passed = report.passed && row.pass;
    report.rows.push_back(std::move(row));
  };

  for (unsigned n = 0; n <= n_max; ++n) push("upf_moment", n, side(n, true), side(n + 1, false));
  if (report.constant_rate) {
    for (unsigned n = 0; n <= n_max; ++n) {
      const double target = to_double(Rational(Rational(1) / pow(*report.constant_rate, n)));
      push("rate_moment", n, side(n, false), Interval{target, target});
    }
  }
  return report;
}

#define POSRATE_INSTANTIATE(T)                                                                          \
  template class Pdf<T>;                                                                                \
  template Upf<T> upf_from_pdf<T>(const Poset&, const Pdf<T>&);                                          \
  template Pdf<T> pdf_from_upf_tree<T>(const Poset&, const Upf<T>&, const std::optional<std::vector<T>>&); \
  template T generalized_upf<T>(const Poset&, const Pdf<T>&, std::span<const ElementId>);               \
  template Pdf<T> pdf_from_generalized_upf<T>(const Poset&, const GeneralizedUpfFn<T>&);                \
  template RateFn<T> rate<T>(const Poset&, const Pdf<T>&);                                              \
  template std::optional<T> check_constant_rate<T>(const Poset&, const Pdf<T>&, double);                \
  template Pdf<T> mixture<T>(const Poset&, std::span<const Pdf<T>>, std::span<const T>);                \
  template JointLaw<T> product_dist<T>(const Poset&, const Pdf<T>&, const Poset&, const Pdf<T>&);       \
  template JointLaw<T> lex_product<T>(const Poset&, const Pdf<T>&, const Poset&);

POSRATE_INSTANTIATE(Rational)
POSRATE_INSTANTIATE(double)

#undef POSRATE_INSTANTIATE

}  // namespace posrate
