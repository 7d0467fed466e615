#include "posrate/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <numeric>

#include "posrate/error.hpp"

namespace posrate {

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) raise(ErrorKind::InvalidArgument, "total variation needs equal lengths");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return 0.5 * sum;
}

std::vector<double> normalize_counts(std::span<const std::uint64_t> counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0.0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / total;
  return out;
}

namespace {

double upper_tail(double statistic, unsigned dof) {
  if (dof == 0) return 1.0;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

}  // namespace

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> counts, std::span<const double> probs,
                               double min_expected) {
  if (counts.size() != probs.size()) raise(ErrorKind::InvalidArgument, "counts and probabilities differ in length");
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  if (n == 0.0) raise(ErrorKind::InvalidArgument, "no observations");

  std::vector<std::pair<double, double>> bins;  // (observed, expected)
  double pooled_obs = 0.0;
  double pooled_exp = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = n * probs[i];
    if (expected < min_expected) {
      pooled_obs += static_cast<double>(counts[i]);
      pooled_exp += expected;
    } else {
      bins.emplace_back(static_cast<double>(counts[i]), expected);
    }
  }
  if (pooled_exp >= min_expected) bins.emplace_back(pooled_obs, pooled_exp);

  ChiSquareResult out;
  for (const auto& [obs, exp] : bins) out.statistic += (obs - exp) * (obs - exp) / exp;
  out.bins_used = static_cast<unsigned>(bins.size());
  out.dof = out.bins_used > 0 ? out.bins_used - 1 : 0;
  out.p_value = upper_tail(out.statistic, out.dof);
  return out;
}

ChiSquareResult chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                       double min_expected) {
  if (a.size() != b.size()) raise(ErrorKind::InvalidArgument, "samples use different binnings");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::uint64_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::uint64_t{0}));
  if (na == 0.0 || nb == 0.0) raise(ErrorKind::InvalidArgument, "no observations");
  const double n = na + nb;

  std::vector<std::pair<double, double>> bins;
  double pooled_a = 0.0;
  double pooled_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double row = static_cast<double>(a[i] + b[i]);
    if (std::min(row * na / n, row * nb / n) < min_expected) {
      pooled_a += static_cast<double>(a[i]);
      pooled_b += static_cast<double>(b[i]);
    } else {
      bins.emplace_back(static_cast<double>(a[i]), static_cast<double>(b[i]));
    }
  }
  const double pooled_row = pooled_a + pooled_b;
  if (std::min(pooled_row * na / n, pooled_row * nb / n) >= min_expected) bins.emplace_back(pooled_a, pooled_b);

  ChiSquareResult out;
  for (const auto& [oa, ob] : bins) {
    const double row = oa + ob;
    const double ea = row * na / n;
    const double eb = row * nb / n;
    out.statistic += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
  }
  out.bins_used = static_cast<unsigned>(bins.size());
  out.dof = out.bins_used > 0 ? out.bins_used - 1 : 0;
  out.p_value = upper_tail(out.statistic, out.dof);
  return out;
}

}  // namespace posrate
