#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace posrate {

/// Half the L1 distance between two probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

std::vector<double> normalize_counts(std::span<const std::uint64_t> counts);

struct ChiSquareResult {
  double statistic = 0.0;
  unsigned dof = 0;
  double p_value = 1.0;
  unsigned bins_used = 0;

  bool rejects(double significance) const { return p_value < significance; }
};

/// Goodness of fit of counts against probabilities. Bins with expected count
/// below `min_expected` are pooled into one bin (dropped if still too small).
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> counts, std::span<const double> probs,
                               double min_expected = 5.0);

/// Two-sample homogeneity test on a shared binning, with the same pooling rule
/// applied to the combined counts.
ChiSquareResult chi_square_homogeneity(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                                       double min_expected = 5.0);

}  // namespace posrate
