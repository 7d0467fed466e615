#pragma once

namespace posrate::detail {

struct SeriesValue {
  double value = 0.0;
  double remainder = 0.0;  // rigorous bound on the neglected terms
};

// sum_{j >= j0} C(a + offset + j, a) q^(j - 1) for 0 <= q < 1. Consecutive
// terms have ratio q (a + offset + j + 1) / (offset + j + 1), decreasing in j,
// which bounds the remainder by a geometric series.
SeriesValue poly_geometric_sum(unsigned a, unsigned offset, unsigned j0, double q);

}  // namespace posrate::detail
