#include "series.hpp"

#include <algorithm>
#include <cmath>

#include "posrate/error.hpp"
#include "posrate/rational.hpp"

namespace posrate::detail {

SeriesValue poly_geometric_sum(unsigned a, unsigned offset, unsigned j0, double q) {
  SeriesValue out;
  if (q <= 0.0) {
    out.value = j0 == 1 ? to_double(binomial(a + offset + 1, a)) : 0.0;
    return out;
  }
  double term = to_double(binomial(a + offset + j0, a)) * std::pow(q, static_cast<double>(j0 - 1));
  for (unsigned j = j0; j < j0 + 100000; ++j) {
    out.value += term;
    term *= q * (a + offset + j + 1.0) / (offset + j + 1.0);
    const double next_ratio = q * (a + offset + j + 2.0) / (offset + j + 2.0);
    if (next_ratio < 1.0) {
      const double bound = term / (1.0 - next_ratio);
      if (bound <= 1e-18 * std::max(1.0, out.value)) {
        out.remainder = bound;
        return out;
      }
    }
  }
  raise(ErrorKind::TailBoundTooLoose, "tail series did not converge");
}

}  // namespace posrate::detail
