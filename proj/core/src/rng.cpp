#include "posrate/rng.hpp"

#include <cmath>
#include <limits>

#include "posrate/error.hpp"

namespace posrate {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) raise(ErrorKind::InvalidArgument, "empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::uint64_t Rng::geometric(double p) {
  if (!(p > 0.0 && p <= 1.0)) raise(ErrorKind::InvalidArgument, "geometric parameter must lie in (0, 1]");
  if (p == 1.0) return 1;
  const double u = uniform_open0();
  return 1 + static_cast<std::uint64_t>(std::floor(std::log(u) / std::log1p(-p)));
}

Rng SeedSpec::stream(std::uint64_t replicate) const {
  return Rng(splitmix64(master_seed ^ splitmix64(replicate)));
}

}  // namespace posrate
