#pragma once

#include <cstdint>
#include <random>

namespace posrate {

/// SplitMix64 finalizer; used to derive replicate streams.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Thin wrapper over mt19937_64. Uniforms are built from the top 53 bits so
/// draws are identical on every platform (std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1], safe for logarithms.
  double uniform_open0() { return 1.0 - uniform(); }
  /// Uniform integer in [0, n), by rejection.
  std::uint64_t below(std::uint64_t n);
  /// Geometric on {1, 2, ...} with success probability p, by inversion.
  std::uint64_t geometric(double p);

 private:
  std::mt19937_64 engine_;
};

/// Replicate i draws from Rng(splitmix64(master ^ splitmix64(i))), so paths
/// depend only on (master_seed, i) and never on scheduling.
struct SeedSpec {
  std::uint64_t master_seed = 0;

  Rng stream(std::uint64_t replicate) const;
};

}  // namespace posrate
