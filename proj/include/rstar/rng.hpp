#pragma once

#include <cstdint>
#include <random>

namespace rstar {

/// Seeded, splittable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Distributions are implemented here rather than taken from
/// <random>, because the standard distributions are implementation-defined and
/// would break cross-platform reproducibility.
///
/// child(i) derives a new seed from (seed, i) with a SplitMix64 finalizer, so
/// children depend only on the parent's seed and never on how far the parent
/// stream has advanced.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  Rng child(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// +1 or -1 with probability 1/2 each.
  double rademacher();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace rstar
