#pragma once

#include <cstdint>
#include <random>

namespace censreg {

/// Seedable generator used by every simulation routine.
///
/// Normal deviates come from the inverse CDF of a 53-bit uniform, so a given
/// seed produces the same stream on every platform (std::normal_distribution
/// is implementation-defined).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for replicate `index` of an experiment seeded by `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index);

  /// Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace censreg
