#pragma once

#include <cstdint>
#include <random>

namespace softabs {

/// Seeded random source shared by every stochastic component.
///
/// The bit generator is std::mt19937_64, whose output sequence is fixed by
/// the C++ standard. The uniform and normal transforms are written out here
/// rather than taken from <random>, whose distributions are
/// implementation-defined, so a seed reproduces the same draws on any
/// conforming toolchain.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via the Marsaglia polar method.
  double normal();

  std::uint64_t next_u64() { return engine_(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace softabs
