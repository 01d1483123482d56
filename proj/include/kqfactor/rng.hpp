#pragma once

#include <cstdint>

namespace kqf {

/// PCG32 (XSH-RR output on a 64-bit LCG, O'Neill 2014). Chosen over the
/// standard engines + distributions because std::normal_distribution is
/// implementation-defined; every draw here is reproducible across platforms.
class Pcg32 {
 public:
  explicit Pcg32(std::uint64_t seed, std::uint64_t stream = 0xda3e39cb94b95bdbULL);

  std::uint32_t next_u32();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();
  /// Uniform integer in [0, bound).
  std::uint32_t below(std::uint32_t bound);

 private:
  std::uint64_t state_ = 0;
  std::uint64_t inc_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream seed for repeat `index` of an experiment seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) { return seed ^ index; }

/// SplitMix64 finalizer; used to decorrelate nested (cell, repeat) indices.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace kqf
