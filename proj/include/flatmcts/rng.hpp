#pragma once

#include <cstdint>
#include <random>

namespace flatmcts {

// Deterministic stream of uniforms in [0, 1).  All search implementations
// draw from this class in the same order, which is what makes their trees
// comparable node for node: same seed, same draws, same decisions.
//
// The 64-bit engine output is mapped to a double by keeping the top 53
// bits, so every value is an exact multiple of 2^-53 in [0, 1).
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    ++draws_;
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t draws_consumed() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace flatmcts
