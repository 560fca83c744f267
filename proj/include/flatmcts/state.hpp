#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <limits>

#include "flatmcts/kernels.hpp"

namespace flatmcts {

inline constexpr std::size_t kMaxStateDims = 4;

// Coordinate value that no discretized state can take.  Sentinel slots in
// the node arrays are filled with it so a partial-match scan can never
// mistake them for a real state.
inline constexpr std::int32_t kSentinelCoord =
    std::numeric_limits<std::int32_t>::min();

// A state after discretization: up to kMaxStateDims integer grid indexes.
// Unused trailing coordinates stay zero so whole-array comparisons are
// well defined.
struct StateVec {
  std::array<std::int32_t, kMaxStateDims> coords{};
  std::uint32_t dim = 0;

  static StateVec sentinel(std::uint32_t dim) {
    StateVec s;
    s.dim = dim;
    for (std::size_t i = 0; i < kMaxStateDims; ++i) {
      s.coords[i] = kSentinelCoord;
    }
    return s;
  }

  bool is_sentinel() const {
    return dim > 0 && coords[0] == kSentinelCoord;
  }

  friend bool operator==(const StateVec& a, const StateVec& b) {
    return a.dim == b.dim && a.coords == b.coords;
  }
};

// Number of coordinates on which the two states agree.  Both inputs must
// have the same dim; the loop trip count depends only on that dim.
inline std::uint32_t match_count(const StateVec& a, const StateVec& b) {
  FLATMCTS_DCHECK(a.dim == b.dim);
  std::uint32_t matches = 0;
  for (std::uint32_t i = 0; i < a.dim; ++i) {
    matches += static_cast<std::uint32_t>(a.coords[i] == b.coords[i]);
  }
  return matches;
}

}  // namespace flatmcts
