#pragma once

#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <type_traits>

// Small selection and accumulation kernels used on the search hot path.
// Every function here runs a fixed instruction sequence for a given input
// size: no data-dependent branches, no early exits.  Argument checks that
// guard against caller bugs throw instead; those branches are never taken
// in a correct program and predict perfectly.

namespace flatmcts {

#if defined(NDEBUG)
#define FLATMCTS_DCHECK(cond) ((void)0)
#else
#define FLATMCTS_DCHECK(cond) assert(cond)
#endif

// Value assigned to a child that has never been visited.  Large enough to
// dominate any finite exploitation + exploration sum, small enough that
// multiplying by a mask bit or adding a finite term cannot overflow.
inline constexpr double kUnvisitedUctValue =
    std::numeric_limits<double>::max() * 0x1p-10;

// a if cond else b, computed arithmetically.
inline constexpr std::int8_t select_arith(std::int8_t a, std::int8_t b,
                                          bool cond) noexcept {
  return static_cast<std::int8_t>(a * static_cast<std::int8_t>(cond) +
                                  b * static_cast<std::int8_t>(!cond));
}

// a if cond else b, computed with a widened bit mask.  The mask starts as
// the condition bit and is smeared across all eight bits by shift-or
// doubling, so the blend is two ANDs and an OR.
inline constexpr std::int8_t select_mask(std::int8_t a, std::int8_t b,
                                         bool cond) noexcept {
  std::uint8_t m = static_cast<std::uint8_t>(cond);
  m |= static_cast<std::uint8_t>(m << 1);
  m |= static_cast<std::uint8_t>(m << 2);
  m |= static_cast<std::uint8_t>(m << 4);
  return static_cast<std::int8_t>(
      (static_cast<std::uint8_t>(a) & m) |
      (static_cast<std::uint8_t>(b) & static_cast<std::uint8_t>(~m)));
}

// Generic select for index and value types on the search path.  Integers
// use the multiply form; floating-point values go through a full-width bit
// blend so that infinities and other special payloads pass through intact
// (a multiply form would turn inf * 0 into NaN).
template <class T>
constexpr T select(T on_true, T on_false, bool cond) noexcept {
  if constexpr (std::is_floating_point_v<T>) {
    using Bits =
        std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const Bits mask = static_cast<Bits>(0) - static_cast<Bits>(cond);
    return std::bit_cast<T>((std::bit_cast<Bits>(on_true) & mask) |
                            (std::bit_cast<Bits>(on_false) & ~mask));
  } else {
    return on_true * static_cast<T>(cond) + on_false * static_cast<T>(!cond);
  }
}

struct UctParams {
  double exploration = 1.0;
};

// Augmented value of one child: mean value plus the exploration bonus
// c * sqrt(log(parent_visits) / child_visits).  An unvisited child gets
// kUnvisitedUctValue regardless of c.  parent_visits must be positive.
inline double uct_value(double child_value, std::uint32_t child_visits,
                        std::uint32_t parent_visits, UctParams params) {
  if (parent_visits == 0) {
    throw std::invalid_argument("uct_value: parent_visits must be positive");
  }
  const bool visited = child_visits != 0;
  // With child_visits forced to 1 when unvisited the quotient stays finite
  // and the final select can discard it without producing a NaN.
  const double denom =
      static_cast<double>(child_visits + static_cast<std::uint32_t>(!visited));
  const double bonus =
      params.exploration *
      std::sqrt(std::log(static_cast<double>(parent_visits)) / denom);
  return select(child_value + bonus, kUnvisitedUctValue, visited);
}

// Vector form used during child selection.  Unlike the scalar entry point
// this tolerates parent_visits == 0 (first simulation through a node); the
// log argument is nudged to 1 so the discarded lane stays finite.
inline void uct_values(std::span<const double> values,
                       std::span<const std::uint32_t> visits,
                       std::uint32_t parent_visits, UctParams params,
                       std::span<double> out) {
  FLATMCTS_DCHECK(values.size() == visits.size());
  FLATMCTS_DCHECK(out.size() == values.size());
  const double log_parent = std::log(static_cast<double>(
      parent_visits + static_cast<std::uint32_t>(parent_visits == 0)));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const bool visited = visits[i] != 0;
    const double denom = static_cast<double>(
        visits[i] + static_cast<std::uint32_t>(!visited));
    const double bonus = params.exploration * std::sqrt(log_parent / denom);
    out[i] = select(values[i] + bonus, kUnvisitedUctValue, visited);
  }
}

// Index of the greatest element; ties resolve to the lowest index.  The
// whole span is scanned with a pair of selects per element.
template <class T>
std::size_t max_index(std::span<const T> xs) {
  if (xs.empty()) {
    throw std::invalid_argument("max_index: empty input");
  }
  std::size_t best = 0;
  T best_value = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const bool better = xs[i] > best_value;
    best = select(i, best, better);
    best_value = select(xs[i], best_value, better);
  }
  return best;
}

// True when at least one visit count is zero.  OR-accumulates over the
// full span instead of returning at the first hit.
inline bool any_unvisited(std::span<const std::uint32_t> visits) {
  std::uint32_t acc = 0;
  for (std::uint32_t v : visits) {
    acc |= static_cast<std::uint32_t>(v == 0);
  }
  return acc != 0;
}

// Picks uniformly among the zero entries of visits, driven by one uniform
// draw in [0, 1).  Two fixed-length passes: count the zeros, then walk a
// running prefix count and keep the position where it passes the target.
// With no zero entry the result is 0 and must be discarded by the caller.
inline std::size_t random_untried(std::span<const std::uint32_t> visits,
                                  double draw) {
  if (visits.empty()) {
    throw std::invalid_argument("random_untried: empty input");
  }
  if (!(draw >= 0.0 && draw < 1.0)) {
    throw std::invalid_argument("random_untried: draw outside [0, 1)");
  }
  std::size_t zeros = 0;
  for (std::uint32_t v : visits) {
    zeros += static_cast<std::size_t>(v == 0);
  }
  // floor(draw * zeros) can land on zeros itself when draw rounds up, so
  // the target is clamped to the last zero.
  const std::size_t scaled =
      static_cast<std::size_t>(draw * static_cast<double>(zeros));
  const std::size_t target = select(zeros - 1, scaled, scaled >= zeros && zeros > 0);
  std::size_t seen = 0;
  std::size_t found = 0;
  for (std::size_t i = 0; i < visits.size(); ++i) {
    const bool is_zero = visits[i] == 0;
    const bool hit = is_zero && seen == target;
    found = select(i, found, hit);
    seen += static_cast<std::size_t>(is_zero);
  }
  return found;
}

// Running mean update: mean_k = mean_{k-1} + (sample - mean_{k-1}) / k.
inline double incremental_mean(double old_mean, double sample,
                               std::uint64_t new_count) {
  if (new_count == 0) {
    throw std::invalid_argument("incremental_mean: count must be positive");
  }
  return old_mean + (sample - old_mean) / static_cast<double>(new_count);
}

}  // namespace flatmcts
