#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flatmcts/state.hpp"

// Desk-scale test environments.  All of them expose the same functional
// surface: a pure transition (state, action row, one noise draw) -> state,
// a pure reward(state), and a discretizer from continuous coordinates to
// integer grid indexes.  Nothing here keeps internal state, so a search
// can replay any transition from its logged draws.

namespace flatmcts {

enum class EnvFamily { kVehicle, kChain, kBandit };

// Axis-aligned rectangle, closed on both ends.
struct Rect {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

  bool contains(double x, double y) const {
    return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
  }
};

struct Goal {
  double x = 0, y = 0;
  double radius = 0;
};

// One action row: interpretation depends on the family.
//   vehicle: {move length in world units, heading increment in quarter turns}
//   chain:   {signed step}
//   bandit:  {arm index}
using Action = std::vector<double>;

struct ActionSet {
  std::vector<Action> rows;
  std::uint32_t size() const { return static_cast<std::uint32_t>(rows.size()); }
};

struct EnvSpec {
  EnvFamily family = EnvFamily::kVehicle;
  std::uint32_t dim = 0;
  ActionSet actions;
  double grid_resolution = 1.0;
  double noise_scale = 0.0;
  std::vector<Rect> obstacles;
  Goal goal;
  double obstacle_penalty = 0.0;
  StateVec start;
  std::uint32_t horizon_hint = 1;
  // chain: reward per grid cell, index x + chain_length.
  // bandit: reward of arm k, paid in the state reached by pulling k.
  std::vector<double> reward_table;
  std::int32_t chain_length = 0;
};

// The four vehicle headings, in quarter turns counterclockwise from +x.
inline constexpr std::int32_t kHeadingCount = 4;
inline constexpr std::array<std::int32_t, 4> kHeadingDx = {1, 0, -1, 0};
inline constexpr std::array<std::int32_t, 4> kHeadingDy = {0, 1, 0, -1};

// Planar noise is drawn from a 16-point quantile table: 8 compass
// directions at radius 0.35 and the same 8 at radius 1.05, all scaled by
// noise_scale.  The table is symmetric, so the noise is zero mean, and it
// is bounded, so a single transition can move the vehicle off its nominal
// cell by at most one or two cells at the default resolution.  A uniform
// draw in [0, 1) selects the entry floor(draw * 16).
inline constexpr double kNoiseDiagShort = 0.24748737341529164;  // 0.35 / sqrt(2)
inline constexpr double kNoiseDiagLong = 0.74246212024587499;   // 1.05 / sqrt(2)
inline constexpr std::array<std::array<double, 2>, 16> kNoiseQuantiles = {{
    {0.35, 0.0},
    {kNoiseDiagShort, kNoiseDiagShort},
    {0.0, 0.35},
    {-kNoiseDiagShort, kNoiseDiagShort},
    {-0.35, 0.0},
    {-kNoiseDiagShort, -kNoiseDiagShort},
    {0.0, -0.35},
    {kNoiseDiagShort, -kNoiseDiagShort},
    {1.05, 0.0},
    {kNoiseDiagLong, kNoiseDiagLong},
    {0.0, 1.05},
    {-kNoiseDiagLong, kNoiseDiagLong},
    {-1.05, 0.0},
    {-kNoiseDiagLong, -kNoiseDiagLong},
    {0.0, -1.05},
    {kNoiseDiagLong, -kNoiseDiagLong},
}};

// Continuous coordinates -> integer grid indexes (round half away from
// zero).  Throws on non-finite input or cells outside the int32 range.
inline StateVec discretize(const EnvSpec& env, std::span<const double> point) {
  if (point.size() != env.dim || env.dim == 0 || env.dim > kMaxStateDims) {
    throw std::invalid_argument("discretize: dimension mismatch");
  }
  StateVec out;
  out.dim = env.dim;
  for (std::uint32_t i = 0; i < env.dim; ++i) {
    if (!std::isfinite(point[i])) {
      throw std::invalid_argument("discretize: non-finite coordinate");
    }
    const double cell = point[i] / env.grid_resolution;
    if (cell <= static_cast<double>(kSentinelCoord) ||
        cell >= static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
      throw std::invalid_argument("discretize: coordinate outside grid range");
    }
    out.coords[i] = static_cast<std::int32_t>(std::llround(cell));
  }
  return out;
}

inline std::int32_t wrap_heading(std::int32_t theta) {
  std::int32_t w = theta % kHeadingCount;
  return w + select<std::int32_t>(kHeadingCount, 0, w < 0);
}

namespace detail {

inline void check_action(const EnvSpec& env, std::uint32_t action_row) {
  if (action_row >= env.actions.size()) {
    throw std::invalid_argument("step: action row out of range");
  }
}

inline StateVec vehicle_step(const EnvSpec& env, const StateVec& state,
                             std::uint32_t action_row, double noise_draw) {
  const Action& a = env.actions.rows[action_row];
  const std::int32_t turn = static_cast<std::int32_t>(std::llround(a[1]));
  const std::int32_t heading = wrap_heading(state.coords[2] + turn);
  // Turn first, then translate along the new heading, then add noise.
  const double move = a[0];
  std::size_t q = static_cast<std::size_t>(
      noise_draw * static_cast<double>(kNoiseQuantiles.size()));
  q = select(kNoiseQuantiles.size() - 1, q, q >= kNoiseQuantiles.size());
  const double nx = kNoiseQuantiles[q][0] * env.noise_scale;
  const double ny = kNoiseQuantiles[q][1] * env.noise_scale;
  const double x = static_cast<double>(state.coords[0]) * env.grid_resolution +
                   move * static_cast<double>(kHeadingDx[heading]) + nx;
  const double y = static_cast<double>(state.coords[1]) * env.grid_resolution +
                   move * static_cast<double>(kHeadingDy[heading]) + ny;
  const std::array<double, 3> next = {x, y, static_cast<double>(heading)};
  return discretize(env, next);
}

inline StateVec chain_step(const EnvSpec& env, const StateVec& state,
                           std::uint32_t action_row) {
  const std::int32_t delta = static_cast<std::int32_t>(
      std::llround(env.actions.rows[action_row][0]));
  std::int32_t x = state.coords[0] + delta;
  x = select(env.chain_length, x, x > env.chain_length);
  x = select(-env.chain_length, x, x < -env.chain_length);
  StateVec out;
  out.dim = 1;
  out.coords[0] = x;
  return out;
}

inline StateVec bandit_step(const EnvSpec& env, std::uint32_t action_row) {
  // Pulling arm k lands in the arm's terminal cell k + 1; cell 0 is the
  // root.  Further pulls from a terminal cell stay within the arm states.
  const std::int32_t arm = static_cast<std::int32_t>(
      std::llround(env.actions.rows[action_row][0]));
  StateVec out;
  out.dim = 1;
  out.coords[0] = arm + 1;
  return out;
}

}  // namespace detail

// One noisy transition.  noise_draw is a uniform in [0, 1); families
// without noise ignore it but still require it, so every caller consumes
// draws on the same schedule.
inline StateVec step(const EnvSpec& env, const StateVec& state,
                     std::uint32_t action_row, double noise_draw) {
  detail::check_action(env, action_row);
  if (!(noise_draw >= 0.0 && noise_draw < 1.0)) {
    throw std::invalid_argument("step: noise draw outside [0, 1)");
  }
  switch (env.family) {
    case EnvFamily::kVehicle:
      return detail::vehicle_step(env, state, action_row, noise_draw);
    case EnvFamily::kChain:
      return detail::chain_step(env, state, action_row);
    case EnvFamily::kBandit:
      return detail::bandit_step(env, action_row);
  }
  throw std::logic_error("step: unknown family");
}

// The same transition with the noise forced to zero.  Used when a plan is
// executed: the search models disturbances, the executed trajectory takes
// the nominal dynamics.
inline StateVec step_nominal(const EnvSpec& env, const StateVec& state,
                             std::uint32_t action_row) {
  detail::check_action(env, action_row);
  if (env.family != EnvFamily::kVehicle) {
    return step(env, state, action_row, 0.0);
  }
  EnvSpec quiet = env;
  quiet.noise_scale = 0.0;
  return detail::vehicle_step(quiet, state, action_row, 0.0);
}

inline bool in_obstacle(const EnvSpec& env, const StateVec& state) {
  const double x = static_cast<double>(state.coords[0]) * env.grid_resolution;
  const double y = static_cast<double>(state.coords[1]) * env.grid_resolution;
  bool inside = false;
  for (const Rect& r : env.obstacles) {
    inside = inside || r.contains(x, y);
  }
  return inside;
}

inline bool goal_reached(const EnvSpec& env, const StateVec& state) {
  const double x = static_cast<double>(state.coords[0]) * env.grid_resolution;
  const double y = static_cast<double>(state.coords[1]) * env.grid_resolution;
  const double dx = x - env.goal.x;
  const double dy = y - env.goal.y;
  return std::sqrt(dx * dx + dy * dy) <= env.goal.radius;
}

// Reward of being in a state.  Vehicle: negative distance to the goal
// center, plus the (negative) obstacle penalty when inside an obstacle.
// Chain and bandit: table lookup.
inline double reward(const EnvSpec& env, const StateVec& state) {
  switch (env.family) {
    case EnvFamily::kVehicle: {
      const double x =
          static_cast<double>(state.coords[0]) * env.grid_resolution;
      const double y =
          static_cast<double>(state.coords[1]) * env.grid_resolution;
      const double dx = x - env.goal.x;
      const double dy = y - env.goal.y;
      const double dist = std::sqrt(dx * dx + dy * dy);
      return -dist +
             env.obstacle_penalty * static_cast<double>(in_obstacle(env, state));
    }
    case EnvFamily::kChain: {
      const std::int64_t idx =
          static_cast<std::int64_t>(state.coords[0]) + env.chain_length;
      if (idx < 0 || idx >= static_cast<std::int64_t>(env.reward_table.size())) {
        return 0.0;
      }
      return env.reward_table[static_cast<std::size_t>(idx)];
    }
    case EnvFamily::kBandit: {
      const std::int32_t cell = state.coords[0];
      if (cell >= 1 &&
          cell <= static_cast<std::int32_t>(env.reward_table.size())) {
        return env.reward_table[static_cast<std::size_t>(cell - 1)];
      }
      return 0.0;
    }
  }
  throw std::logic_error("reward: unknown family");
}

// Upper bound on distinct child states one (state, action) pair can reach,
// used to size the per-layer child tables.  For the vehicle this is found
// by pushing every noise table entry through every (action, heading)
// combination and counting distinct cells; base cells on both sides of
// zero are tried because rounding away from zero is not shift invariant
// at exact half-cell boundaries.  At the default resolution the 16 noise
// points collapse onto 9 cells.
inline std::uint32_t suggested_state_branch_cap(const EnvSpec& env) {
  switch (env.family) {
    case EnvFamily::kVehicle: {
      std::uint32_t worst = 1;
      for (const Action& a : env.actions.rows) {
        for (std::int32_t h = 0; h < kHeadingCount; ++h) {
          for (std::int64_t base : {std::int64_t{0}, std::int64_t{-1000003}}) {
            std::vector<std::pair<std::int64_t, std::int64_t>> cells;
            for (const auto& q : kNoiseQuantiles) {
              const double x = static_cast<double>(base) * env.grid_resolution +
                               a[0] * static_cast<double>(kHeadingDx[h]) +
                               q[0] * env.noise_scale;
              const double y = static_cast<double>(base) * env.grid_resolution +
                               a[0] * static_cast<double>(kHeadingDy[h]) +
                               q[1] * env.noise_scale;
              const std::pair<std::int64_t, std::int64_t> cell{
                  std::llround(x / env.grid_resolution),
                  std::llround(y / env.grid_resolution)};
              if (std::find(cells.begin(), cells.end(), cell) == cells.end()) {
                cells.push_back(cell);
              }
            }
            worst = std::max(worst, static_cast<std::uint32_t>(cells.size()));
          }
        }
      }
      return worst;
    }
    case EnvFamily::kChain:
    case EnvFamily::kBandit:
      return 1;
  }
  throw std::logic_error("suggested_state_branch_cap: unknown family");
}

inline void validate_env(const EnvSpec& env) {
  if (env.dim == 0 || env.dim > kMaxStateDims) {
    throw std::invalid_argument("env: dim must be in [1, 4]");
  }
  if (env.actions.size() == 0) {
    throw std::invalid_argument("env: action set is empty");
  }
  if (!(env.grid_resolution > 0.0)) {
    throw std::invalid_argument("env: grid_resolution must be positive");
  }
  if (env.noise_scale < 0.0) {
    throw std::invalid_argument("env: noise_scale must be non-negative");
  }
  if (env.family == EnvFamily::kVehicle) {
    if (env.dim != 3) {
      throw std::invalid_argument("env: vehicle state is (x, y, heading)");
    }
    for (const Action& a : env.actions.rows) {
      if (a.size() != 2) {
        throw std::invalid_argument(
            "env: vehicle action rows are {move, turn}");
      }
    }
    for (const Rect& r : env.obstacles) {
      if (r.min_x > r.max_x || r.min_y > r.max_y) {
        throw std::invalid_argument("env: malformed obstacle rectangle");
      }
      if (r.contains(env.goal.x, env.goal.y)) {
        throw std::invalid_argument("env: goal center inside an obstacle");
      }
    }
    if (!(env.goal.radius > 0.0)) {
      throw std::invalid_argument("env: goal radius must be positive");
    }
    if (env.obstacle_penalty > 0.0) {
      throw std::invalid_argument("env: obstacle penalty must not be positive");
    }
    if (in_obstacle(env, env.start)) {
      throw std::invalid_argument("env: start state inside an obstacle");
    }
  }
}

// Vehicle in a bug trap: a U of three wall rectangles opens to the west,
// the start sits inside, the goal sits outside past the top arm.  Greedy
// distance descent pushes straight into the east wall; the planner has to
// back out west and go around.  Default horizon 8 covers the escape with
// slack.
struct BugTrapParams {
  double grid_resolution = 1.0;
  double noise_scale = 0.6;
  double obstacle_penalty = -50.0;
};

inline EnvSpec make_bug_trap_env(const BugTrapParams& params = {}) {
  EnvSpec env;
  env.family = EnvFamily::kVehicle;
  env.dim = 3;
  env.actions.rows = {
      {1.0, 0.0},   // forward
      {1.0, 1.0},   // turn left, forward
      {1.0, -1.0},  // turn right, forward
      {0.0, 0.0},   // stay
  };
  env.grid_resolution = params.grid_resolution;
  env.noise_scale = params.noise_scale;
  env.obstacles = {
      {-0.5, 1.5, 1.5, 2.5},    // top arm
      {-0.5, -2.5, 1.5, -1.5},  // bottom arm
      {0.5, -1.5, 1.5, 1.5},    // east wall
  };
  env.goal = {2.5, 3.5, 1.2};
  env.obstacle_penalty = params.obstacle_penalty;
  env.start.dim = 3;
  env.start.coords = {0, 0, 0, 0};  // at the origin, facing east
  env.horizon_hint = 8;
  validate_env(env);
  return env;
}

inline EnvSpec make_chain_env(std::int32_t length) {
  if (length <= 0) {
    throw std::invalid_argument("chain: length must be positive");
  }
  EnvSpec env;
  env.family = EnvFamily::kChain;
  env.dim = 1;
  env.actions.rows = {{-1.0}, {1.0}};
  env.grid_resolution = 1.0;
  env.noise_scale = 0.0;
  env.chain_length = length;
  env.reward_table.assign(static_cast<std::size_t>(2 * length + 1), 0.0);
  env.reward_table.back() = 1.0;  // only the +length end pays
  env.start.dim = 1;
  env.start.coords = {0, 0, 0, 0};
  env.horizon_hint = static_cast<std::uint32_t>(length);
  validate_env(env);
  return env;
}

inline EnvSpec make_bandit_env(const std::vector<double>& arm_rewards) {
  if (arm_rewards.empty()) {
    throw std::invalid_argument("bandit: needs at least one arm");
  }
  EnvSpec env;
  env.family = EnvFamily::kBandit;
  env.dim = 1;
  for (std::size_t k = 0; k < arm_rewards.size(); ++k) {
    env.actions.rows.push_back({static_cast<double>(k)});
  }
  env.grid_resolution = 1.0;
  env.noise_scale = 0.0;
  env.reward_table = arm_rewards;
  env.start.dim = 1;
  env.start.coords = {0, 0, 0, 0};
  env.horizon_hint = 1;
  validate_env(env);
  return env;
}

}  // namespace flatmcts
