#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "flatmcts/env.hpp"
#include "flatmcts/kernels.hpp"

namespace flatmcts {

// What to do when a (state, action) pair produces more distinct child
// states than its table column can hold: refuse, or fold the overflowing
// state into its closest existing sibling and count the event.
enum class OverflowPolicy { kFail, kClampToBestMatch };

struct SearchConfig {
  std::uint32_t num_simulations = 0;
  std::uint32_t max_depth = 0;
  UctParams uct;
  ActionSet actions;
  // state_branch_caps[l] bounds the distinct children of one action node
  // at depth l + 1; one entry per descent step.
  std::vector<std::uint32_t> state_branch_caps;
  std::uint64_t seed = 0;
  OverflowPolicy overflow_policy = OverflowPolicy::kFail;

  void validate() const {
    if (num_simulations == 0) {
      throw std::invalid_argument("config: num_simulations must be positive");
    }
    if (max_depth == 0) {
      throw std::invalid_argument("config: max_depth must be positive");
    }
    if (actions.size() == 0) {
      throw std::invalid_argument("config: empty action set");
    }
    if (state_branch_caps.size() != max_depth) {
      throw std::invalid_argument(
          "config: need one state branch cap per depth");
    }
    for (std::uint32_t cap : state_branch_caps) {
      if (cap == 0) {
        throw std::invalid_argument("config: state branch caps must be positive");
      }
    }
    if (!(uct.exploration >= 0.0)) {
      throw std::invalid_argument("config: exploration must be non-negative");
    }
  }
};

inline SearchConfig make_search_config(const EnvSpec& env,
                                       std::uint32_t num_simulations,
                                       std::uint32_t max_depth,
                                       double exploration, std::uint64_t seed,
                                       OverflowPolicy policy =
                                           OverflowPolicy::kFail) {
  SearchConfig config;
  config.num_simulations = num_simulations;
  config.max_depth = max_depth;
  config.uct.exploration = exploration;
  config.actions = env.actions;
  config.state_branch_caps.assign(max_depth, suggested_state_branch_cap(env));
  config.seed = seed;
  config.overflow_policy = policy;
  config.validate();
  return config;
}

}  // namespace flatmcts
