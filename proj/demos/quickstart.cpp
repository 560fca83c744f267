// Minimal library walkthrough: plan a few vehicle steps with the array
// search, dump the first tree, and cross-check one search against the
// linked-tree reference.

#include <cstdio>

#include "flatmcts/flatmcts.hpp"

int main() {
  using namespace flatmcts;

  const EnvSpec env = make_bug_trap_env();
  const SearchConfig config =
      make_search_config(env, /*num_simulations=*/2000, /*max_depth=*/8,
                         /*exploration=*/128.0, /*seed=*/7);

  // One search from the start state.
  const ArraySearchResult result = search(env.start, env, config);
  std::printf("root action: %u  (uniform draws used: %llu)\n",
              result.best_action,
              static_cast<unsigned long long>(result.stats.draws_consumed));
  for (std::uint32_t d = 0; d <= config.max_depth; ++d) {
    std::printf("depth %u: %u states, %u actions\n", d,
                result.store.num_states_at(d), result.store.num_actions_at(d));
  }

  // The linked-tree reference makes identical decisions from the same seed.
  const RefSearchResult ref = search_ref(env.start, env, config);
  const SnapshotDiff diff =
      compare_snapshots(snapshot(result.store), snapshot_ref(ref.tree));
  std::printf("reference tree identical: %s\n", diff.equal ? "yes" : "no");

  // Execute a short receding-horizon run on the nominal dynamics.
  StateVec state = env.start;
  for (int step_idx = 0; step_idx < 12; ++step_idx) {
    SearchConfig step_config = config;
    step_config.seed = 7 + static_cast<std::uint64_t>(step_idx);
    const ArraySearchResult plan = search(state, env, step_config);
    state = step_nominal(env, state, plan.best_action);
    std::printf("step %2d: action %u -> (%d, %d) heading %d\n", step_idx + 1,
                plan.best_action, state.coords[0], state.coords[1],
                state.coords[2]);
    if (goal_reached(env, state)) {
      std::printf("goal reached\n");
      break;
    }
  }
  return 0;
}
