#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "flatmcts/array_search.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/layer_store.hpp"
#include "flatmcts/rng.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/validate.hpp"

namespace flatmcts {
namespace {

// First contact with an unvisited candidate set must expand: the chosen
// node is appended to the next layer and the child table is updated.
TEST(SelectChildAction, ExpandsWhileAnyRowIsUnvisited) {
  const EnvSpec env = make_bandit_env({0.1, 0.2, 0.3});
  const SearchConfig config = make_search_config(env, 10, 1, 1.0, 1);
  ArraySearcher searcher(env, config);
  LayerStore store = init_layers(env.start, config);

  const ActionChoice first = searcher.select_child_action(store, 0, 0, 0.0);
  EXPECT_TRUE(first.fresh);
  EXPECT_EQ(first.index, 0u);
  EXPECT_EQ(store.layers[1].num_actions, 1u);
  EXPECT_EQ(store.layers[0].child_action_at(first.row, 0), 0u);

  // A second selection with a different draw picks a different untried row.
  const ActionChoice second = searcher.select_child_action(store, 0, 0, 0.99);
  EXPECT_TRUE(second.fresh);
  EXPECT_EQ(second.index, 1u);
  EXPECT_NE(second.row, first.row);
  EXPECT_EQ(store.layers[1].num_actions, 2u);
}

// Once every row is visited the draw is discarded and the augmented value
// decides; the winning row's table entry is rewritten with its own index.
TEST(SelectChildAction, PicksGreatestAugmentedValueWhenAllVisited) {
  const EnvSpec env = make_bandit_env({0.1, 0.2});
  const SearchConfig config = make_search_config(env, 10, 1, 0.0, 1);
  ArraySearcher searcher(env, config);
  LayerStore store = init_layers(env.start, config);

  Layer& l1 = store.layers[1];
  l1.num_actions = 2;
  l1.action_visits[0] = 3;
  l1.action_values[0] = 0.4;
  l1.action_visits[1] = 2;
  l1.action_values[1] = 0.9;
  store.layers[0].child_action_at(0, 0) = 0;
  store.layers[0].child_action_at(1, 0) = 1;
  store.layers[0].state_visits[0] = 5;

  const ActionChoice pick = searcher.select_child_action(store, 0, 0, 0.17);
  EXPECT_FALSE(pick.fresh);
  EXPECT_EQ(pick.row, 1u);
  EXPECT_EQ(pick.index, 1u);
  EXPECT_EQ(l1.num_actions, 2u);  // nothing appended
}

// Routing a generated state: exact match reuses the node, a novel state
// appends one, and the mismatch of a sentinel row never counts as a match.
TEST(SelectChildState, ReusesExactMatchAndAppendsNovelStates) {
  const EnvSpec env = make_bug_trap_env();
  SearchConfig config = make_search_config(env, 10, 1, 1.0, 1);
  ArraySearcher searcher(env, config);
  LayerStore store = init_layers(env.start, config);
  store.layers[1].num_actions = 1;

  StateVec a = env.start;
  a.coords[0] = 3;
  const StateChoice first = searcher.select_child_state(store, 1, 0, a);
  EXPECT_TRUE(first.fresh);
  EXPECT_FALSE(first.clamped);
  EXPECT_EQ(store.layers[1].num_states, 1u);
  EXPECT_EQ(store.layers[1].child_state_count(0), 1u);

  const StateChoice again = searcher.select_child_state(store, 1, 0, a);
  EXPECT_FALSE(again.fresh);
  EXPECT_EQ(again.index, first.index);
  EXPECT_EQ(store.layers[1].num_states, 1u);

  StateVec b = a;
  b.coords[1] = -2;
  const StateChoice second = searcher.select_child_state(store, 1, 0, b);
  EXPECT_TRUE(second.fresh);
  EXPECT_NE(second.index, first.index);
  EXPECT_EQ(store.layers[1].child_state_count(0), 2u);
}

// A full column with no exact match either throws or folds into the
// closest sibling, depending on the configured policy.
TEST(SelectChildState, OverflowPolicyDecidesFailOrFold) {
  const EnvSpec env = make_bug_trap_env();
  SearchConfig config = make_search_config(env, 10, 1, 1.0, 1);
  config.state_branch_caps.assign(1, 1);  // room for a single child
  {
    ArraySearcher searcher(env, config);
    LayerStore store = init_layers(env.start, config);
    store.layers[1].num_actions = 1;
    StateVec a = env.start;
    a.coords[0] = 3;
    searcher.select_child_state(store, 1, 0, a);
    StateVec b = a;
    b.coords[1] = -2;
    try {
      searcher.select_child_state(store, 1, 0, b);
      FAIL() << "expected StateBranchOverflow";
    } catch (const StateBranchOverflow& e) {
      EXPECT_EQ(e.depth(), 1u);
      EXPECT_EQ(e.action_index(), 0u);
    }
  }
  {
    config.overflow_policy = OverflowPolicy::kClampToBestMatch;
    ArraySearcher searcher(env, config);
    LayerStore store = init_layers(env.start, config);
    store.layers[1].num_actions = 1;
    StateVec a = env.start;
    a.coords[0] = 3;
    const StateChoice settled = searcher.select_child_state(store, 1, 0, a);
    StateVec b = a;
    b.coords[1] = -2;
    const StateChoice folded = searcher.select_child_state(store, 1, 0, b);
    EXPECT_TRUE(folded.clamped);
    EXPECT_FALSE(folded.fresh);
    EXPECT_EQ(folded.index, settled.index);
    // The fold must not disturb the settled sibling's stored coordinates.
    EXPECT_TRUE(store.layers[1].state_nodes[settled.index] == a);
    EXPECT_EQ(store.layers[1].num_states, 1u);
    EXPECT_EQ(searcher.overflow_events(), 1u);
  }
}

// Each walk adds at most one state and one action node per layer.
TEST(SimulateOnce, GrowthIsBoundedByOneNodePerLayer) {
  const EnvSpec env = make_bug_trap_env();
  const SearchConfig config = make_search_config(env, 50, 4, 8.0, 3);
  ArraySearcher searcher(env, config);
  LayerStore store = init_layers(env.start, config);
  UniformStream rng(config.seed);
  std::vector<std::uint32_t> states(5, 0), actions(5, 0);
  states[0] = 1;
  for (std::uint32_t i = 0; i < 50; ++i) {
    searcher.simulate_once(store, rng);
    for (std::uint32_t l = 0; l <= 4; ++l) {
      EXPECT_LE(store.num_states_at(l), states[l] + 1) << "depth " << l;
      EXPECT_LE(store.num_actions_at(l), actions[l] + 1) << "depth " << l;
      states[l] = store.num_states_at(l);
      actions[l] = store.num_actions_at(l);
    }
  }
  EXPECT_EQ(rng.draws_consumed(), 50u * 2u * 4u);
}

// End-to-end runs satisfy the structural audit and the draw budget on
// every environment family.
TEST(ArraySearch, FinishedRunsPassTheStructuralAudit) {
  const EnvSpec envs[] = {make_bandit_env({0.2, 0.5, 0.9}), make_chain_env(5),
                          make_bug_trap_env()};
  for (const EnvSpec& env : envs) {
    for (std::uint64_t seed : {11ull, 12ull}) {
      const SearchConfig config = make_search_config(env, 300, 6, 2.0, seed);
      const ArraySearchResult result = search(env.start, env, config);
      const auto violations = validate_layers(result.store, config);
      EXPECT_TRUE(violations.empty())
          << "seed " << seed << ": " << violations.front();
      const auto draw_violations = validate_draw_count(result.stats, config);
      EXPECT_TRUE(draw_violations.empty());
      EXPECT_LT(result.best_action, config.actions.size());
    }
  }
}

// The clamping policy still yields an audit-clean store; only the event
// counter tells the runs apart.
TEST(ArraySearch, ClampedRunsStayAuditClean) {
  const EnvSpec env = make_bug_trap_env();
  SearchConfig config =
      make_search_config(env, 400, 6, 8.0, 21, OverflowPolicy::kClampToBestMatch);
  config.state_branch_caps.assign(6, 2);  // far below the honest bound
  const ArraySearchResult result = search(env.start, env, config);
  EXPECT_GT(result.stats.overflow_events, 0u);
  const auto violations = validate_layers(result.store, config);
  EXPECT_TRUE(violations.empty()) << violations.front();
  const auto draw_violations = validate_draw_count(result.stats, config);
  EXPECT_TRUE(draw_violations.empty());
}

// With tight caps and the failing policy the overflow surfaces as the
// dedicated exception type.
TEST(ArraySearch, FailPolicySurfacesOverflow) {
  const EnvSpec env = make_bug_trap_env();
  SearchConfig config = make_search_config(env, 400, 6, 8.0, 21);
  config.state_branch_caps.assign(6, 1);
  EXPECT_THROW(search(env.start, env, config), StateBranchOverflow);
}

TEST(BestRootAction, PrefersGreatestMeanAndBreaksTiesLow) {
  const EnvSpec env = make_bandit_env({0.1, 0.2, 0.3});
  const SearchConfig config = make_search_config(env, 10, 1, 1.0, 1);
  ArraySearcher searcher(env, config);
  LayerStore store = init_layers(env.start, config);
  Layer& l1 = store.layers[1];
  l1.num_actions = 3;
  store.layers[0].child_action_at(0, 0) = 0;
  store.layers[0].child_action_at(1, 0) = 1;
  store.layers[0].child_action_at(2, 0) = 2;
  l1.action_visits[0] = 4;
  l1.action_values[0] = 0.7;
  l1.action_visits[1] = 4;
  l1.action_values[1] = 0.7;
  l1.action_visits[2] = 2;
  l1.action_values[2] = 0.1;
  EXPECT_EQ(searcher.best_root_action(store), 0u);

  l1.action_values[1] = 0.71;
  EXPECT_EQ(searcher.best_root_action(store), 1u);

  // Unvisited rows are skipped even if their table entry was written.
  l1.action_visits[1] = 0;
  EXPECT_EQ(searcher.best_root_action(store), 0u);
}

TEST(BestRootAction, ThrowsWithNoRealizedChildren) {
  const EnvSpec env = make_bandit_env({0.1, 0.2});
  const SearchConfig config = make_search_config(env, 10, 1, 1.0, 1);
  ArraySearcher searcher(env, config);
  const LayerStore store = init_layers(env.start, config);
  EXPECT_THROW(searcher.best_root_action(store), std::logic_error);
}

// The trajectory log carries enough to reconstruct every value in the
// store: an action node's stored mean must equal the batch mean of the
// cumulative rewards credited to it across simulations.
TEST(TrajectoryLog, ReplayedBatchMeansMatchStoredValues) {
  const EnvSpec env = make_chain_env(4);
  const SearchConfig config = make_search_config(env, 200, 4, 1.5, 5);
  TrajectoryLog log;
  const ArraySearchResult result = search(env.start, env, config, &log);
  ASSERT_EQ(log.size(), 200u);

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<double, int>>
      credited;
  for (const auto& walk : log) {
    ASSERT_EQ(walk.size(), 4u);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < walk.size(); ++i) {
      // Entries run from the deepest layer back to depth one.
      EXPECT_EQ(walk[i].depth, 4u - i);
      cumulative += walk[i].reward;
      auto& cell = credited[{walk[i].depth, walk[i].action_index}];
      cell.first += cumulative;
      cell.second += 1;
    }
  }
  for (const auto& [key, sum_count] : credited) {
    const auto [depth, action_idx] = key;
    const Layer& layer = result.store.layers[depth];
    const double batch_mean = sum_count.first / sum_count.second;
    EXPECT_EQ(layer.action_visits[action_idx],
              static_cast<std::uint32_t>(sum_count.second));
    EXPECT_NEAR(layer.action_values[action_idx], batch_mean,
                1e-9 * std::max(1.0, std::fabs(batch_mean)));
  }
}

// Repeating a seed reproduces the identical tree; changing it does not.
TEST(ArraySearch, SeedsAreReproducibleAndDistinct) {
  const EnvSpec env = make_bug_trap_env();
  const SearchConfig config = make_search_config(env, 150, 5, 8.0, 77);
  const std::string first = snapshot(search(env.start, env, config).store).to_text();
  const std::string second = snapshot(search(env.start, env, config).store).to_text();
  EXPECT_EQ(first, second);

  SearchConfig other = config;
  other.seed = 78;
  const std::string third = snapshot(search(env.start, env, other).store).to_text();
  EXPECT_NE(first, third);
}

}  // namespace
}  // namespace flatmcts
