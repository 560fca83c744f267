#include <gtest/gtest.h>

#include <cstdint>
#include <string>

#include "flatmcts/array_search.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/tree_search.hpp"

namespace flatmcts {
namespace {

TEST(RefSearch, RootAccountsForEverySimulation) {
  const EnvSpec env = make_chain_env(5);
  const SearchConfig config = make_search_config(env, 250, 4, 1.0, 9);
  const RefSearchResult result = search_ref(env.start, env, config);
  EXPECT_EQ(result.tree.root->visits, 250u);
  // Root child action visits sum back to the simulation count.
  std::uint64_t sum = 0;
  for (const auto& [row, child] : result.tree.root->children) {
    sum += child->visits;
  }
  EXPECT_EQ(sum, 250u);
  EXPECT_EQ(result.stats.draws_consumed, 250u * 2u * 4u);
  EXPECT_LT(result.best_action, config.actions.size());
}

TEST(RefSearch, RegistriesHoldCreationRanks) {
  const EnvSpec env = make_bug_trap_env();
  const SearchConfig config = make_search_config(env, 120, 3, 8.0, 4);
  const RefSearchResult result = search_ref(env.start, env, config);
  const RefTree& tree = result.tree;
  ASSERT_EQ(tree.states_by_depth.size(), 4u);
  for (std::uint32_t d = 0; d <= 3; ++d) {
    for (std::uint32_t i = 0; i < tree.states_by_depth[d].size(); ++i) {
      EXPECT_EQ(tree.states_by_depth[d][i]->id, i) << "depth " << d;
    }
    for (std::uint32_t i = 0; i < tree.actions_by_depth[d].size(); ++i) {
      EXPECT_EQ(tree.actions_by_depth[d][i]->id, i) << "depth " << d;
    }
  }
  EXPECT_EQ(tree.states_by_depth[0].size(), 1u);
  EXPECT_EQ(tree.actions_by_depth[0].size(), 0u);
}

TEST(RefStateNodeApi, ChildForRowFindsOnlyExistingRows) {
  const EnvSpec env = make_bandit_env({0.2, 0.5, 0.9});
  const SearchConfig config = make_search_config(env, 50, 1, 1.0, 2);
  const RefSearchResult result = search_ref(env.start, env, config);
  const RefStateNode& root = *result.tree.root;
  ASSERT_EQ(root.children.size(), 3u);
  for (const auto& [row, child] : root.children) {
    EXPECT_EQ(root.child_for_row(row), child.get());
  }
  EXPECT_EQ(root.child_for_row(17), nullptr);
}

// The linked tree and the array store describe the same search, so their
// canonical dumps must agree byte for byte.
TEST(RefSearch, DumpsMatchTheArraySearchExactly) {
  const EnvSpec envs[] = {make_bandit_env({0.2, 0.5, 0.9}), make_chain_env(5),
                          make_bug_trap_env()};
  for (const EnvSpec& env : envs) {
    const SearchConfig config = make_search_config(env, 180, 4, 1.0, 31);
    const std::string ref_text =
        snapshot_ref(search_ref(env.start, env, config).tree).to_text();
    const std::string array_text =
        snapshot(search(env.start, env, config).store).to_text();
    EXPECT_EQ(ref_text, array_text);
  }
}

TEST(RefSearch, AgreesOnBestActionAcrossSeeds) {
  const EnvSpec env = make_bug_trap_env();
  for (std::uint64_t seed = 60; seed < 66; ++seed) {
    const SearchConfig config = make_search_config(env, 200, 5, 8.0, seed);
    const RefSearchResult ref = search_ref(env.start, env, config);
    const ArraySearchResult arr = search(env.start, env, config);
    EXPECT_EQ(ref.best_action, arr.best_action) << "seed " << seed;
  }
}

// Clamping folds the overflowing walk into the closest sibling in both
// implementations, so even degenerate caps keep the dumps identical.
TEST(RefSearch, ClampPolicyMatchesArrayBehavior) {
  const EnvSpec env = make_bug_trap_env();
  SearchConfig config =
      make_search_config(env, 300, 5, 8.0, 13, OverflowPolicy::kClampToBestMatch);
  config.state_branch_caps.assign(5, 2);
  const RefSearchResult ref = search_ref(env.start, env, config);
  const ArraySearchResult arr = search(env.start, env, config);
  EXPECT_GT(ref.stats.overflow_events, 0u);
  EXPECT_EQ(ref.stats.overflow_events, arr.stats.overflow_events);
  EXPECT_EQ(snapshot_ref(ref.tree).to_text(), snapshot(arr.store).to_text());
  EXPECT_EQ(ref.best_action, arr.best_action);
}

TEST(RefSearch, FailPolicySurfacesOverflowLikeTheArray) {
  const EnvSpec env = make_bug_trap_env();
  SearchConfig config = make_search_config(env, 300, 5, 8.0, 13);
  config.state_branch_caps.assign(5, 1);
  EXPECT_THROW(search_ref(env.start, env, config), StateBranchOverflow);
}

}  // namespace
}  // namespace flatmcts
