#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flatmcts/array_search.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/kernels.hpp"
#include "flatmcts/rng.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/snapshot.hpp"

// Reference UCT implementation over a conventional pointer-linked tree,
// one heap allocation per node.  It draws from the same uniform stream on
// the same schedule and funnels every decision through the same selection
// kernels as the array searcher, so both walk identical trees; what
// differs is purely how nodes are stored and found.  This is the baseline
// the array layout is measured against, and the oracle it is checked
// against.

namespace flatmcts {

struct RefActionNode;

struct RefStateNode {
  StateVec state;
  std::uint32_t visits = 0;
  std::uint32_t id = 0;  // creation rank within this node's depth
  // Action children in creation order, keyed by action set row.
  std::vector<std::pair<std::uint32_t, std::unique_ptr<RefActionNode>>> children;

  RefActionNode* child_for_row(std::uint32_t row) const {
    for (const auto& [r, node] : children) {
      if (r == row) {
        return node.get();
      }
    }
    return nullptr;
  }
};

struct RefActionNode {
  double value = 0.0;
  std::uint32_t visits = 0;
  std::uint32_t id = 0;
  std::uint32_t parent_state_id = 0;
  // State children in creation order.
  std::vector<std::unique_ptr<RefStateNode>> children;
};

struct RefTree {
  std::unique_ptr<RefStateNode> root;
  // Non-owning creation-order registries, one list per depth, for dumps
  // and inspection.
  std::vector<std::vector<RefActionNode*>> actions_by_depth;
  std::vector<std::vector<RefStateNode*>> states_by_depth;
};

struct RefSearchResult {
  std::uint32_t best_action = 0;
  RefTree tree;
  SearchStats stats;
};

class RefSearcher {
 public:
  RefSearcher(const EnvSpec& env, const SearchConfig& config)
      : env_(env), config_(config) {
    config.validate();
    const std::uint32_t rows = config.actions.size();
    child_values_.resize(rows);
    child_visits_.resize(rows);
    uct_.resize(rows);
    std::uint32_t max_cap = 0;
    for (std::uint32_t cap : config.state_branch_caps) {
      max_cap = std::max(max_cap, cap);
    }
    match_counts_.resize(max_cap);
  }

  RefSearchResult run(const StateVec& root_state) {
    RefSearchResult result;
    result.tree.root = std::make_unique<RefStateNode>();
    result.tree.root->state = root_state;
    result.tree.actions_by_depth.resize(config_.max_depth + 1);
    result.tree.states_by_depth.resize(config_.max_depth + 1);
    result.tree.states_by_depth[0].push_back(result.tree.root.get());
    overflow_events_ = 0;

    UniformStream rng(config_.seed);
    path_.resize(config_.max_depth + 1);
    for (std::uint32_t i = 0; i < config_.num_simulations; ++i) {
      simulate_once(result.tree, rng);
    }
    result.best_action = best_root_action(*result.tree.root);
    result.stats.draws_consumed = rng.draws_consumed();
    result.stats.overflow_events = overflow_events_;
    return result;
  }

 private:
  struct PathStep {
    RefStateNode* state = nullptr;
    RefActionNode* action = nullptr;  // action taken FROM this state
  };

  // Same decision procedure as the array searcher: gather per-row stats
  // (absent children read as zero), run the selection kernels, and only
  // then touch the tree.
  std::pair<std::uint32_t, RefActionNode*> select_child_action(
      RefTree& tree, RefStateNode* state, std::uint32_t depth, double draw) {
    const std::uint32_t rows = config_.actions.size();
    for (std::uint32_t a = 0; a < rows; ++a) {
      const RefActionNode* child = state->child_for_row(a);
      child_values_[a] = child ? child->value : 0.0;
      child_visits_[a] = child ? child->visits : 0;
    }
    const bool expand = any_unvisited(child_visits_);
    uct_values(child_values_, child_visits_, state->visits, config_.uct, uct_);
    const std::size_t best = max_index<double>(uct_);
    const std::size_t untried = random_untried(child_visits_, draw);
    const auto row = static_cast<std::uint32_t>(select(untried, best, expand));

    RefActionNode* chosen = state->child_for_row(row);
    if (expand) {
      auto fresh = std::make_unique<RefActionNode>();
      fresh->id = static_cast<std::uint32_t>(
          tree.actions_by_depth[depth + 1].size());
      fresh->parent_state_id = state->id;
      chosen = fresh.get();
      tree.actions_by_depth[depth + 1].push_back(chosen);
      state->children.emplace_back(row, std::move(fresh));
    }
    return {row, chosen};
  }

  RefStateNode* select_child_state(RefTree& tree, RefActionNode* action,
                                   std::uint32_t depth,
                                   const StateVec& generated) {
    const std::uint32_t filled =
        static_cast<std::uint32_t>(action->children.size());
    for (std::uint32_t r = 0; r < filled; ++r) {
      match_counts_[r] = match_count(action->children[r]->state, generated);
    }
    std::size_t match_row = 0;
    bool matched = false;
    if (filled > 0) {
      match_row = max_index<std::uint32_t>(
          std::span<const std::uint32_t>(match_counts_.data(), filled));
      matched = match_counts_[match_row] == generated.dim;
    }
    const std::uint32_t cap = config_.state_branch_caps[depth - 1];
    if (!matched && filled == cap) {
      if (config_.overflow_policy == OverflowPolicy::kFail) {
        throw StateBranchOverflow(depth, action->id);
      }
      ++overflow_events_;
      return action->children[match_row].get();
    }
    if (matched) {
      return action->children[match_row].get();
    }
    auto fresh = std::make_unique<RefStateNode>();
    fresh->state = generated;
    fresh->id =
        static_cast<std::uint32_t>(tree.states_by_depth[depth].size());
    RefStateNode* created = fresh.get();
    tree.states_by_depth[depth].push_back(created);
    action->children.push_back(std::move(fresh));
    return created;
  }

  void simulate_once(RefTree& tree, UniformStream& rng) {
    const std::uint32_t depth = config_.max_depth;
    RefStateNode* state = tree.root.get();
    for (std::uint32_t l = 0; l < depth; ++l) {
      const double action_draw = rng.next();
      auto [row, action] = select_child_action(tree, state, l, action_draw);
      const double noise_draw = rng.next();
      const StateVec generated = step(env_, state->state, row, noise_draw);
      RefStateNode* landed = select_child_state(tree, action, l + 1, generated);
      path_[l] = {state, action};
      state = landed;
      path_[l + 1] = {state, nullptr};
    }

    double summed = 0.0;
    for (std::uint32_t l = depth; l >= 1; --l) {
      RefStateNode* landed = path_[l].state;
      RefActionNode* action = path_[l - 1].action;
      summed += reward(env_, landed->state);
      action->visits += 1;
      action->value = incremental_mean(action->value, summed, action->visits);
      path_[l - 1].state->visits += 1;
    }
  }

  std::uint32_t best_root_action(const RefStateNode& root) const {
    std::uint32_t best_row = 0;
    double best_value = 0.0;
    bool any = false;
    for (std::uint32_t a = 0; a < config_.actions.size(); ++a) {
      const RefActionNode* child = root.child_for_row(a);
      if (child == nullptr || child->visits == 0) {
        continue;
      }
      if (!any || child->value > best_value) {
        any = true;
        best_row = a;
        best_value = child->value;
      }
    }
    if (!any) {
      throw std::logic_error("best_root_action: no simulations recorded");
    }
    return best_row;
  }

  const EnvSpec& env_;
  SearchConfig config_;
  std::uint64_t overflow_events_ = 0;

  std::vector<double> child_values_;
  std::vector<std::uint32_t> child_visits_;
  std::vector<double> uct_;
  std::vector<std::uint32_t> match_counts_;
  std::vector<PathStep> path_;
};

inline RefSearchResult search_ref(const StateVec& root, const EnvSpec& env,
                                  const SearchConfig& config) {
  RefSearcher searcher(env, config);
  return searcher.run(root);
}

inline TreeSnapshot snapshot_ref(const RefTree& tree) {
  TreeSnapshot snap;
  const std::size_t depths = tree.states_by_depth.size();
  for (std::uint32_t depth = 0; depth < depths; ++depth) {
    for (const RefActionNode* a : tree.actions_by_depth[depth]) {
      SnapshotRecord r;
      r.kind = 'A';
      r.depth = depth;
      r.index = a->id;
      r.parent = a->parent_state_id;
      r.visits = a->visits;
      r.value = a->value;
      snap.records.push_back(r);
    }
    for (const RefStateNode* s : tree.states_by_depth[depth]) {
      SnapshotRecord r;
      r.kind = 'S';
      r.depth = depth;
      r.index = s->id;
      r.visits = s->visits;
      r.state = s->state;
      if (depth == 0) {
        r.parent = -1;
      } else {
        // A state's snapshot parent is the action it was entered through.
        // The tree stores the downward edge only, so recover it from the
        // registry scan below.
        r.parent = -1;
      }
      snap.records.push_back(r);
    }
  }
  // Fill state parents from the action -> child edges.
  for (std::uint32_t depth = 1; depth < depths; ++depth) {
    std::vector<std::int64_t> parent_of(tree.states_by_depth[depth].size(), -1);
    for (const RefActionNode* a : tree.actions_by_depth[depth]) {
      for (const auto& child : a->children) {
        parent_of[child->id] = a->id;
      }
    }
    for (SnapshotRecord& r : snap.records) {
      if (r.kind == 'S' && r.depth == depth) {
        r.parent = parent_of[r.index];
      }
    }
  }
  return snap;
}

}  // namespace flatmcts
