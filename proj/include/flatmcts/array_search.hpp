#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "flatmcts/env.hpp"
#include "flatmcts/kernels.hpp"
#include "flatmcts/layer_store.hpp"
#include "flatmcts/rng.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/snapshot.hpp"

// UCT search over the layer-sorted array store.  One simulation is a walk
// from the root to max_depth and a value backup along the walked path.
// Selection at every step is a fixed gather/select sequence over a dense
// candidate column; the only data-dependent branches are the cold
// overflow check and argument validation.
//
// Every simulation consumes exactly two uniform draws per depth step, an
// action draw and a noise draw, whether or not the draw's consumer ends
// up using it.  Keeping the draw schedule input-independent is what lets
// the other implementations reproduce this one decision for decision.

namespace flatmcts {

class StateBranchOverflow : public std::runtime_error {
 public:
  StateBranchOverflow(std::uint32_t depth, std::uint32_t action_idx)
      : std::runtime_error("state branch cap exceeded at depth " +
                           std::to_string(depth) + ", action node " +
                           std::to_string(action_idx)),
        depth_(depth),
        action_idx_(action_idx) {}
  std::uint32_t depth() const { return depth_; }
  std::uint32_t action_index() const { return action_idx_; }

 private:
  std::uint32_t depth_;
  std::uint32_t action_idx_;
};

struct SearchStats {
  std::uint64_t draws_consumed = 0;
  std::uint64_t overflow_events = 0;
};

// One backed-up step of one simulation: the action node the walk used at
// `depth` and the reward collected at that depth's state.
struct TrajectoryStep {
  std::uint32_t depth = 0;
  std::uint32_t action_index = 0;
  double reward = 0.0;
};
using TrajectoryLog = std::vector<std::vector<TrajectoryStep>>;

struct ActionChoice {
  std::uint32_t row = 0;    // action set row, feeds the environment step
  std::uint32_t index = 0;  // action node index at the next depth
  bool fresh = false;       // true when this walk created the node
};

struct StateChoice {
  std::uint32_t index = 0;
  bool fresh = false;
  bool clamped = false;  // folded into best sibling by the overflow policy
};

struct ArraySearchResult {
  std::uint32_t best_action = 0;
  LayerStore store;
  SearchStats stats;
};

class ArraySearcher {
 public:
  ArraySearcher(const EnvSpec& env, const SearchConfig& config)
      : env_(env), config_(config) {
    config.validate();
    const std::uint32_t rows = config.actions.size();
    child_idx_.resize(rows);
    child_values_.resize(rows);
    child_visits_.resize(rows);
    uct_.resize(rows);
    std::uint32_t max_cap = 0;
    for (std::uint32_t cap : config.state_branch_caps) {
      max_cap = std::max(max_cap, cap);
    }
    match_rows_.resize(max_cap);
    match_counts_.resize(max_cap);
    path_action_.resize(config.max_depth + 1);
    path_state_.resize(config.max_depth + 1);
  }

  // Picks the action to take from state_idx at `depth`.  When any action
  // row is still unvisited the draw picks uniformly among the unvisited
  // rows and a node is appended at depth + 1; otherwise the draw is
  // discarded and the row with the greatest augmented value wins.
  ActionChoice select_child_action(LayerStore& store, std::uint32_t depth,
                                   std::uint32_t state_idx, double draw) {
    Layer& cur = store.layers[depth];
    Layer& next = store.layers[depth + 1];
    const std::uint32_t rows = cur.action_rows;
    for (std::uint32_t a = 0; a < rows; ++a) {
      child_idx_[a] = cur.child_action_at(a, state_idx);
    }
    // Unset entries hold the next layer's zero slot, so these gathers see
    // visits == 0 exactly where no node exists yet.
    for (std::uint32_t a = 0; a < rows; ++a) {
      child_values_[a] = next.action_values[child_idx_[a]];
      child_visits_[a] = next.action_visits[child_idx_[a]];
    }
    const bool expand = any_unvisited(child_visits_);
    uct_values(child_values_, child_visits_, cur.state_visits[state_idx],
               config_.uct, uct_);
    const std::size_t best = max_index<double>(uct_);
    const std::size_t untried = random_untried(child_visits_, draw);
    const auto row =
        static_cast<std::uint32_t>(select(untried, best, expand));
    ActionChoice choice;
    choice.row = row;
    choice.fresh = expand;
    choice.index = select(next.num_actions, child_idx_[row], expand);
    cur.child_action_at(row, state_idx) = choice.index;
    next.num_actions += static_cast<std::uint32_t>(expand);
    return choice;
  }

  // Routes the freshly generated state into action_idx's child column at
  // `depth`: reuse the exact match if one exists, append a node otherwise.
  // A full column with no exact match is the overflow case.
  StateChoice select_child_state(LayerStore& store, std::uint32_t depth,
                                 std::uint32_t action_idx,
                                 const StateVec& generated) {
    Layer& layer = store.layers[depth];
    const std::uint32_t cap = layer.branch_cap;
    for (std::uint32_t r = 0; r < cap; ++r) {
      match_rows_[r] = layer.child_state_at(r, action_idx);
    }
    // Unwritten rows gather the sentinel state, which matches nothing.
    for (std::uint32_t r = 0; r < cap; ++r) {
      match_counts_[r] =
          match_count(layer.state_nodes[match_rows_[r]], generated);
    }
    const std::size_t match_row = max_index<std::uint32_t>(
        std::span<const std::uint32_t>(match_counts_.data(), cap));
    const bool matched = match_counts_[match_row] == generated.dim;
    const std::uint32_t filled = layer.child_state_count(action_idx);

    if (!matched && filled == cap) {
      if (config_.overflow_policy == OverflowPolicy::kFail) {
        throw StateBranchOverflow(depth, action_idx);
      }
      ++overflow_events_;
      StateChoice fold;
      fold.index = match_rows_[match_row];
      fold.clamped = true;
      return fold;
    }

    FLATMCTS_DCHECK(matched || layer.num_states < layer.state_capacity);
    StateChoice choice;
    choice.fresh = !matched;
    choice.index = select(match_rows_[match_row], layer.num_states, matched);
    const std::uint32_t write_row =
        select(static_cast<std::uint32_t>(match_row), filled, matched);
    layer.child_state_at(write_row, action_idx) = choice.index;
    layer.state_nodes[choice.index] = generated;
    layer.child_state_count(action_idx) =
        filled + static_cast<std::uint32_t>(!matched);
    layer.num_states += static_cast<std::uint32_t>(!matched);
    return choice;
  }

  // One full walk: descend to max_depth, then back the summed reward up
  // the walked path.  Returns the simulation's total reward.
  double simulate_once(LayerStore& store, UniformStream& rng,
                       TrajectoryLog* log = nullptr) {
    const std::uint32_t depth = config_.max_depth;
    std::uint32_t state_idx = 0;
    path_state_[0] = 0;
    for (std::uint32_t l = 0; l < depth; ++l) {
      const double action_draw = rng.next();
      const ActionChoice action =
          select_child_action(store, l, state_idx, action_draw);
      store.layers[l + 1].action_parent_state[action.index] = state_idx;
      const double noise_draw = rng.next();
      const StateVec generated = step(
          env_, store.layers[l].state_nodes[state_idx], action.row, noise_draw);
      const StateChoice landed =
          select_child_state(store, l + 1, action.index, generated);
      store.layers[l + 1].state_parent_action[landed.index] = action.index;
      path_action_[l + 1] = action.index;
      path_state_[l + 1] = landed.index;
      state_idx = landed.index;
    }

    if (log) {
      log->emplace_back();
    }
    double summed = 0.0;
    for (std::uint32_t l = depth; l >= 1; --l) {
      Layer& layer = store.layers[l];
      const std::uint32_t a = path_action_[l];
      const double r = reward(env_, layer.state_nodes[path_state_[l]]);
      summed += r;
      layer.action_visits[a] += 1;
      layer.action_values[a] =
          incremental_mean(layer.action_values[a], summed,
                           layer.action_visits[a]);
      store.layers[l - 1].state_visits[path_state_[l - 1]] += 1;
      if (log) {
        log->back().push_back({l, a, r});
      }
    }
    return summed;
  }

  std::uint64_t overflow_events() const { return overflow_events_; }

  // Row whose realized root child has the greatest mean value; ties take
  // the lowest row.  Runs once per search, after the simulation loop.
  std::uint32_t best_root_action(const LayerStore& store) const {
    const Layer& root = store.layers[0];
    const Layer& next = store.layers[1];
    std::uint32_t best_row = 0;
    double best_value = 0.0;
    bool any = false;
    for (std::uint32_t a = 0; a < root.action_rows; ++a) {
      const std::uint32_t idx = root.child_action_at(a, 0);
      if (next.action_visits[idx] == 0) {
        continue;
      }
      if (!any || next.action_values[idx] > best_value) {
        any = true;
        best_row = a;
        best_value = next.action_values[idx];
      }
    }
    if (!any) {
      throw std::logic_error("best_root_action: no simulations recorded");
    }
    return best_row;
  }

  ArraySearchResult run(const StateVec& root, TrajectoryLog* log = nullptr) {
    ArraySearchResult result;
    result.store = init_layers(root, config_);
    overflow_events_ = 0;
    UniformStream rng(config_.seed);
    for (std::uint32_t i = 0; i < config_.num_simulations; ++i) {
      simulate_once(result.store, rng, log);
    }
    result.best_action = best_root_action(result.store);
    result.stats.draws_consumed = rng.draws_consumed();
    result.stats.overflow_events = overflow_events_;
    return result;
  }

 private:
  const EnvSpec& env_;
  SearchConfig config_;
  std::uint64_t overflow_events_ = 0;

  // Scratch for the selection gathers, sized once at construction.
  std::vector<std::uint32_t> child_idx_;
  std::vector<double> child_values_;
  std::vector<std::uint32_t> child_visits_;
  std::vector<double> uct_;
  std::vector<std::uint32_t> match_rows_;
  std::vector<std::uint32_t> match_counts_;
  std::vector<std::uint32_t> path_action_;
  std::vector<std::uint32_t> path_state_;
};

inline ArraySearchResult search(const StateVec& root, const EnvSpec& env,
                                const SearchConfig& config,
                                TrajectoryLog* log = nullptr) {
  ArraySearcher searcher(env, config);
  return searcher.run(root, log);
}

// Canonical dump: node indexes in the layer store are creation ranks
// already, so records come straight out of the arrays.
inline TreeSnapshot snapshot(const LayerStore& store) {
  TreeSnapshot snap;
  for (std::uint32_t depth = 0; depth < store.layers.size(); ++depth) {
    const Layer& layer = store.layers[depth];
    for (std::uint32_t a = 0; a < layer.num_actions; ++a) {
      SnapshotRecord r;
      r.kind = 'A';
      r.depth = depth;
      r.index = a;
      r.parent = layer.action_parent_state[a];
      r.visits = layer.action_visits[a];
      r.value = layer.action_values[a];
      snap.records.push_back(r);
    }
    for (std::uint32_t s = 0; s < layer.num_states; ++s) {
      SnapshotRecord r;
      r.kind = 'S';
      r.depth = depth;
      r.index = s;
      r.parent = depth == 0
                     ? std::int64_t{-1}
                     : static_cast<std::int64_t>(layer.state_parent_action[s]);
      r.visits = layer.state_visits[s];
      r.state = layer.state_nodes[s];
      snap.records.push_back(r);
    }
  }
  return snap;
}

}  // namespace flatmcts
