#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "flatmcts/array_search.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/kernels.hpp"
#include "flatmcts/rng.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/snapshot.hpp"

// Ablation twin of the array searcher: the same branch-free decision
// sequence and the same unconditional writes, but nodes are not sorted
// into layers.  Every action node in the tree lives in one global
// creation-order arena as a whole record, value and visit count side by
// side the way a linked tree lays a node out, and state nodes live in a
// second arena of the same shape.  The child tables are indexed by global
// creation id, so a node's column reflects when it was made, not where it
// sits in the tree, and each record carries its depth explicitly because
// nothing else remembers it.  Selection gathers therefore touch one
// scattered record per candidate instead of sweeping a per-layer field
// array.  Everything observable about the search, snapshots included,
// stays identical; only the storage order differs.  Exists to price the
// layer sorting, and as a second oracle for the sorted implementation.

namespace flatmcts {

// One node of each kind as it sits in the creation-order arena.  Id 0 is
// reserved: the permanently zeroed action record and the sentinel state.
struct UnsortedActionNode {
  double value = 0.0;
  std::uint32_t visits = 0;
  std::uint32_t parent = 0;  // parent state's global id
  std::uint32_t depth = 0;
};

struct UnsortedStateNode {
  StateVec state;
  std::uint32_t visits = 0;
  std::uint32_t parent = 0;  // parent action's global id
  std::uint32_t depth = 0;
};

struct UnsortedStore {
  // Node arenas, indexed by creation id.  Both carry one extra trailing
  // slot so the next unallocated id is writable scratch for the
  // unconditional bookkeeping stores.
  std::vector<UnsortedStateNode> states;
  std::vector<UnsortedActionNode> actions;

  // Global child tables, one column per global id, 0 meaning unset.  The
  // state table's bottom row is the column's fill count, as in the sorted
  // store, and every column is max_branch_cap tall regardless of the
  // owning node's depth.
  std::vector<std::uint32_t> child_action_nodes;  // action_rows x state id
  std::vector<std::uint32_t> child_state_nodes;   // (max cap + 1) x action id
  std::uint32_t action_rows = 0;
  std::uint32_t max_branch_cap = 0;

  // Realized nodes per depth, for capacity audits and snapshot sizing.
  std::vector<std::uint32_t> state_counts;
  std::vector<std::uint32_t> action_counts;

  std::uint32_t next_state_id = 0;
  std::uint32_t next_action_id = 0;

  std::uint32_t& child_action_at(std::uint32_t a, std::uint32_t state_id) {
    return child_action_nodes[a + static_cast<std::size_t>(state_id) * action_rows];
  }
  std::uint32_t child_action_at(std::uint32_t a, std::uint32_t state_id) const {
    return child_action_nodes[a + static_cast<std::size_t>(state_id) * action_rows];
  }
  std::uint32_t& child_state_at(std::uint32_t row, std::uint32_t action_id) {
    return child_state_nodes[row + static_cast<std::size_t>(action_id) *
                                       (max_branch_cap + 1)];
  }
  std::uint32_t child_state_at(std::uint32_t row, std::uint32_t action_id) const {
    return child_state_nodes[row + static_cast<std::size_t>(action_id) *
                                       (max_branch_cap + 1)];
  }
  std::uint32_t& child_state_count(std::uint32_t action_id) {
    return child_state_at(max_branch_cap, action_id);
  }

  std::uint32_t num_states_at(std::uint32_t depth) const {
    return state_counts[depth];
  }
  std::uint32_t num_actions_at(std::uint32_t depth) const {
    return action_counts[depth];
  }
};

struct UnsortedSearchResult {
  std::uint32_t best_action = 0;
  UnsortedStore store;
  SearchStats stats;
};

class UnsortedSearcher {
 public:
  UnsortedSearcher(const EnvSpec& env, const SearchConfig& config)
      : env_(env), config_(config) {
    config.validate();
    const std::uint32_t rows = config.actions.size();
    gathered_ids_.resize(rows);
    child_values_.resize(rows);
    child_visits_.resize(rows);
    uct_.resize(rows);
    std::uint32_t max_cap = 0;
    for (std::uint32_t cap : config.state_branch_caps) {
      max_cap = std::max(max_cap, cap);
    }
    match_ids_.resize(max_cap);
    match_counts_.resize(max_cap);
    path_action_id_.resize(config.max_depth + 1);
    path_state_id_.resize(config.max_depth + 1);
  }

  UnsortedSearchResult run(const StateVec& root) {
    UnsortedSearchResult result;
    init_store(result.store, root);
    overflow_events_ = 0;
    UniformStream rng(config_.seed);
    for (std::uint32_t i = 0; i < config_.num_simulations; ++i) {
      simulate_once(result.store, rng);
    }
    result.best_action = best_root_action(result.store);
    result.stats.draws_consumed = rng.draws_consumed();
    result.stats.overflow_events = overflow_events_;
    return result;
  }

 private:
  void init_store(UnsortedStore& store, const StateVec& root) {
    if (root.dim == 0 || root.dim > kMaxStateDims || root.is_sentinel()) {
      throw std::invalid_argument("unsorted search: malformed root state");
    }
    const std::uint64_t n = config_.num_simulations;
    const std::uint64_t rows = config_.actions.size();
    const std::uint32_t depth = config_.max_depth;

    std::uint64_t state_cap = 1, action_cap = 0;
    std::uint64_t total_states = 1, total_actions = 0;
    std::uint32_t max_cap = 0;
    for (std::uint32_t l = 1; l <= depth; ++l) {
      const std::uint64_t branch = config_.state_branch_caps[l - 1];
      max_cap = std::max(max_cap, static_cast<std::uint32_t>(branch));
      action_cap = std::min<std::uint64_t>(n, state_cap * rows);
      state_cap = std::min<std::uint64_t>(n, action_cap * branch);
      total_states += state_cap;
      total_actions += action_cap;
    }
    if (total_states + 2 > UINT32_MAX || total_actions + 2 > UINT32_MAX) {
      throw std::length_error("unsorted search: capacity exceeds index range");
    }

    store.action_rows = static_cast<std::uint32_t>(rows);
    store.max_branch_cap = max_cap;
    UnsortedStateNode blank;
    blank.state = StateVec::sentinel(root.dim);
    store.states.assign(total_states + 2, blank);
    store.actions.assign(total_actions + 2, UnsortedActionNode{});
    store.child_action_nodes.assign(rows * (total_states + 1), 0);
    store.child_state_nodes.assign(
        (static_cast<std::size_t>(max_cap) + 1) * (total_actions + 1), 0);
    store.state_counts.assign(depth + 1, 0);
    store.action_counts.assign(depth + 1, 0);

    // Global id 0 is reserved in both arenas; the root state is id 1.
    store.states[1].state = root;
    store.states[1].depth = 0;
    store.state_counts[0] = 1;
    store.next_state_id = 2;
    store.next_action_id = 1;
  }

  // Same gather/select sequence as the sorted searcher, addressed through
  // global ids.  Unset entries hold id 0, whose visits are permanently
  // zero, so the gathers see unvisited rows exactly where no node exists.
  ActionChoice select_child_action(UnsortedStore& store, std::uint32_t depth,
                                   std::uint32_t state_id, double draw) {
    const std::uint32_t rows = store.action_rows;
    for (std::uint32_t a = 0; a < rows; ++a) {
      gathered_ids_[a] = store.child_action_at(a, state_id);
    }
    for (std::uint32_t a = 0; a < rows; ++a) {
      const UnsortedActionNode& node = store.actions[gathered_ids_[a]];
      child_values_[a] = node.value;
      child_visits_[a] = node.visits;
    }
    const bool expand = any_unvisited(child_visits_);
    uct_values(child_values_, child_visits_, store.states[state_id].visits,
               config_.uct, uct_);
    const std::size_t best = max_index<double>(uct_);
    const std::size_t untried = random_untried(child_visits_, draw);
    const auto row =
        static_cast<std::uint32_t>(select(untried, best, expand));

    const std::uint32_t fresh_id = store.next_action_id;
    ActionChoice choice;
    choice.row = row;
    choice.fresh = expand;
    choice.index = select(fresh_id, gathered_ids_[row], expand);
    store.child_action_at(row, state_id) = choice.index;
    store.next_action_id += static_cast<std::uint32_t>(expand);
    // The depth store lands in the fresh record either way; when nothing
    // was appended the record is scratch and the count stands still.
    store.actions[fresh_id].depth = depth + 1;
    store.action_counts[depth + 1] += static_cast<std::uint32_t>(expand);
    return choice;
  }

  // Routes the generated state exactly like the sorted searcher's state
  // step, with the match gather walking the state arena.
  StateChoice select_child_state(UnsortedStore& store, std::uint32_t depth,
                                 std::uint32_t action_id,
                                 const StateVec& generated) {
    const std::uint32_t cap = config_.state_branch_caps[depth - 1];
    for (std::uint32_t r = 0; r < cap; ++r) {
      match_ids_[r] = store.child_state_at(r, action_id);
    }
    // Unwritten rows gather the sentinel state, which matches nothing.
    for (std::uint32_t r = 0; r < cap; ++r) {
      match_counts_[r] =
          match_count(store.states[match_ids_[r]].state, generated);
    }
    const std::size_t match_row = max_index<std::uint32_t>(
        std::span<const std::uint32_t>(match_counts_.data(), cap));
    const bool matched = match_counts_[match_row] == generated.dim;
    const std::uint32_t filled = store.child_state_count(action_id);

    if (!matched && filled == cap) {
      if (config_.overflow_policy == OverflowPolicy::kFail) {
        throw StateBranchOverflow(depth, creation_rank(store, action_id));
      }
      ++overflow_events_;
      StateChoice fold;
      fold.index = match_ids_[match_row];
      fold.clamped = true;
      return fold;
    }

    const std::uint32_t fresh_id = store.next_state_id;
    FLATMCTS_DCHECK(matched || fresh_id + 1 < store.states.size());
    StateChoice choice;
    choice.fresh = !matched;
    choice.index = select(match_ids_[match_row], fresh_id, matched);
    const std::uint32_t write_row =
        select(static_cast<std::uint32_t>(match_row), filled, matched);
    store.child_state_at(write_row, action_id) = choice.index;
    store.states[choice.index].state = generated;
    store.child_state_count(action_id) =
        filled + static_cast<std::uint32_t>(!matched);
    store.next_state_id += static_cast<std::uint32_t>(!matched);
    store.states[fresh_id].depth = depth;
    store.state_counts[depth] += static_cast<std::uint32_t>(!matched);
    return choice;
  }

  void simulate_once(UnsortedStore& store, UniformStream& rng) {
    const std::uint32_t depth = config_.max_depth;
    std::uint32_t state_id = 1;  // the root, by construction
    path_state_id_[0] = state_id;

    for (std::uint32_t l = 0; l < depth; ++l) {
      const double action_draw = rng.next();
      const ActionChoice action =
          select_child_action(store, l, state_id, action_draw);
      store.actions[action.index].parent = state_id;
      const double noise_draw = rng.next();
      const StateVec generated =
          step(env_, store.states[state_id].state, action.row, noise_draw);
      const StateChoice landed =
          select_child_state(store, l + 1, action.index, generated);
      store.states[landed.index].parent = action.index;
      path_action_id_[l + 1] = action.index;
      path_state_id_[l + 1] = landed.index;
      state_id = landed.index;
    }

    double summed = 0.0;
    for (std::uint32_t l = depth; l >= 1; --l) {
      UnsortedActionNode& node = store.actions[path_action_id_[l]];
      summed += reward(env_, store.states[path_state_id_[l]].state);
      node.visits += 1;
      node.value = incremental_mean(node.value, summed, node.visits);
      store.states[path_state_id_[l - 1]].visits += 1;
    }
  }

  // Rank of a node among same-depth creations, for error reporting
  // parity with the sorted searcher.  Cold path only.
  static std::uint32_t creation_rank(const UnsortedStore& store,
                                     std::uint32_t action_id) {
    std::uint32_t rank = 0;
    for (std::uint32_t id = 1; id < action_id; ++id) {
      rank += store.actions[id].depth == store.actions[action_id].depth;
    }
    return rank;
  }

  std::uint32_t best_root_action(const UnsortedStore& store) const {
    std::uint32_t best_row = 0;
    double best_value = 0.0;
    bool any = false;
    for (std::uint32_t a = 0; a < store.action_rows; ++a) {
      const std::uint32_t id = store.child_action_at(a, 1);
      if (store.actions[id].visits == 0) {
        continue;
      }
      if (!any || store.actions[id].value > best_value) {
        any = true;
        best_row = a;
        best_value = store.actions[id].value;
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

  std::vector<std::uint32_t> gathered_ids_;
  std::vector<double> child_values_;
  std::vector<std::uint32_t> child_visits_;
  std::vector<double> uct_;
  std::vector<std::uint32_t> match_ids_;
  std::vector<std::uint32_t> match_counts_;
  std::vector<std::uint32_t> path_action_id_;
  std::vector<std::uint32_t> path_state_id_;
};

inline UnsortedSearchResult search_unsorted(const StateVec& root,
                                            const EnvSpec& env,
                                            const SearchConfig& config) {
  UnsortedSearcher searcher(env, config);
  return searcher.run(root);
}

inline TreeSnapshot snapshot(const UnsortedStore& store) {
  // Creation order within a depth is the rank order of the sorted store,
  // so one pass over the ids in creation order rebuilds every rank.
  const std::uint32_t depths =
      static_cast<std::uint32_t>(store.state_counts.size());
  std::vector<std::vector<std::uint32_t>> states_by_depth(depths);
  std::vector<std::vector<std::uint32_t>> actions_by_depth(depths);
  for (std::uint32_t d = 0; d < depths; ++d) {
    states_by_depth[d].reserve(store.state_counts[d]);
    actions_by_depth[d].reserve(store.action_counts[d]);
  }
  std::vector<std::uint32_t> state_rank(store.next_state_id, 0);
  std::vector<std::uint32_t> action_rank(store.next_action_id, 0);
  for (std::uint32_t id = 1; id < store.next_state_id; ++id) {
    auto& peers = states_by_depth[store.states[id].depth];
    state_rank[id] = static_cast<std::uint32_t>(peers.size());
    peers.push_back(id);
  }
  for (std::uint32_t id = 1; id < store.next_action_id; ++id) {
    auto& peers = actions_by_depth[store.actions[id].depth];
    action_rank[id] = static_cast<std::uint32_t>(peers.size());
    peers.push_back(id);
  }

  TreeSnapshot snap;
  for (std::uint32_t depth = 0; depth < depths; ++depth) {
    for (std::uint32_t rank = 0; rank < actions_by_depth[depth].size(); ++rank) {
      const UnsortedActionNode& node = store.actions[actions_by_depth[depth][rank]];
      SnapshotRecord r;
      r.kind = 'A';
      r.depth = depth;
      r.index = rank;
      r.parent = state_rank[node.parent];
      r.visits = node.visits;
      r.value = node.value;
      snap.records.push_back(r);
    }
    for (std::uint32_t rank = 0; rank < states_by_depth[depth].size(); ++rank) {
      const UnsortedStateNode& node = store.states[states_by_depth[depth][rank]];
      SnapshotRecord r;
      r.kind = 'S';
      r.depth = depth;
      r.index = rank;
      r.parent = depth == 0 ? std::int64_t{-1}
                            : static_cast<std::int64_t>(action_rank[node.parent]);
      r.visits = node.visits;
      r.state = node.state;
      snap.records.push_back(r);
    }
  }
  return snap;
}

}  // namespace flatmcts
