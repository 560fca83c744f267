#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "flatmcts/search_config.hpp"
#include "flatmcts/state.hpp"

// Array representation of the search tree.  Nodes live in per-depth
// parallel arrays ordered by creation time; parent/child links are plain
// indexes into the neighboring arrays.  Child lookup tables are dense and
// column-major, one column per parent node, so the selection kernels can
// gather a full candidate set with unit-stride reads and no pointer
// chasing.  The per-layer arrays are spans into three store-wide arenas,
// one per element type, so a search costs a fixed handful of allocations
// regardless of depth.
//
// Two reserved slots per layer keep the hot path branch free:
//   * state slot [state_capacity] holds a sentinel state that matches no
//     discretized state, so an unwritten child-table entry gathers to a
//     guaranteed mismatch instead of needing an "is this set?" branch;
//   * action slot [action_capacity] holds permanent zeros, so gathering
//     through an unset child-action entry yields visits == 0, which is
//     exactly the "untried" signal the selection kernels key on.

namespace flatmcts {

struct Layer {
  // State-node side.  state_nodes/state_visits/state_parent_action are
  // indexed by state node; the extra trailing slot is the sentinel.
  std::span<StateVec> state_nodes;
  std::span<std::uint32_t> state_visits;
  // Parent action node at the same depth (states are entered through an
  // action selected one step earlier in the walk).
  std::span<std::uint32_t> state_parent_action;

  // child_action_nodes[a + state_idx * action_rows]: index of the action
  // node at the next depth reached by taking row a from state_idx, or the
  // next layer's zero slot when untried.  Empty at the deepest layer.
  std::span<std::uint32_t> child_action_nodes;

  // Action-node side, indexed by action node; the extra trailing slot is
  // the permanent zero slot.
  std::span<double> action_values;
  std::span<std::uint32_t> action_visits;
  // Parent state node at the previous depth.
  std::span<std::uint32_t> action_parent_state;

  // child_state_nodes[row + action_idx * (branch_cap + 1)]: rows
  // 0..branch_cap-1 hold indexes of this layer's state nodes (sentinel
  // slot when unwritten); row branch_cap counts the written entries.
  std::span<std::uint32_t> child_state_nodes;

  std::uint32_t state_capacity = 0;
  std::uint32_t action_capacity = 0;
  std::uint32_t branch_cap = 0;
  std::uint32_t action_rows = 0;

  std::uint32_t num_states = 0;
  std::uint32_t num_actions = 0;

  std::uint32_t& child_action_at(std::uint32_t a, std::uint32_t state_idx) {
    return child_action_nodes[a + static_cast<std::size_t>(state_idx) * action_rows];
  }
  const std::uint32_t& child_action_at(std::uint32_t a,
                                       std::uint32_t state_idx) const {
    return child_action_nodes[a + static_cast<std::size_t>(state_idx) * action_rows];
  }
  std::uint32_t& child_state_at(std::uint32_t row, std::uint32_t action_idx) {
    return child_state_nodes[row +
                             static_cast<std::size_t>(action_idx) * (branch_cap + 1)];
  }
  const std::uint32_t& child_state_at(std::uint32_t row,
                                      std::uint32_t action_idx) const {
    return child_state_nodes[row +
                             static_cast<std::size_t>(action_idx) * (branch_cap + 1)];
  }
  std::uint32_t& child_state_count(std::uint32_t action_idx) {
    return child_state_at(branch_cap, action_idx);
  }
  const std::uint32_t& child_state_count(std::uint32_t action_idx) const {
    return child_state_at(branch_cap, action_idx);
  }
};

struct LayerStore {
  std::vector<Layer> layers;  // layers[0] is the root layer

  // Backing storage for every layer's spans.  Moving a store moves the
  // arenas without changing their addresses, so the spans stay valid;
  // copying would alias them and is disabled.
  std::vector<StateVec> state_arena;
  std::vector<double> value_arena;
  std::vector<std::uint32_t> index_arena;

  LayerStore() = default;
  LayerStore(const LayerStore&) = delete;
  LayerStore& operator=(const LayerStore&) = delete;
  LayerStore(LayerStore&&) = default;
  LayerStore& operator=(LayerStore&&) = default;

  std::uint32_t max_depth() const {
    return static_cast<std::uint32_t>(layers.size() - 1);
  }
  std::uint32_t num_states_at(std::uint32_t depth) const {
    return layers[depth].num_states;
  }
  std::uint32_t num_actions_at(std::uint32_t depth) const {
    return layers[depth].num_actions;
  }
};

// Sizes and zero-initializes every layer for a search of
// config.num_simulations walks to config.max_depth, then installs the root
// state.  Per-depth capacities follow the growth of a tree with
// |actions| action children per state and state_branch_caps[l] state
// children per action, clamped at num_simulations because one walk can
// create at most one node per array per depth.
inline LayerStore init_layers(const StateVec& root, const SearchConfig& config) {
  config.validate();
  if (root.dim == 0 || root.dim > kMaxStateDims || root.is_sentinel()) {
    throw std::invalid_argument("init_layers: malformed root state");
  }
  const std::uint64_t n = config.num_simulations;
  const std::uint64_t action_rows = config.actions.size();
  const std::uint32_t depth = config.max_depth;

  LayerStore store;
  store.layers.resize(depth + 1);

  std::vector<std::uint64_t> state_cap(depth + 1), action_cap(depth + 1);
  state_cap[0] = 1;
  action_cap[0] = 0;
  for (std::uint32_t l = 1; l <= depth; ++l) {
    const std::uint64_t branch = config.state_branch_caps[l - 1];
    action_cap[l] = std::min<std::uint64_t>(n, state_cap[l - 1] * action_rows);
    state_cap[l] = std::min<std::uint64_t>(n, action_cap[l] * branch);
    const std::uint64_t action_table = action_rows * state_cap[l];
    const std::uint64_t state_table = (branch + 1) * action_cap[l];
    if (state_cap[l] + 1 > UINT32_MAX || action_table > UINT32_MAX ||
        state_table > UINT32_MAX) {
      throw std::length_error("init_layers: layer capacity exceeds index range");
    }
  }

  // Span starts are padded to 16-element boundaries, which keeps every
  // fixed-stride child-table column inside one cache line.
  constexpr std::size_t kSpanPad = 16;
  std::size_t states_total = 0, values_total = 0, indexes_total = 0;
  for (std::uint32_t l = 0; l <= depth; ++l) {
    states_total += state_cap[l] + 1 + kSpanPad;
    indexes_total += 2 * (state_cap[l] + 1) + 2 * kSpanPad;
    if (l < depth) {
      indexes_total += action_rows * state_cap[l] + kSpanPad;
    }
    if (l > 0) {
      const std::uint64_t branch = config.state_branch_caps[l - 1];
      values_total += action_cap[l] + 1 + kSpanPad;
      indexes_total += 2 * (action_cap[l] + 1) + 2 * kSpanPad;
      indexes_total += (branch + 1) * action_cap[l] + kSpanPad;
    }
  }
  // Arenas are built by appending each span's fill pattern, so every
  // element is written exactly once.  The reserves pin the buffers, which
  // keeps spans taken mid-build valid.
  store.state_arena.reserve(states_total);
  store.value_arena.reserve(values_total);
  store.index_arena.reserve(indexes_total);

  auto append = [](auto& arena, std::size_t count, const auto& fill) {
    std::size_t off = arena.size();
    const std::size_t rem = off % kSpanPad;
    if (rem != 0) {
      arena.insert(arena.end(), kSpanPad - rem, fill);
      off += kSpanPad - rem;
    }
    arena.insert(arena.end(), count, fill);
    return std::span(arena).subspan(off, count);
  };
  auto append_states = [&store, &append](std::size_t count, const StateVec& fill) {
    return append(store.state_arena, count, fill);
  };
  auto append_values = [&store, &append](std::size_t count) {
    return append(store.value_arena, count, 0.0);
  };
  auto append_indexes = [&store, &append](std::size_t count, std::uint32_t fill) {
    return append(store.index_arena, count, fill);
  };

  const StateVec sentinel = StateVec::sentinel(root.dim);
  for (std::uint32_t l = 0; l <= depth; ++l) {
    Layer& layer = store.layers[l];
    layer.state_capacity = static_cast<std::uint32_t>(state_cap[l]);
    layer.action_capacity = static_cast<std::uint32_t>(action_cap[l]);
    layer.branch_cap = l == 0 ? 0 : config.state_branch_caps[l - 1];
    layer.action_rows = static_cast<std::uint32_t>(action_rows);

    layer.state_nodes = append_states(layer.state_capacity + 1, sentinel);
    layer.state_visits = append_indexes(layer.state_capacity + 1, 0);
    layer.state_parent_action = append_indexes(layer.state_capacity + 1, 0);
    if (l < depth) {
      // Unset entries point at the next layer's zero slot.
      layer.child_action_nodes =
          append_indexes(action_rows * state_cap[l],
                         static_cast<std::uint32_t>(action_cap[l + 1]));
    }
    if (l > 0) {
      layer.action_values = append_values(layer.action_capacity + 1);
      layer.action_visits = append_indexes(layer.action_capacity + 1, 0);
      layer.action_parent_state = append_indexes(layer.action_capacity + 1, 0);
      // Unwritten child rows point at this layer's sentinel state slot;
      // the count row starts at zero.
      layer.child_state_nodes =
          append_indexes((static_cast<std::size_t>(layer.branch_cap) + 1) *
                             layer.action_capacity,
                         layer.state_capacity);
      for (std::uint32_t a = 0; a < layer.action_capacity; ++a) {
        layer.child_state_count(a) = 0;
      }
    }
  }

  store.layers[0].state_nodes[0] = root;
  store.layers[0].num_states = 1;
  return store;
}

}  // namespace flatmcts
