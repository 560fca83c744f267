#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "flatmcts/array_search.hpp"
#include "flatmcts/layer_store.hpp"
#include "flatmcts/search_config.hpp"

// Structural audit of a finished search.  Everything here is implied by
// the search's construction, so any violation means a logic bug, not an
// unlucky input.  Returns human-readable violations; empty means clean.

namespace flatmcts {

namespace detail {

inline void check(std::vector<std::string>& out, bool ok, const std::string& what) {
  if (!ok) {
    out.push_back(what);
  }
}

}  // namespace detail

// Audits a layer store after `config.num_simulations` completed walks.
//
// Checked invariants, per layer:
//   * counters within capacity, reserved slots untouched;
//   * every walk accounted for: action visits at each depth sum to the
//     simulation count, as do state visits above the deepest layer;
//   * a parent's visit count equals the sum of its children's visits;
//   * every node is linked from exactly one child-table entry, and its
//     recorded parent is the owner of that entry;
//   * sibling states under one action are pairwise distinct;
//   * all values finite, all child-table entries in range.
inline std::vector<std::string> validate_layers(const LayerStore& store,
                                                const SearchConfig& config) {
  using detail::check;
  std::vector<std::string> out;
  const std::uint64_t n = config.num_simulations;
  const std::uint32_t max_depth = store.max_depth();

  check(out, max_depth == config.max_depth, "layer count != max_depth + 1");
  check(out, store.layers[0].num_states == 1, "root layer must hold one state");
  check(out, store.layers[0].state_visits[0] == n,
        "root visits != simulation count");

  for (std::uint32_t l = 0; l <= max_depth; ++l) {
    const Layer& layer = store.layers[l];
    const std::string at = "depth " + std::to_string(l) + ": ";

    check(out, layer.num_states <= layer.state_capacity,
          at + "state count over capacity");
    check(out, layer.num_actions <= layer.action_capacity,
          at + "action count over capacity");
    check(out, layer.state_nodes[layer.state_capacity].is_sentinel(),
          at + "sentinel slot was overwritten");
    if (l > 0) {
      check(out, layer.action_visits[layer.action_capacity] == 0 &&
                     layer.action_values[layer.action_capacity] == 0.0,
            at + "zero slot was overwritten");
    }

    // Visit accounting.
    if (l > 0) {
      std::uint64_t action_sum = 0;
      for (std::uint32_t a = 0; a < layer.num_actions; ++a) {
        action_sum += layer.action_visits[a];
        check(out, layer.action_visits[a] >= 1,
              at + "action node " + std::to_string(a) + " has zero visits");
        check(out, std::isfinite(layer.action_values[a]),
              at + "action node " + std::to_string(a) + " has non-finite value");
      }
      check(out, action_sum == n, at + "action visits sum to " +
                                      std::to_string(action_sum) + ", expected " +
                                      std::to_string(n));
    }
    std::uint64_t state_sum = 0;
    for (std::uint32_t s = 0; s < layer.num_states; ++s) {
      state_sum += layer.state_visits[s];
      check(out, !layer.state_nodes[s].is_sentinel(),
            at + "state node " + std::to_string(s) + " left as sentinel");
    }
    if (l < max_depth) {
      check(out, state_sum == n, at + "state visits sum to " +
                                     std::to_string(state_sum) + ", expected " +
                                     std::to_string(n));
    } else {
      check(out, state_sum == 0, at + "deepest layer states must stay unvisited");
    }

    // Child action tables: each next-layer action node linked exactly once,
    // parent pointers agreeing with the owning column.
    if (l < max_depth) {
      const Layer& next = store.layers[l + 1];
      const std::uint32_t unset = next.action_capacity;
      std::vector<std::uint32_t> seen(next.num_actions, 0);
      for (std::uint32_t s = 0; s < layer.num_states; ++s) {
        std::uint64_t child_visit_sum = 0;
        for (std::uint32_t a = 0; a < layer.action_rows; ++a) {
          const std::uint32_t idx = layer.child_action_at(a, s);
          if (idx == unset) {
            continue;
          }
          if (idx >= next.num_actions) {
            out.push_back(at + "child action entry out of range");
            continue;
          }
          seen[idx] += 1;
          child_visit_sum += next.action_visits[idx];
          check(out, next.action_parent_state[idx] == s,
                at + "action node " + std::to_string(idx) +
                    " parent disagrees with child table");
        }
        check(out, child_visit_sum == layer.state_visits[s],
              at + "state node " + std::to_string(s) +
                  " visits != sum of child action visits");
      }
      for (std::uint32_t idx = 0; idx < next.num_actions; ++idx) {
        check(out, seen[idx] == 1, at + "action node " + std::to_string(idx) +
                                       " linked " + std::to_string(seen[idx]) +
                                       " times");
      }
      // Entries in unused columns must still be unset.
      for (std::uint32_t s = layer.num_states; s < layer.state_capacity; ++s) {
        for (std::uint32_t a = 0; a < layer.action_rows; ++a) {
          if (layer.child_action_at(a, s) != unset) {
            out.push_back(at + "unused child action column was written");
          }
        }
      }
    }

    // Child state tables: linkage, uniqueness of siblings, visit sums.
    if (l > 0) {
      std::vector<std::uint32_t> seen(layer.num_states, 0);
      for (std::uint32_t a = 0; a < layer.num_actions; ++a) {
        const std::uint32_t filled = layer.child_state_count(a);
        check(out, filled <= layer.branch_cap, at + "child state count over cap");
        std::uint64_t child_visit_sum = 0;
        for (std::uint32_t r = 0; r < layer.branch_cap; ++r) {
          const std::uint32_t idx = layer.child_state_at(r, a);
          if (r >= filled) {
            check(out, idx == layer.state_capacity,
                  at + "unwritten child state row not pointing at sentinel");
            continue;
          }
          if (idx >= layer.num_states) {
            out.push_back(at + "child state entry out of range");
            continue;
          }
          seen[idx] += 1;
          child_visit_sum += layer.state_visits[idx];
          check(out, layer.state_parent_action[idx] == a,
                at + "state node " + std::to_string(idx) +
                    " parent disagrees with child table");
          for (std::uint32_t q = 0; q < r; ++q) {
            const std::uint32_t other = layer.child_state_at(q, a);
            check(out, !(layer.state_nodes[other] == layer.state_nodes[idx]),
                  at + "duplicate sibling states under action " +
                      std::to_string(a));
          }
        }
        if (l < max_depth) {
          check(out, child_visit_sum == layer.action_visits[a],
                at + "action node " + std::to_string(a) +
                    " visits != sum of child state visits");
        }
      }
      for (std::uint32_t idx = 0; idx < layer.num_states; ++idx) {
        check(out, seen[idx] == 1, at + "state node " + std::to_string(idx) +
                                       " linked " + std::to_string(seen[idx]) +
                                       " times");
      }
    }
  }
  return out;
}

// The fixed draw budget: two uniforms per depth step per simulation.
inline std::vector<std::string> validate_draw_count(const SearchStats& stats,
                                                    const SearchConfig& config) {
  std::vector<std::string> out;
  const std::uint64_t expected = static_cast<std::uint64_t>(config.num_simulations) *
                                 2 * config.max_depth;
  detail::check(out, stats.draws_consumed == expected,
                "draws consumed " + std::to_string(stats.draws_consumed) +
                    ", expected " + std::to_string(expected));
  return out;
}

}  // namespace flatmcts
