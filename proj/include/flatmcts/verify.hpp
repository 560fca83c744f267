#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "flatmcts/array_search.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/snapshot.hpp"
#include "flatmcts/tree_search.hpp"
#include "flatmcts/unsorted_search.hpp"
#include "flatmcts/validate.hpp"

// Cross-implementation equivalence harness.  For every cell of a
// (environment, seed, depth) matrix it runs the linked-tree reference,
// the layer-sorted array search, and the unsorted ablation with identical
// inputs, then demands identical canonical dumps, identical chosen root
// actions, a clean structural audit, and the exact draw budget.

namespace flatmcts {

struct VerifyMatrix {
  std::vector<std::pair<std::string, EnvSpec>> envs;
  std::uint32_t num_seeds = 20;
  std::uint64_t base_seed = 100;
  std::uint32_t num_simulations = 200;
  std::vector<std::uint32_t> depths = {1, 5, 8};
  double exploration = 1.0;
  OverflowPolicy overflow_policy = OverflowPolicy::kFail;
};

inline VerifyMatrix default_verify_matrix() {
  VerifyMatrix m;
  m.envs.emplace_back("bandit", make_bandit_env({0.2, 0.5, 0.9}));
  m.envs.emplace_back("chain", make_chain_env(5));
  m.envs.emplace_back("bugtrap", make_bug_trap_env());
  return m;
}

struct VerifyCase {
  std::string env_name;
  std::uint64_t seed = 0;
  std::uint32_t depth = 0;
  bool pass = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCase> cases;
  std::uint32_t failures = 0;
};

inline VerifyReport verify_equivalence(const VerifyMatrix& matrix,
                                       std::ostream* progress = nullptr) {
  VerifyReport report;
  for (const auto& [name, env] : matrix.envs) {
    for (std::uint32_t d : matrix.depths) {
      for (std::uint32_t s = 0; s < matrix.num_seeds; ++s) {
        VerifyCase vc;
        vc.env_name = name;
        vc.seed = matrix.base_seed + s;
        vc.depth = d;
        vc.pass = true;
        try {
          const SearchConfig config = make_search_config(
              env, matrix.num_simulations, d, matrix.exploration, vc.seed,
              matrix.overflow_policy);
          const ArraySearchResult array_result =
              search(env.start, env, config);
          const RefSearchResult ref_result =
              search_ref(env.start, env, config);
          const UnsortedSearchResult unsorted_result =
              search_unsorted(env.start, env, config);

          const TreeSnapshot array_snap = snapshot(array_result.store);
          const TreeSnapshot ref_snap = snapshot_ref(ref_result.tree);
          const TreeSnapshot unsorted_snap = snapshot(unsorted_result.store);

          const SnapshotDiff vs_ref = compare_snapshots(array_snap, ref_snap);
          if (!vs_ref.equal) {
            vc.pass = false;
            vc.detail = "array vs tree: " + vs_ref.description;
          }
          const SnapshotDiff vs_unsorted =
              compare_snapshots(array_snap, unsorted_snap);
          if (vc.pass && !vs_unsorted.equal) {
            vc.pass = false;
            vc.detail = "array vs unsorted: " + vs_unsorted.description;
          }
          if (vc.pass && (array_result.best_action != ref_result.best_action ||
                          array_result.best_action !=
                              unsorted_result.best_action)) {
            vc.pass = false;
            vc.detail = "chosen root actions disagree";
          }
          if (vc.pass) {
            std::vector<std::string> violations =
                validate_layers(array_result.store, config);
            for (const auto& impl_stats :
                 {array_result.stats, ref_result.stats,
                  unsorted_result.stats}) {
              const auto draw_violations =
                  validate_draw_count(impl_stats, config);
              violations.insert(violations.end(), draw_violations.begin(),
                                draw_violations.end());
            }
            if (!violations.empty()) {
              vc.pass = false;
              vc.detail = violations.front();
            }
          }
        } catch (const std::exception& e) {
          vc.pass = false;
          vc.detail = std::string("exception: ") + e.what();
        }
        if (!vc.pass) {
          ++report.failures;
        }
        if (progress) {
          *progress << (vc.pass ? "  ok  " : "  FAIL") << " env=" << name
                    << " depth=" << d << " seed=" << vc.seed;
          if (!vc.pass) {
            *progress << "  " << vc.detail;
          }
          *progress << "\n";
        }
        report.cases.push_back(std::move(vc));
      }
    }
  }
  return report;
}

}  // namespace flatmcts
