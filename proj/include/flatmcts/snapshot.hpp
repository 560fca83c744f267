#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flatmcts/state.hpp"

// Canonical text dump of a search tree, independent of how the tree is
// stored.  Each node becomes one line; nodes are listed depth by depth, at
// each depth action records first and then state records, both in creation
// order.  Two implementations that make the same decisions from the same
// draws produce byte-identical dumps (up to float printing, which %.17g
// makes round-trip exact).
//
//   A <depth> <index> <parent> <visits> <value>
//   S <depth> <index> <parent> <visits> <coord...>
//
// <index> is the node's creation rank within its depth.  <parent> is the
// creation rank of the parent node (the action a state was entered
// through, or the state an action was selected from); the root has -1.

namespace flatmcts {

struct SnapshotRecord {
  char kind = 'S';  // 'A' action node, 'S' state node
  std::uint32_t depth = 0;
  std::uint32_t index = 0;
  std::int64_t parent = -1;
  std::uint32_t visits = 0;
  double value = 0.0;  // action nodes only
  StateVec state;      // state nodes only
};

struct TreeSnapshot {
  std::vector<SnapshotRecord> records;

  std::string to_text() const {
    std::string out;
    char buf[160];
    for (const SnapshotRecord& r : records) {
      if (r.kind == 'A') {
        std::snprintf(buf, sizeof buf, "A %u %u %lld %u %.17g\n", r.depth,
                      r.index, static_cast<long long>(r.parent), r.visits,
                      r.value);
        out += buf;
      } else {
        std::snprintf(buf, sizeof buf, "S %u %u %lld %u", r.depth, r.index,
                      static_cast<long long>(r.parent), r.visits);
        out += buf;
        for (std::uint32_t i = 0; i < r.state.dim; ++i) {
          std::snprintf(buf, sizeof buf, " %d", r.state.coords[i]);
          out += buf;
        }
        out += '\n';
      }
    }
    return out;
  }

  static TreeSnapshot from_text(const std::string& text) {
    TreeSnapshot snap;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) {
        continue;
      }
      std::istringstream fields(line);
      SnapshotRecord r;
      long long parent = 0;
      fields >> r.kind >> r.depth >> r.index >> parent >> r.visits;
      if (!fields || (r.kind != 'A' && r.kind != 'S')) {
        throw std::invalid_argument("snapshot: bad record on line " +
                                    std::to_string(line_no));
      }
      r.parent = parent;
      if (r.kind == 'A') {
        fields >> r.value;
        if (!fields) {
          throw std::invalid_argument("snapshot: bad value on line " +
                                      std::to_string(line_no));
        }
      } else {
        std::int64_t coord = 0;
        std::uint32_t dim = 0;
        while (fields >> coord) {
          if (dim >= kMaxStateDims) {
            throw std::invalid_argument("snapshot: too many coordinates on line " +
                                        std::to_string(line_no));
          }
          r.state.coords[dim++] = static_cast<std::int32_t>(coord);
        }
        r.state.dim = dim;
      }
      snap.records.push_back(r);
    }
    return snap;
  }
};

struct SnapshotDiff {
  bool equal = true;
  std::string description;  // first divergence, empty when equal
};

// Compares two snapshots record by record.  Integer fields must match
// exactly; action values may differ by value_rel_tol relative to the
// larger magnitude (they are accumulated means, so different summation
// orders could in principle differ in the last bits).
inline SnapshotDiff compare_snapshots(const TreeSnapshot& a,
                                      const TreeSnapshot& b,
                                      double value_rel_tol = 1e-9) {
  SnapshotDiff diff;
  auto fail = [&diff](const std::string& what) {
    diff.equal = false;
    diff.description = what;
  };
  if (a.records.size() != b.records.size()) {
    fail("record counts differ: " + std::to_string(a.records.size()) + " vs " +
         std::to_string(b.records.size()));
    return diff;
  }
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const SnapshotRecord& ra = a.records[i];
    const SnapshotRecord& rb = b.records[i];
    const std::string where = std::string("record ") + std::to_string(i) +
                              " (depth " + std::to_string(ra.depth) + ", " +
                              (ra.kind == 'A' ? "action " : "state ") +
                              std::to_string(ra.index) + ")";
    if (ra.kind != rb.kind || ra.depth != rb.depth || ra.index != rb.index) {
      fail(where + ": node identity differs");
      return diff;
    }
    if (ra.parent != rb.parent) {
      fail(where + ": parent " + std::to_string(ra.parent) + " vs " +
           std::to_string(rb.parent));
      return diff;
    }
    if (ra.visits != rb.visits) {
      fail(where + ": visits " + std::to_string(ra.visits) + " vs " +
           std::to_string(rb.visits));
      return diff;
    }
    if (ra.kind == 'A') {
      const double scale = std::max({1.0, std::fabs(ra.value), std::fabs(rb.value)});
      if (std::fabs(ra.value - rb.value) > value_rel_tol * scale) {
        fail(where + ": value " + std::to_string(ra.value) + " vs " +
             std::to_string(rb.value));
        return diff;
      }
    } else {
      if (!(ra.state == rb.state)) {
        fail(where + ": state coordinates differ");
        return diff;
      }
    }
  }
  return diff;
}

}  // namespace flatmcts
