#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "flatmcts/array_search.hpp"
#include "flatmcts/env.hpp"
#include "flatmcts/search_config.hpp"
#include "flatmcts/tree_search.hpp"
#include "flatmcts/unsorted_search.hpp"

// Wall-clock scaling experiment: receding-horizon planning runs where
// only the search call is timed, repeated over a grid of (implementation,
// simulation count, search depth).  The quantity of interest is how the
// time of one search grows with depth, summarized as an ordinary
// least-squares slope per (implementation, simulation count).
//
// All implementations at a given (n, depth, trial, step) cell run back
// to back and get the same seed, so they plan identical trees, drive
// identical trajectories, and face the same machine state; the rows
// differ only in seconds.

namespace flatmcts {

inline const char* kBenchImplTree = "tree";
inline const char* kBenchImplArray = "array";
inline const char* kBenchImplUnsorted = "array_unsorted";

struct BenchRecord {
  std::string impl;
  std::uint32_t n = 0;
  std::uint32_t depth = 0;
  std::uint32_t trial = 0;
  std::uint32_t step = 0;
  double seconds = 0.0;
};

struct BenchConfig {
  std::vector<std::string> impls = {kBenchImplTree, kBenchImplArray,
                                    kBenchImplUnsorted};
  std::vector<std::uint32_t> n_values = {2000, 10000};
  std::vector<std::uint32_t> depths = {4, 6, 8, 10};
  std::uint32_t trials = 5;
  std::uint32_t steps = 5;
  std::uint64_t base_seed = 1;
  double exploration = 128.0;
  OverflowPolicy overflow_policy = OverflowPolicy::kFail;
  bool warmup = true;
};

struct BenchSummary {
  std::vector<BenchRecord> records;
  std::uint32_t failed_runs = 0;
  std::vector<std::string> notes;
};

// Settles the machine between timed runs: the allocator is consolidated
// and trimmed back to an empty baseline, and a sweep over a buffer larger
// than the last-level cache evicts the previous run's data.  Without
// this, whichever implementation runs next inherits the last one's
// teardown bill and a heap whose fragmentation depends on who ran before.
inline void scrub_between_runs() {
#if defined(__GLIBC__)
  malloc_trim(0);
#endif
  static std::vector<std::uint64_t> sweep(
      (std::size_t{32} << 20) / sizeof(std::uint64_t), 1);
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < sweep.size(); i += 8) {
    sweep[i] += 1;
    acc += sweep[i];
  }
  volatile std::uint64_t sink = acc;
  (void)sink;
}

// Seed for one bench cell.  Depends on everything except the
// implementation, so the implementations face identical problems.
inline std::uint64_t bench_seed(std::uint64_t base, std::uint32_t n,
                                std::uint32_t depth, std::uint32_t trial,
                                std::uint32_t step) {
  std::uint64_t h = base;
  for (std::uint64_t piece : {static_cast<std::uint64_t>(n),
                              static_cast<std::uint64_t>(depth),
                              static_cast<std::uint64_t>(trial),
                              static_cast<std::uint64_t>(step)}) {
    h ^= piece + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

// One timed search with the implementation picked by name; returns the
// elapsed seconds and the chosen root action through `best`.
inline double timed_search(const std::string& impl, const StateVec& root,
                           const EnvSpec& env, const SearchConfig& config,
                           std::uint32_t& best) {
  using clock = std::chrono::steady_clock;
  if (impl == kBenchImplArray) {
    const auto t0 = clock::now();
    const ArraySearchResult r = search(root, env, config);
    const auto t1 = clock::now();
    best = r.best_action;
    return std::chrono::duration<double>(t1 - t0).count();
  }
  if (impl == kBenchImplTree) {
    const auto t0 = clock::now();
    const RefSearchResult r = search_ref(root, env, config);
    const auto t1 = clock::now();
    best = r.best_action;
    return std::chrono::duration<double>(t1 - t0).count();
  }
  if (impl == kBenchImplUnsorted) {
    const auto t0 = clock::now();
    const UnsortedSearchResult r = search_unsorted(root, env, config);
    const auto t1 = clock::now();
    best = r.best_action;
    return std::chrono::duration<double>(t1 - t0).count();
  }
  throw std::invalid_argument("bench: unknown implementation " + impl);
}

inline BenchSummary run_benchmark(const EnvSpec& env, const BenchConfig& config,
                                  std::ostream* progress = nullptr) {
  if (config.trials == 0 || config.steps == 0) {
    throw std::invalid_argument("bench: trials and steps must be positive");
  }
  BenchSummary summary;
  for (std::uint32_t n : config.n_values) {
    for (std::uint32_t depth : config.depths) {
      if (progress) {
        *progress << "bench n=" << n << " depth=" << depth << std::flush;
      }
      if (config.warmup) {
        // One untimed search per implementation to fault in code and
        // allocator state.
        for (const std::string& impl : config.impls) {
          try {
            SearchConfig sc = make_search_config(
                env, n, depth, config.exploration,
                bench_seed(config.base_seed, n, depth, 0, 0),
                config.overflow_policy);
            std::uint32_t ignored = 0;
            scrub_between_runs();
            timed_search(impl, env.start, env, sc, ignored);
          } catch (const std::exception&) {
            // The timed runs below report the failure.
          }
        }
      }
      for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
        StateVec state = env.start;
        for (std::uint32_t step_idx = 0; step_idx < config.steps; ++step_idx) {
          SearchConfig sc = make_search_config(
              env, n, depth, config.exploration,
              bench_seed(config.base_seed, n, depth, trial, step_idx),
              config.overflow_policy);
          std::uint32_t best = 0;
          bool advanced = false;
          // The in-cell order rotates from cell to cell so that no
          // implementation always occupies the same position.
          const std::size_t shift =
              (static_cast<std::size_t>(trial) * config.steps + step_idx) %
              config.impls.size();
          for (std::size_t k = 0; k < config.impls.size(); ++k) {
            const std::string& impl =
                config.impls[(k + shift) % config.impls.size()];
            try {
              scrub_between_runs();
              const double seconds = timed_search(impl, state, env, sc, best);
              summary.records.push_back(
                  {impl, n, depth, trial, step_idx, seconds});
              advanced = true;
            } catch (const std::exception& e) {
              ++summary.failed_runs;
              summary.notes.push_back("failed: " + impl + " n=" +
                                      std::to_string(n) + " depth=" +
                                      std::to_string(depth) + " trial=" +
                                      std::to_string(trial) + " step=" +
                                      std::to_string(step_idx) + ": " +
                                      e.what());
            }
          }
          if (!advanced) {
            break;  // trajectory cannot continue without an action
          }
          state = step_nominal(env, state, best);
        }
      }
      if (progress) {
        *progress << " done\n" << std::flush;
      }
    }
  }
  return summary;
}

struct DepthMean {
  std::uint32_t depth = 0;
  double mean_seconds = 0.0;
  double stddev = 0.0;
  std::uint32_t count = 0;
};

struct SlopeFit {
  std::string impl;
  std::uint32_t n = 0;
  double slope = 0.0;          // seconds per depth step
  double intercept = 0.0;
  double r_squared = 0.0;
  std::uint32_t depth_points = 0;
};

// Per-depth mean and standard deviation of one (impl, n) group.
inline std::vector<DepthMean> depth_means(const std::vector<BenchRecord>& records,
                                          const std::string& impl,
                                          std::uint32_t n) {
  std::map<std::uint32_t, std::vector<double>> by_depth;
  for (const BenchRecord& r : records) {
    if (r.impl == impl && r.n == n) {
      by_depth[r.depth].push_back(r.seconds);
    }
  }
  std::vector<DepthMean> out;
  for (const auto& [depth, xs] : by_depth) {
    DepthMean m;
    m.depth = depth;
    m.count = static_cast<std::uint32_t>(xs.size());
    double sum = 0.0;
    for (double x : xs) {
      sum += x;
    }
    m.mean_seconds = sum / static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
      var += (x - m.mean_seconds) * (x - m.mean_seconds);
    }
    m.stddev = xs.size() > 1
                   ? std::sqrt(var / static_cast<double>(xs.size() - 1))
                   : 0.0;
    out.push_back(m);
  }
  return out;
}

// Least-squares line through the per-depth means of each (impl, n) group.
// Groups with fewer than three distinct depths are skipped.
inline std::vector<SlopeFit> fit_slopes(const std::vector<BenchRecord>& records,
                                        std::vector<std::string>* notes = nullptr) {
  std::vector<std::pair<std::string, std::uint32_t>> groups;
  for (const BenchRecord& r : records) {
    const std::pair<std::string, std::uint32_t> key{r.impl, r.n};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) {
      groups.push_back(key);
    }
  }
  std::vector<SlopeFit> fits;
  for (const auto& [impl, n] : groups) {
    const std::vector<DepthMean> means = depth_means(records, impl, n);
    if (means.size() < 3) {
      if (notes) {
        notes->push_back("fit skipped for " + impl + " n=" + std::to_string(n) +
                         ": only " + std::to_string(means.size()) +
                         " depth points");
      }
      continue;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    const double k = static_cast<double>(means.size());
    for (const DepthMean& m : means) {
      const double x = static_cast<double>(m.depth);
      sx += x;
      sy += m.mean_seconds;
      sxx += x * x;
      sxy += x * m.mean_seconds;
      syy += m.mean_seconds * m.mean_seconds;
    }
    const double denom = k * sxx - sx * sx;
    SlopeFit fit;
    fit.impl = impl;
    fit.n = n;
    fit.depth_points = static_cast<std::uint32_t>(means.size());
    fit.slope = (k * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / k;
    const double ss_tot = syy - sy * sy / k;
    double ss_res = 0.0;
    for (const DepthMean& m : means) {
      const double pred = fit.intercept + fit.slope * static_cast<double>(m.depth);
      ss_res += (m.mean_seconds - pred) * (m.mean_seconds - pred);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fits.push_back(fit);
  }
  return fits;
}

inline const SlopeFit* find_fit(const std::vector<SlopeFit>& fits,
                                const std::string& impl, std::uint32_t n) {
  for (const SlopeFit& f : fits) {
    if (f.impl == impl && f.n == n) {
      return &f;
    }
  }
  return nullptr;
}

inline const std::string kBenchCsvHeader = "impl,n,depth,trial,step,seconds";

inline void emit_csv(const std::vector<BenchRecord>& records,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("bench: cannot write " + path);
  }
  out << kBenchCsvHeader << "\n";
  char buf[64];
  for (const BenchRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%.9e", r.seconds);
    out << r.impl << ',' << r.n << ',' << r.depth << ',' << r.trial << ','
        << r.step << ',' << buf << "\n";
  }
}

inline void emit_csv(const std::vector<SlopeFit>& fits,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("bench: cannot write " + path);
  }
  out << "impl,n,slope,intercept,r_squared,depth_points\n";
  char buf[128];
  for (const SlopeFit& f : fits) {
    std::snprintf(buf, sizeof buf, "%.9e,%.9e,%.6f", f.slope, f.intercept,
                  f.r_squared);
    out << f.impl << ',' << f.n << ',' << buf << ',' << f.depth_points << "\n";
  }
}

inline std::vector<BenchRecord> parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("bench: cannot read " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kBenchCsvHeader) {
    throw std::runtime_error("bench: bad csv header in " + path);
  }
  std::vector<BenchRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    BenchRecord r;
    std::string token;
    try {
      std::getline(fields, r.impl, ',');
      std::getline(fields, token, ',');
      r.n = static_cast<std::uint32_t>(std::stoul(token));
      std::getline(fields, token, ',');
      r.depth = static_cast<std::uint32_t>(std::stoul(token));
      std::getline(fields, token, ',');
      r.trial = static_cast<std::uint32_t>(std::stoul(token));
      std::getline(fields, token, ',');
      r.step = static_cast<std::uint32_t>(std::stoul(token));
      std::getline(fields, token);
      r.seconds = std::stod(token);
    } catch (const std::exception&) {
      throw std::runtime_error("bench: bad csv row at line " +
                               std::to_string(line_no) + " in " + path);
    }
    records.push_back(r);
  }
  return records;
}

// Gnuplot-style blocks (one per impl/n group, two blank lines between) of
// "depth mean stddev count" rows, plus a small self-contained SVG chart of
// the same means.  Both are derived from the records alone.
inline void emit_plot_data(const std::vector<BenchRecord>& records,
                           const std::string& dat_path,
                           const std::string& svg_path) {
  std::vector<std::pair<std::string, std::uint32_t>> groups;
  for (const BenchRecord& r : records) {
    const std::pair<std::string, std::uint32_t> key{r.impl, r.n};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) {
      groups.push_back(key);
    }
  }

  std::ofstream dat(dat_path);
  if (!dat) {
    throw std::runtime_error("bench: cannot write " + dat_path);
  }
  dat << "# depth  mean_seconds  stddev  count\n";
  for (const auto& [impl, n] : groups) {
    dat << "# impl=" << impl << " n=" << n << "\n";
    for (const DepthMean& m : depth_means(records, impl, n)) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%u %.9e %.9e %u\n", m.depth,
                    m.mean_seconds, m.stddev, m.count);
      dat << buf;
    }
    dat << "\n\n";
  }
  dat.close();

  // Chart geometry.
  const double width = 640, height = 420;
  const double left = 70, right = 20, top = 30, bottom = 50;
  double max_depth = 0, max_mean = 0;
  std::uint32_t min_depth = UINT32_MAX;
  for (const auto& [impl, n] : groups) {
    for (const DepthMean& m : depth_means(records, impl, n)) {
      max_depth = std::max(max_depth, static_cast<double>(m.depth));
      min_depth = std::min(min_depth, m.depth);
      max_mean = std::max(max_mean, m.mean_seconds);
    }
  }
  if (groups.empty() || max_mean == 0.0) {
    max_mean = 1.0;
    max_depth = 1.0;
    min_depth = 0;
  }
  const double x0 = static_cast<double>(min_depth);
  const double x_span = std::max(1.0, max_depth - x0);
  auto px = [&](double depth) {
    return left + (depth - x0) / x_span * (width - left - right);
  };
  auto py = [&](double secs) {
    return height - bottom - secs / max_mean * (height - top - bottom);
  };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream svg(svg_path);
  if (!svg) {
    throw std::runtime_error("bench: cannot write " + svg_path);
  }
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\""
      << width - right << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << height - bottom << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << (left + width - right) / 2 << "\" y=\""
      << height - 12 << "\" text-anchor=\"middle\" font-size=\"13\">search depth"
      << "</text>\n"
      << "<text x=\"16\" y=\"" << (top + height - bottom) / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
      << (top + height - bottom) / 2 << ")\">mean search seconds</text>\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", max_mean);
  svg << "<text x=\"" << left - 6 << "\" y=\"" << top + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << buf << "</text>\n"
      << "<text x=\"" << left - 6 << "\" y=\"" << height - bottom + 4
      << "\" text-anchor=\"end\" font-size=\"11\">0</text>\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& [impl, n] = groups[g];
    const char* color = palette[g % 6];
    std::string points;
    for (const DepthMean& m : depth_means(records, impl, n)) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ",
                    px(static_cast<double>(m.depth)), py(m.mean_seconds));
      points += buf;
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(g);
    svg << "<line x1=\"" << width - right - 150 << "\" y1=\"" << ly
        << "\" x2=\"" << width - right - 130 << "\" y2=\"" << ly
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << width - right - 124 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\">" << impl << " n=" << n << "</text>\n";
  }
  svg << "</svg>\n";
}

}  // namespace flatmcts
