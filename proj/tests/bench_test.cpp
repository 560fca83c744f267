#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flatmcts/bench.hpp"
#include "flatmcts/env.hpp"

namespace flatmcts {
namespace {

std::string temp_path(const std::string& name) {
  return testing::TempDir() + name;
}

TEST(BenchSeed, DependsOnEveryFieldExceptTheImplementation) {
  const std::uint64_t base = bench_seed(1, 2000, 4, 0, 0);
  EXPECT_EQ(bench_seed(1, 2000, 4, 0, 0), base);
  EXPECT_NE(bench_seed(2, 2000, 4, 0, 0), base);
  EXPECT_NE(bench_seed(1, 2001, 4, 0, 0), base);
  EXPECT_NE(bench_seed(1, 2000, 5, 0, 0), base);
  EXPECT_NE(bench_seed(1, 2000, 4, 1, 0), base);
  EXPECT_NE(bench_seed(1, 2000, 4, 0, 1), base);
}

TEST(TimedSearch, AllThreeImplementationsAnswerIdentically) {
  const EnvSpec env = make_bandit_env({0.2, 0.5, 0.9});
  const SearchConfig config = make_search_config(env, 400, 2, 1.0, 9);
  std::uint32_t best_tree = 0, best_array = 0, best_unsorted = 0;
  const double t_tree =
      timed_search(kBenchImplTree, env.start, env, config, best_tree);
  const double t_array =
      timed_search(kBenchImplArray, env.start, env, config, best_array);
  const double t_unsorted =
      timed_search(kBenchImplUnsorted, env.start, env, config, best_unsorted);
  EXPECT_GE(t_tree, 0.0);
  EXPECT_GE(t_array, 0.0);
  EXPECT_GE(t_unsorted, 0.0);
  EXPECT_EQ(best_tree, best_array);
  EXPECT_EQ(best_array, best_unsorted);

  std::uint32_t ignored = 0;
  EXPECT_THROW(timed_search("linked_list", env.start, env, config, ignored),
               std::invalid_argument);
}

TEST(RunBenchmark, ProducesOneRecordPerCell) {
  const EnvSpec env = make_bandit_env({0.2, 0.5, 0.9});
  BenchConfig config;
  config.n_values = {64};
  config.depths = {1, 2, 3};
  config.trials = 2;
  config.steps = 2;
  config.exploration = 1.0;
  config.warmup = false;
  const BenchSummary summary = run_benchmark(env, config);
  EXPECT_EQ(summary.failed_runs, 0u);
  EXPECT_EQ(summary.records.size(), 3u * 1u * 3u * 2u * 2u);
  for (const BenchRecord& r : summary.records) {
    EXPECT_GE(r.seconds, 0.0);
    EXPECT_EQ(r.n, 64u);
  }
}

TEST(DepthMeans, ComputesMeanAndSampleDeviation) {
  std::vector<BenchRecord> records = {
      {"array", 100, 4, 0, 0, 0.010},
      {"array", 100, 4, 1, 0, 0.014},
      {"array", 100, 6, 0, 0, 0.020},
      {"tree", 100, 4, 0, 0, 0.999},  // other group, must be ignored
  };
  const auto means = depth_means(records, "array", 100);
  ASSERT_EQ(means.size(), 2u);
  EXPECT_EQ(means[0].depth, 4u);
  EXPECT_EQ(means[0].count, 2u);
  EXPECT_NEAR(means[0].mean_seconds, 0.012, 1e-15);
  EXPECT_NEAR(means[0].stddev, 0.002 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(means[1].depth, 6u);
  EXPECT_EQ(means[1].stddev, 0.0);
}

// Exact synthetic timings recover the line they were drawn from.
TEST(FitSlopes, RecoversAnExactLinearLaw) {
  std::vector<BenchRecord> records;
  for (std::uint32_t depth : {2u, 4u, 6u, 8u}) {
    for (std::uint32_t trial = 0; trial < 3; ++trial) {
      records.push_back({"array", 500, depth, trial, 0, 0.010 + 0.003 * depth});
      records.push_back({"tree", 500, depth, trial, 0, 0.050 + 0.011 * depth});
    }
  }
  const auto fits = fit_slopes(records);
  ASSERT_EQ(fits.size(), 2u);
  const SlopeFit* array_fit = find_fit(fits, "array", 500);
  const SlopeFit* tree_fit = find_fit(fits, "tree", 500);
  ASSERT_NE(array_fit, nullptr);
  ASSERT_NE(tree_fit, nullptr);
  EXPECT_NEAR(array_fit->slope, 0.003, 1e-12);
  EXPECT_NEAR(array_fit->intercept, 0.010, 1e-12);
  EXPECT_NEAR(array_fit->r_squared, 1.0, 1e-9);
  EXPECT_NEAR(tree_fit->slope, 0.011, 1e-12);
  EXPECT_EQ(array_fit->depth_points, 4u);
  EXPECT_EQ(find_fit(fits, "array", 501), nullptr);
}

TEST(FitSlopes, SkipsGroupsWithTooFewDepths) {
  std::vector<BenchRecord> records = {
      {"array", 100, 4, 0, 0, 0.01},
      {"array", 100, 6, 0, 0, 0.02},
  };
  std::vector<std::string> notes;
  const auto fits = fit_slopes(records, &notes);
  EXPECT_TRUE(fits.empty());
  ASSERT_EQ(notes.size(), 1u);
  EXPECT_NE(notes[0].find("fit skipped"), std::string::npos);
}

TEST(BenchCsv, WritesAndParsesRoundTrip) {
  std::vector<BenchRecord> records = {
      {"array", 2000, 4, 0, 0, 1.234567891e-3},
      {"tree", 10000, 10, 4, 3, 0.5},
  };
  const std::string path = temp_path("bench_roundtrip.csv");
  emit_csv(records, path);
  const auto parsed = parse_csv(path);
  ASSERT_EQ(parsed.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(parsed[i].impl, records[i].impl);
    EXPECT_EQ(parsed[i].n, records[i].n);
    EXPECT_EQ(parsed[i].depth, records[i].depth);
    EXPECT_EQ(parsed[i].trial, records[i].trial);
    EXPECT_EQ(parsed[i].step, records[i].step);
    // Serialized at nine significant digits.
    EXPECT_NEAR(parsed[i].seconds, records[i].seconds,
                1e-8 * records[i].seconds + 1e-18);
  }
}

TEST(BenchCsv, RejectsForeignFiles) {
  const std::string path = temp_path("bench_bad.csv");
  {
    std::ofstream out(path);
    out << "time,depth\n1,2\n";
  }
  EXPECT_THROW(parse_csv(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << kBenchCsvHeader << "\n";
    out << "array,notanumber,4,0,0,0.5\n";
  }
  EXPECT_THROW(parse_csv(path), std::runtime_error);
  EXPECT_THROW(parse_csv(temp_path("no_such_file.csv")), std::runtime_error);
}

TEST(PlotData, EmitsBlocksAndAChart) {
  std::vector<BenchRecord> records;
  for (std::uint32_t depth : {4u, 6u, 8u}) {
    records.push_back({"array", 100, depth, 0, 0, 0.001 * depth});
    records.push_back({"tree", 100, depth, 0, 0, 0.002 * depth});
  }
  const std::string dat_path = temp_path("bench_plot.dat");
  const std::string svg_path = temp_path("bench_plot.svg");
  emit_plot_data(records, dat_path, svg_path);

  std::ifstream dat(dat_path);
  ASSERT_TRUE(dat.good());
  std::stringstream dat_text;
  dat_text << dat.rdbuf();
  EXPECT_NE(dat_text.str().find("# impl=array n=100"), std::string::npos);
  EXPECT_NE(dat_text.str().find("# impl=tree n=100"), std::string::npos);

  std::ifstream svg(svg_path);
  ASSERT_TRUE(svg.good());
  std::stringstream svg_text;
  svg_text << svg.rdbuf();
  EXPECT_NE(svg_text.str().find("<svg"), std::string::npos);
  EXPECT_NE(svg_text.str().find("polyline"), std::string::npos);
}

}  // namespace
}  // namespace flatmcts
