// Command line front end: receding-horizon planning runs, the wall-clock
// scaling benchmark, and the cross-implementation equivalence check.
//
// Exit codes: 0 on success, 1 when a verification run found a mismatch,
// 2 for configuration errors (bad flags, bad environment files).

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flatmcts/flatmcts.hpp"

namespace {

constexpr double kVehicleExplorationDefault = 128.0;

flatmcts::EnvSpec resolve_env(const std::string& env_path) {
  if (env_path.empty()) {
    return flatmcts::make_bug_trap_env();
  }
  return flatmcts::load_env_file(env_path);
}

flatmcts::OverflowPolicy parse_overflow(const std::string& name) {
  if (name == "fail") {
    return flatmcts::OverflowPolicy::kFail;
  }
  if (name == "clamp") {
    return flatmcts::OverflowPolicy::kClampToBestMatch;
  }
  throw CLI::ValidationError("--overflow", "must be 'fail' or 'clamp'");
}

struct PlanOptions {
  std::string impl = flatmcts::kBenchImplArray;
  std::string env_path;
  std::string out_dir;
  std::uint32_t n = 5000;
  std::uint32_t depth = 0;  // 0: use the environment's horizon hint
  std::uint32_t steps = 12;
  std::uint64_t seed = 1;
  double exploration = kVehicleExplorationDefault;
  std::string overflow = "fail";
};

int run_plan(const PlanOptions& opt) {
  const flatmcts::EnvSpec env = resolve_env(opt.env_path);
  const std::uint32_t depth = opt.depth != 0 ? opt.depth : env.horizon_hint;
  const flatmcts::OverflowPolicy policy = parse_overflow(opt.overflow);

  std::ofstream trajectory;
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    trajectory.open(opt.out_dir + "/trajectory.csv");
    if (!trajectory) {
      throw std::runtime_error("cannot write trajectory.csv in " + opt.out_dir);
    }
    trajectory << "step,action,x,y,heading,reward,goal\n";
  }

  flatmcts::StateVec state = env.start;
  std::printf("planning: impl=%s n=%u depth=%u steps=%u seed=%llu\n",
              opt.impl.c_str(), opt.n, depth, opt.steps,
              static_cast<unsigned long long>(opt.seed));
  bool reached = false;
  std::uint32_t executed = 0;
  for (std::uint32_t step_idx = 0; step_idx < opt.steps; ++step_idx) {
    const flatmcts::SearchConfig config = flatmcts::make_search_config(
        env, opt.n, depth, opt.exploration, opt.seed + step_idx, policy);
    std::uint32_t best = 0;
    const double seconds =
        flatmcts::timed_search(opt.impl, state, env, config, best);
    state = flatmcts::step_nominal(env, state, best);
    ++executed;
    const double r = flatmcts::reward(env, state);
    const bool goal = flatmcts::goal_reached(env, state);
    std::printf("step %2u: action %u -> (", step_idx + 1, best);
    for (std::uint32_t i = 0; i < state.dim; ++i) {
      std::printf(i ? ", %d" : "%d", state.coords[i]);
    }
    std::printf(")  reward %.4f  %.3fs%s\n", r, seconds,
                goal ? "  [goal]" : "");
    if (trajectory) {
      trajectory << step_idx + 1 << ',' << best << ',' << state.coords[0]
                 << ',' << state.coords[1] << ','
                 << (state.dim > 2 ? state.coords[2] : 0) << ',' << r << ','
                 << (goal ? 1 : 0) << "\n";
    }
    if (goal) {
      reached = true;
      break;
    }
  }
  if (env.family == flatmcts::EnvFamily::kVehicle) {
    std::printf(reached ? "goal reached after %u steps\n"
                        : "goal not reached within %u steps\n",
                executed);
  }
  return 0;
}

struct BenchOptions {
  std::vector<std::string> impls;
  std::vector<std::uint32_t> n_values;
  std::vector<std::uint32_t> depths;
  std::uint32_t trials = 5;
  std::uint32_t steps = 5;
  std::uint64_t seed = 1;
  double exploration = kVehicleExplorationDefault;
  std::string env_path;
  std::string out_dir = "bench_out";
  std::string overflow = "fail";
};

int run_bench(const BenchOptions& opt) {
  const flatmcts::EnvSpec env = resolve_env(opt.env_path);
  flatmcts::BenchConfig config;
  if (!opt.impls.empty()) {
    config.impls = opt.impls;
  }
  if (!opt.n_values.empty()) {
    config.n_values = opt.n_values;
  }
  if (!opt.depths.empty()) {
    config.depths = opt.depths;
  }
  config.trials = opt.trials;
  config.steps = opt.steps;
  config.base_seed = opt.seed;
  config.exploration = opt.exploration;
  config.overflow_policy = parse_overflow(opt.overflow);

  const flatmcts::BenchSummary summary =
      flatmcts::run_benchmark(env, config, &std::cout);
  for (const std::string& note : summary.notes) {
    std::cout << "note: " << note << "\n";
  }

  std::filesystem::create_directories(opt.out_dir);
  flatmcts::emit_csv(summary.records, opt.out_dir + "/bench.csv");
  // Everything downstream is derived from the emitted file, not from the
  // in-memory records, so the CSV is the complete experiment record.
  const std::vector<flatmcts::BenchRecord> records =
      flatmcts::parse_csv(opt.out_dir + "/bench.csv");
  std::vector<std::string> fit_notes;
  const std::vector<flatmcts::SlopeFit> fits =
      flatmcts::fit_slopes(records, &fit_notes);
  for (const std::string& note : fit_notes) {
    std::cout << "note: " << note << "\n";
  }
  flatmcts::emit_csv(fits, opt.out_dir + "/fits.csv");
  flatmcts::emit_plot_data(records, opt.out_dir + "/plot.dat",
                           opt.out_dir + "/plot.svg");

  std::printf("\n%-16s %8s %14s %14s %8s\n", "impl", "n", "slope s/depth",
              "intercept", "r^2");
  for (const flatmcts::SlopeFit& f : fits) {
    std::printf("%-16s %8u %14.6f %14.6f %8.4f\n", f.impl.c_str(), f.n,
                f.slope, f.intercept, f.r_squared);
  }
  for (std::uint32_t n : config.n_values) {
    const flatmcts::SlopeFit* tree =
        flatmcts::find_fit(fits, flatmcts::kBenchImplTree, n);
    const flatmcts::SlopeFit* array =
        flatmcts::find_fit(fits, flatmcts::kBenchImplArray, n);
    if (tree && array && array->slope > 0.0) {
      std::printf("n=%u: tree/array slope ratio %.2f\n", n,
                  tree->slope / array->slope);
    }
  }
  if (summary.failed_runs > 0) {
    std::printf("%u run(s) failed and were excluded\n", summary.failed_runs);
  }
  std::printf("results written to %s\n", opt.out_dir.c_str());
  return 0;
}

struct VerifyOptions {
  std::uint32_t n = 200;
  std::uint32_t num_seeds = 20;
  std::uint64_t seed = 100;
  std::vector<std::uint32_t> depths;
  double exploration = 1.0;
  std::string env_path;
  std::string overflow = "fail";
};

int run_verify(const VerifyOptions& opt) {
  flatmcts::VerifyMatrix matrix = flatmcts::default_verify_matrix();
  matrix.num_simulations = opt.n;
  matrix.num_seeds = opt.num_seeds;
  matrix.base_seed = opt.seed;
  matrix.exploration = opt.exploration;
  matrix.overflow_policy = parse_overflow(opt.overflow);
  if (!opt.depths.empty()) {
    matrix.depths = opt.depths;
  }
  if (!opt.env_path.empty()) {
    // A custom environment replaces the built-in vehicle in the matrix.
    matrix.envs.back() = {"custom", flatmcts::load_env_file(opt.env_path)};
  }

  const flatmcts::VerifyReport report =
      flatmcts::verify_equivalence(matrix, &std::cout);
  std::printf("%zu case(s), %u failure(s)\n", report.cases.size(),
              report.failures);
  return report.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branch-predictable UCT planning over layer-sorted arrays"};
  app.require_subcommand(1);

  PlanOptions plan_opt;
  CLI::App* plan = app.add_subcommand(
      "plan", "Receding-horizon planning run on one environment");
  plan->add_option("--impl", plan_opt.impl,
                   "search implementation: array, tree, array_unsorted");
  plan->add_option("--env", plan_opt.env_path, "environment json file");
  plan->add_option("--n", plan_opt.n, "simulations per search");
  plan->add_option("--depth", plan_opt.depth,
                   "search depth (default: environment horizon hint)");
  plan->add_option("--steps", plan_opt.steps, "maximum executed steps");
  plan->add_option("--seed", plan_opt.seed, "base seed");
  plan->add_option("--c", plan_opt.exploration, "exploration constant");
  plan->add_option("--overflow", plan_opt.overflow,
                   "state branch overflow policy: fail or clamp");
  plan->add_option("--out", plan_opt.out_dir, "directory for trajectory.csv");

  BenchOptions bench_opt;
  CLI::App* bench = app.add_subcommand(
      "bench", "Wall-clock scaling benchmark across implementations");
  bench->add_option("--impl", bench_opt.impls, "implementations to run");
  bench->add_option("--n", bench_opt.n_values, "simulation counts");
  bench->add_option("--depth", bench_opt.depths, "search depths");
  bench->add_option("--trials", bench_opt.trials, "trials per cell");
  bench->add_option("--steps", bench_opt.steps, "planning steps per trial");
  bench->add_option("--seed", bench_opt.seed, "base seed");
  bench->add_option("--c", bench_opt.exploration, "exploration constant");
  bench->add_option("--env", bench_opt.env_path, "environment json file");
  bench->add_option("--out", bench_opt.out_dir, "output directory");
  bench->add_option("--overflow", bench_opt.overflow,
                    "state branch overflow policy: fail or clamp");

  VerifyOptions verify_opt;
  CLI::App* verify = app.add_subcommand(
      "verify", "Cross-implementation equivalence check");
  verify->add_option("--n", verify_opt.n, "simulations per case");
  verify->add_option("--seeds", verify_opt.num_seeds, "seeds per cell");
  verify->add_option("--seed", verify_opt.seed, "base seed");
  verify->add_option("--depth", verify_opt.depths, "search depths");
  verify->add_option("--c", verify_opt.exploration, "exploration constant");
  verify->add_option("--env", verify_opt.env_path,
                     "environment json file (replaces the built-in vehicle)");
  verify->add_option("--overflow", verify_opt.overflow,
                     "state branch overflow policy: fail or clamp");

  try {
    app.parse(argc, argv);
    if (plan->parsed()) {
      return run_plan(plan_opt);
    }
    if (bench->parsed()) {
      return run_bench(bench_opt);
    }
    if (verify->parsed()) {
      return run_verify(verify_opt);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help is a success, anything else is config
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
