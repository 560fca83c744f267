#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flatmcts/env.hpp"

// JSON description of a vehicle environment, for the command line tool.
// Expected shape:
//
// {
//   "dim": 3,
//   "actions": [[1.0, 0.0], [1.0, 1.0], [1.0, -1.0], [0.0, 0.0]],
//   "grid_resolution": 1.0,
//   "noise_scale": 1.0,
//   "obstacles": [{"min": [-1.5, 1.5], "max": [1.5, 2.5]}, ...],
//   "goal": {"center": [2.5, 3.5], "radius": 1.2},
//   "obstacle_penalty": -50.0,
//   "start": [0, 0, 0],          // optional, grid cells (x, y, heading)
//   "horizon_hint": 8            // optional
// }

namespace flatmcts {

inline EnvSpec env_from_json(const nlohmann::json& j) {
  EnvSpec env;
  env.family = EnvFamily::kVehicle;
  try {
    env.dim = j.at("dim").get<std::uint32_t>();
    for (const auto& row : j.at("actions")) {
      env.actions.rows.push_back(row.get<std::vector<double>>());
    }
    env.grid_resolution = j.at("grid_resolution").get<double>();
    env.noise_scale = j.at("noise_scale").get<double>();
    for (const auto& ob : j.at("obstacles")) {
      const auto lo = ob.at("min").get<std::vector<double>>();
      const auto hi = ob.at("max").get<std::vector<double>>();
      if (lo.size() != 2 || hi.size() != 2) {
        throw std::invalid_argument("env json: obstacle corners must be 2-d");
      }
      env.obstacles.push_back({lo[0], lo[1], hi[0], hi[1]});
    }
    const auto& goal = j.at("goal");
    const auto center = goal.at("center").get<std::vector<double>>();
    if (center.size() != 2) {
      throw std::invalid_argument("env json: goal center must be 2-d");
    }
    env.goal = {center[0], center[1], goal.at("radius").get<double>()};
    env.obstacle_penalty = j.at("obstacle_penalty").get<double>();
    env.start.dim = env.dim;
    if (j.contains("start")) {
      const auto start = j.at("start").get<std::vector<std::int32_t>>();
      if (start.size() != env.dim) {
        throw std::invalid_argument("env json: start length must equal dim");
      }
      for (std::size_t i = 0; i < start.size(); ++i) {
        env.start.coords[i] = start[i];
      }
      env.start.coords[2] = wrap_heading(env.start.coords[2]);
    }
    if (j.contains("horizon_hint")) {
      env.horizon_hint = j.at("horizon_hint").get<std::uint32_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("env json: ") + e.what());
  }
  validate_env(env);
  return env;
}

inline EnvSpec load_env_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("env json: cannot open " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("env json: parse error: ") +
                                e.what());
  }
  return env_from_json(j);
}

}  // namespace flatmcts
