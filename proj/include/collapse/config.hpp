// Copyright 2026 The collapse-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON run configuration. Example:
//
//   {"K": 2, "d": 3, "counts": [8, 2], "lambda_w": 0.01, "lambda_h": 0.01,
//    "solver": {"method": "adam", "max_iters": 50000, "step_size": 0.01,
//               "log_interval": 1000, "seed": 0},
//    "sweep": {"ratios": [5, 10, 20, 50], "K_A": 1, "K_B": 1, "n_B": 2},
//    "lambda_ladder": [1e-2, 1e-4, 1e-6, 1e-8, 1e-10]}
//
// README.md documents every key.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "collapse/geometry.hpp"
#include "collapse/solver.hpp"

namespace collapse {

enum class Workflow { kPredict, kSolve, kThresholds, kSeli, kSweep };

std::string to_string(Workflow w);
Workflow workflow_from_string(const std::string& name);

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure to read or write an artifact (exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Imbalance-ratio sweep: for each R, K_A classes with round(R n_B) samples
/// and K_B classes with n_B samples.
struct SweepSpec {
  std::vector<double> ratios;
  std::size_t num_major = 1;
  std::size_t num_minor = 1;
  std::size_t n_minor = 1;
};

struct RunConfig {
  ProblemSpec spec;
  SolverConfig solver;
  std::filesystem::path output_dir = ".";
  Workflow workflow = Workflow::kPredict;
  std::optional<SweepSpec> sweep;  // set iff workflow == kSweep
  std::vector<double> lambda_ladder = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10};
  std::size_t seeds = 8;
};

/// Throws ConfigError on missing or ill-typed keys and on specs that fail
/// validation.
RunConfig parse_config(const nlohmann::json& doc, Workflow workflow);
RunConfig load_config(const std::filesystem::path& path, Workflow workflow);

/// ProblemSpec for one sweep point.
ProblemSpec sweep_point(const RunConfig& cfg, double ratio);

nlohmann::json to_json(const ProblemSpec& spec);
nlohmann::json to_json(const SolverConfig& cfg);

}  // namespace collapse
