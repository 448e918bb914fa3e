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

// The collapse-lab workflows. Each writes its artifacts under
// RunConfig::output_dir:
//
//   predict     geometry.json, grams.csv
//   solve       trajectory.csv, final_state.json
//   thresholds  collapse.json
//   seli        seli.json
//   sweep       sweep.csv, plus R_<ratio>/{trajectory.csv,final_state.json}

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "collapse/config.hpp"

namespace collapse {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

inline constexpr const char* kSweepHeader =
    "R,n_A,n_B,status,loss,closed_form_loss,loss_gap,nc1,nc2_w_h,nc2_wwt,nc2_hth,nc3_wh,"
    "collapsed_major,collapsed_minor,minority_collapse,complete_collapse";

/// Result of one solve, as reported in final_state.json and sweep.csv.
struct SolveSummary {
  bool diverged = false;
  std::string message;
  RunResult result;  // meaningful only when !diverged
  double closed_form_loss = 0.0;
};

void cmd_predict(const RunConfig& cfg);

/// Throws DivergenceError (after writing final_state.json) when every seed
/// diverges.
SolveSummary cmd_solve(const RunConfig& cfg);

void cmd_thresholds(const RunConfig& cfg);

/// Requires a two-group spec with K_A == K_B, or all-equal counts with even K.
void cmd_seli(const RunConfig& cfg);

/// Runs the sweep points concurrently, at most `max_threads` at a time
/// (0 = OpenMP default). Per-point failures are recorded in their row.
void cmd_sweep(const RunConfig& cfg, std::size_t max_threads = 0);

/// Dispatches on cfg.workflow.
void run_workflow(const RunConfig& cfg);

/// Parses COLLAPSE_LAB_THREADS. Unset or empty gives 0. Throws ConfigError on
/// anything but a positive integer.
std::size_t sweep_thread_cap(const char* env_value);

/// Entry point of the collapse-lab executable. Returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace collapse
