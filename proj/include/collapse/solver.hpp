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

// Projected first-order minimization of the regularized cross-entropy
// objective over (W, H) with H >= 0.

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "collapse/geometry.hpp"
#include "collapse/metrics.hpp"

namespace collapse {

enum class Method { kProjectedGradient, kAdam };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct SolverConfig {
  std::size_t max_iters = 50000;
  double step_size = 1e-2;
  Method method = Method::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // The step is multiplied by decay_factor once decay_at * max_iters
  // iterations have run. decay_factor = 1 disables the schedule.
  double decay_factor = 0.1;
  double decay_at = 0.5;
  double stop_residual = 1e-10;
  std::size_t log_interval = 1000;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  double probe_step = 1.0;
  double rank_tol = 1e-10;

  void validate() const;
};

struct SolverState {
  Matrix w;
  Matrix h;
  std::size_t iter = 0;
  double loss = 0.0;
  double residual = 0.0;
};

struct Snapshot {
  std::size_t iter = 0;
  double loss = 0.0;
  double residual = 0.0;
  MetricsReport metrics;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
};

struct RunResult {
  SolverState state;
  Trajectory trajectory;
  bool converged = false;  // stopped on the residual criterion
  std::uint64_t seed = 0;
};

/// Raised when the loss exceeds ten times its initial value or turns
/// non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::size_t iter, double loss)
      : std::runtime_error(what), iter_(iter), loss_(loss) {}
  std::size_t iter() const noexcept { return iter_; }
  double loss() const noexcept { return loss_; }

 private:
  std::size_t iter_;
  double loss_;
};

/// Objective value. Throws std::invalid_argument if H has a negative entry.
double objective(const Matrix& w, const Matrix& h, const ProblemSpec& spec);

/// (dL/dW, dL/dH).
std::pair<Matrix, Matrix> gradients(const Matrix& w, const Matrix& h, const ProblemSpec& spec);

/// ||gW||_F + ||(H - max(H - t gH, 0)) / t||_F, t = probe_step.
double projected_residual(const Matrix& w, const Matrix& h, const ProblemSpec& spec, double probe_step = 1.0);
double projected_residual(const Matrix& h, const Matrix& grad_w, const Matrix& grad_h, double probe_step);

/// W ~ N(0, 1) * init_scale / sqrt(d), H = |N(0, 1)| * init_scale / sqrt(d).
std::pair<Matrix, Matrix> init(const ProblemSpec& spec, std::uint64_t seed, double init_scale);

/// One deterministic run from init(spec, config.seed, config.init_scale).
/// Snapshots are taken at iteration 0, every log_interval iterations and at
/// the final iteration.
RunResult run(const ProblemSpec& spec, const SolverConfig& config);

/// Same, from a given starting point.
RunResult run_from(const ProblemSpec& spec, const SolverConfig& config, Matrix w, Matrix h);

/// Runs seeds config.seed, config.seed + 1, ... (in parallel) and returns the
/// lowest final loss; ties go to the earlier seed. Diverged seeds are
/// skipped; if every seed diverges the first DivergenceError is rethrown.
RunResult run_best_of(const ProblemSpec& spec, const SolverConfig& config, std::size_t num_seeds);

}  // namespace collapse
