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

#include "collapse/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <random>

#include "collapse/kernels.hpp"

namespace collapse {

std::string to_string(Method m) {
  switch (m) {
    case Method::kProjectedGradient:
      return "projected-gradient";
    case Method::kAdam:
      return "adam";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "projected-gradient" || name == "pgd" || name == "plain") return Method::kProjectedGradient;
  if (name == "adam" || name == "adaptive-moments") return Method::kAdam;
  throw std::invalid_argument("unknown solver method '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw std::invalid_argument("SolverConfig: step_size must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("SolverConfig: beta1 and beta2 must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("SolverConfig: epsilon must be > 0");
  if (!(stop_residual > 0.0)) throw std::invalid_argument("SolverConfig: stop_residual must be > 0");
  if (log_interval < 1) throw std::invalid_argument("SolverConfig: log_interval must be >= 1");
  if (!(init_scale > 0.0)) throw std::invalid_argument("SolverConfig: init_scale must be > 0");
  if (!(decay_factor > 0.0) || !(decay_at >= 0.0)) throw std::invalid_argument("SolverConfig: bad decay schedule");
  if (!(probe_step > 0.0)) throw std::invalid_argument("SolverConfig: probe_step must be > 0");
  if (!(rank_tol > 0.0)) throw std::invalid_argument("SolverConfig: rank_tol must be > 0");
}

double objective(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  if (std::any_of(h.data().begin(), h.data().end(), [](double v) { return v < 0.0; })) {
    throw std::invalid_argument("objective: H has a negative entry");
  }
  return kernels::loss(w, h, spec);
}

std::pair<Matrix, Matrix> gradients(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  kernels::Evaluation e = kernels::evaluate(w, h, spec);
  return {std::move(e.grad_w), std::move(e.grad_h)};
}

double projected_residual(const Matrix& h, const Matrix& grad_w, const Matrix& grad_h, double probe_step) {
  double sh = 0.0;
  const auto hv = h.data();
  const auto gv = grad_h.data();
  for (std::size_t i = 0; i < hv.size(); ++i) {
    const double moved = std::max(hv[i] - probe_step * gv[i], 0.0);
    const double r = (hv[i] - moved) / probe_step;
    sh += r * r;
  }
  return linalg::frobenius_norm(grad_w) + std::sqrt(sh);
}

double projected_residual(const Matrix& w, const Matrix& h, const ProblemSpec& spec, double probe_step) {
  const auto [gw, gh] = gradients(w, h, spec);
  return projected_residual(h, gw, gh, probe_step);
}

std::pair<Matrix, Matrix> init(const ProblemSpec& spec, std::uint64_t seed, double init_scale) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = init_scale / std::sqrt(static_cast<double>(spec.dim));
  Matrix w(spec.num_classes, spec.dim);
  for (double& v : w.data()) v = scale * normal(rng);
  Matrix h(spec.dim, spec.total());
  for (double& v : h.data()) v = scale * std::abs(normal(rng));
  return {std::move(w), std::move(h)};
}

namespace {

class AdamMoments {
 public:
  AdamMoments(std::size_t n, const SolverConfig& cfg) : m_(n, 0.0), v_(n, 0.0), cfg_(cfg) {}

  // One bias-corrected step on `x` in place.
  void step(std::span<double> x, std::span<const double> g, double lr, std::size_t t) {
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g[i];
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      x[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
    }
  }

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  const SolverConfig& cfg_;
};

void clamp_nonnegative(Matrix& h) {
  for (double& v : h.data()) v = std::max(v, 0.0);
}

Snapshot snapshot(const SolverState& s, const ProblemSpec& spec, const SolverConfig& cfg) {
  if (std::any_of(s.h.data().begin(), s.h.data().end(), [](double v) { return v < 0.0; })) {
    throw std::logic_error("solver: H left the nonnegative orthant");
  }
  return {s.iter, s.loss, s.residual, evaluate_metrics(s.w, s.h, spec, cfg.rank_tol)};
}

}  // namespace

RunResult run_from(const ProblemSpec& spec, const SolverConfig& config, Matrix w, Matrix h) {
  spec.validate();
  config.validate();
  if (w.rows() != spec.num_classes || w.cols() != spec.dim || h.rows() != spec.dim || h.cols() != spec.total()) {
    throw linalg::DimensionError("run_from: starting point has the wrong shape");
  }
  clamp_nonnegative(h);

  RunResult result;
  result.seed = config.seed;
  SolverState& s = result.state;
  s.w = std::move(w);
  s.h = std::move(h);
  kernels::Evaluation e = kernels::evaluate(s.w, s.h, spec);
  s.loss = e.loss;
  s.residual = projected_residual(s.h, e.grad_w, e.grad_h, config.probe_step);
  const double initial_loss = s.loss;
  result.trajectory.snapshots.push_back(snapshot(s, spec, config));

  const auto decay_iter = static_cast<std::size_t>(config.decay_at * static_cast<double>(config.max_iters));
  AdamMoments adam_w(s.w.size(), config);
  AdamMoments adam_h(s.h.size(), config);

  while (s.iter < config.max_iters && s.residual > config.stop_residual) {
    const std::size_t t = s.iter + 1;
    const double lr = config.step_size * (s.iter >= decay_iter ? config.decay_factor : 1.0);
    if (config.method == Method::kAdam) {
      adam_w.step(s.w.data(), e.grad_w.data(), lr, t);
      adam_h.step(s.h.data(), e.grad_h.data(), lr, t);
    } else {
      s.w -= e.grad_w * lr;
      s.h -= e.grad_h * lr;
    }
    clamp_nonnegative(s.h);
    s.iter = t;

    e = kernels::evaluate(s.w, s.h, spec);
    s.loss = e.loss;
    s.residual = projected_residual(s.h, e.grad_w, e.grad_h, config.probe_step);
    if (!std::isfinite(s.loss) || s.loss > 10.0 * initial_loss) {
      throw DivergenceError("solver diverged at iteration " + std::to_string(t) + ": loss " +
                                std::to_string(s.loss) + " vs initial " + std::to_string(initial_loss),
                            t, s.loss);
    }
    if (t % config.log_interval == 0) result.trajectory.snapshots.push_back(snapshot(s, spec, config));
  }
  if (result.trajectory.snapshots.back().iter != s.iter) {
    result.trajectory.snapshots.push_back(snapshot(s, spec, config));
  }
  result.converged = s.residual <= config.stop_residual;
  return result;
}

RunResult run(const ProblemSpec& spec, const SolverConfig& config) {
  auto [w, h] = init(spec, config.seed, config.init_scale);
  return run_from(spec, config, std::move(w), std::move(h));
}

RunResult run_best_of(const ProblemSpec& spec, const SolverConfig& config, std::size_t num_seeds) {
  if (num_seeds == 0) throw std::invalid_argument("run_best_of: need at least one seed");
  spec.validate();
  config.validate();
  std::vector<std::optional<RunResult>> results(num_seeds);
  std::vector<std::exception_ptr> errors(num_seeds);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(num_seeds); ++s) {
    SolverConfig cfg = config;
    cfg.seed = config.seed + static_cast<std::uint64_t>(s);
    try {
      results[static_cast<std::size_t>(s)] = run(spec, cfg);
    } catch (...) {
      errors[static_cast<std::size_t>(s)] = std::current_exception();
    }
  }
  std::optional<std::size_t> best;
  for (std::size_t s = 0; s < num_seeds; ++s) {
    if (errors[s]) {
      // Only divergence is tolerated per seed; anything else is a bug or a bad input.
      try {
        std::rethrow_exception(errors[s]);
      } catch (const DivergenceError&) {
        continue;
      }
    }
    if (!best || results[s]->state.loss < results[*best]->state.loss) best = s;
  }
  if (!best) std::rethrow_exception(errors.front());
  return std::move(*results[*best]);
}

}  // namespace collapse
