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
// Serial reference vs OpenMP kernels. Range argument: feature dimension d for
// matmul, samples per class for the objective.

#include <benchmark/benchmark.h>

#include <random>

#include "collapse/kernels.hpp"
#include "collapse/linalg.hpp"

namespace {

using collapse::Matrix;
using collapse::ProblemSpec;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed, bool nonnegative = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (double& v : m.data()) v = nonnegative ? std::abs(g(rng)) : g(rng);
  return m;
}

ProblemSpec spec_for(std::size_t per_class) {
  ProblemSpec s;
  s.num_classes = 10;
  s.dim = 64;
  s.counts.assign(10, per_class);
  s.lambda_w = s.lambda_h = 5e-4;
  return s;
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <collapse::kernels::Evaluation (*F)(const Matrix&, const Matrix&, const ProblemSpec&)>
void BM_Evaluate(benchmark::State& state) {
  const ProblemSpec s = spec_for(static_cast<std::size_t>(state.range(0)));
  const Matrix w = random_matrix(s.num_classes, s.dim, 3);
  const Matrix h = random_matrix(s.dim, s.total(), 4, true);
  for (auto _ : state) benchmark::DoNotOptimize(F(w, h, s));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.total()));
}

BENCHMARK(BM_Matmul<collapse::linalg::serial::matmul>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Matmul<collapse::linalg::matmul>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(32, 256)->UseRealTime();
BENCHMARK(BM_Evaluate<collapse::kernels::serial::evaluate>)->Name("evaluate/serial")->RangeMultiplier(10)->Range(10, 1000);
BENCHMARK(BM_Evaluate<collapse::kernels::evaluate>)->Name("evaluate/parallel")->RangeMultiplier(10)->Range(10, 1000)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
