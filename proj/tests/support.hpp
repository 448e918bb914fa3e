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

#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "collapse/geometry.hpp"

namespace collapse::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = g(rng);
  return m;
}

inline Matrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  Matrix a = random_matrix(n, n, rng);
  return 0.5 * (a + a.transpose());
}

// K in [2, 10], d in [K, K + 8], n_k in [1, 100], lambdas log-uniform in [1e-4, 1e-1].
inline ProblemSpec random_spec(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> kd(2, 10), extra(0, 8), nd(1, 100);
  std::uniform_real_distribution<double> ld(-4.0, -1.0);
  ProblemSpec s;
  s.num_classes = kd(rng);
  s.dim = s.num_classes + extra(rng);
  for (std::size_t k = 0; k < s.num_classes; ++k) s.counts.push_back(nd(rng));
  s.lambda_w = std::pow(10.0, ld(rng));
  s.lambda_h = std::pow(10.0, ld(rng));
  return s;
}

inline ProblemSpec make_spec(std::vector<std::size_t> counts, double lw, double lh, std::size_t dim = 0) {
  ProblemSpec s;
  s.num_classes = counts.size();
  s.dim = dim == 0 ? counts.size() : dim;
  s.counts = std::move(counts);
  s.lambda_w = lw;
  s.lambda_h = lh;
  return s;
}

// I - 11^T/K scaled to unit Frobenius norm.
inline Matrix unit_etf_gram(std::size_t k) {
  Matrix p = Matrix::identity(k);
  for (double& v : p.data()) v -= 1.0 / static_cast<double>(k);
  return p * (1.0 / std::sqrt(static_cast<double>(k - 1)));
}

}  // namespace collapse::testing
