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
#include <gtest/gtest.h>

#include <omp.h>

#include <cmath>

#include "collapse/kernels.hpp"
#include "support.hpp"

namespace collapse::kernels {
namespace {

using testing::make_spec;
using testing::random_matrix;
using testing::random_spec;

Matrix abs_of(Matrix m) {
  for (double& v : m.data()) v = std::abs(v);
  return m;
}

TEST(CrossEntropy, StableForLargeLogits) {
  const std::vector<double> z = {1000.0, 0.0, -1000.0};
  EXPECT_NEAR(cross_entropy(z, 0), 0.0, 1e-300);
  EXPECT_NEAR(cross_entropy(z, 1), 1000.0, 1e-9);
  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  EXPECT_NEAR(cross_entropy(flat, 2), std::log(4.0), 1e-15);
}

TEST(ColumnLabels, ClassesInOrder) {
  EXPECT_EQ(column_labels({2, 1, 3}), (std::vector<std::size_t>{0, 0, 1, 2, 2, 2}));
}

TEST(Evaluate, ZeroPointHasUniformLoss) {
  const ProblemSpec s = make_spec({3, 2, 4}, 0.1, 0.2, 5);
  const Evaluation e = evaluate(Matrix(3, 5), Matrix(5, 9), s);
  EXPECT_NEAR(e.loss, std::log(3.0), 1e-15);
  EXPECT_EQ(linalg::max_abs(e.grad_w), 0.0);
  EXPECT_EQ(linalg::max_abs(e.grad_h), 0.0);
}

TEST(Evaluate, ParallelMatchesSerialBitForBit) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 10; ++t) {
    ProblemSpec s = random_spec(rng);
    const Matrix w = random_matrix(s.num_classes, s.dim, rng);
    const Matrix h = abs_of(random_matrix(s.dim, s.total(), rng));
    const Evaluation p = evaluate(w, h, s);
    const Evaluation q = serial::evaluate(w, h, s);
    EXPECT_EQ(p.loss, q.loss);
    EXPECT_EQ(p.grad_w, q.grad_w);
    EXPECT_EQ(p.grad_h, q.grad_h);
    EXPECT_EQ(loss(w, h, s), p.loss);
    EXPECT_EQ(serial::loss(w, h, s), p.loss);
  }
}

TEST(Evaluate, IndependentOfThreadCount) {
  std::mt19937_64 rng(42);
  const ProblemSpec s = make_spec({400, 300, 200, 100}, 1e-3, 1e-3, 16);
  const Matrix w = random_matrix(4, 16, rng);
  const Matrix h = abs_of(random_matrix(16, 1000, rng));
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Evaluation one = evaluate(w, h, s);
  omp_set_num_threads(std::max(4, saved));
  const Evaluation many = evaluate(w, h, s);
  omp_set_num_threads(saved);
  EXPECT_EQ(one.loss, many.loss);
  EXPECT_EQ(one.grad_w, many.grad_w);
  EXPECT_EQ(one.grad_h, many.grad_h);
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

TEST(Evaluate, GradientsMatchCentralDifferences) {
  std::mt19937_64 rng(43);
  const double step = 1e-6;
  for (int t = 0; t < 20; ++t) {
    const ProblemSpec s = random_spec(rng);
    Matrix w = random_matrix(s.num_classes, s.dim, rng);
    Matrix h = abs_of(random_matrix(s.dim, s.total(), rng)) + Matrix::constant(s.dim, s.total(), 0.1);
    const Evaluation e = evaluate(w, h, s);
    std::uniform_int_distribution<std::size_t> pick_w(0, w.size() - 1), pick_h(0, h.size() - 1);
    for (int probe = 0; probe < 5; ++probe) {
      const std::size_t i = pick_w(rng);
      const double x = w.data()[i];
      w.data()[i] = x + step;
      const double up = loss(w, h, s);
      w.data()[i] = x - step;
      const double down = loss(w, h, s);
      w.data()[i] = x;
      EXPECT_LT(relative_error(e.grad_w.data()[i], (up - down) / (2 * step)), 1e-5);

      const std::size_t j = pick_h(rng);
      const double y = h.data()[j];
      h.data()[j] = y + step;
      const double up_h = loss(w, h, s);
      h.data()[j] = y - step;
      const double down_h = loss(w, h, s);
      h.data()[j] = y;
      EXPECT_LT(relative_error(e.grad_h.data()[j], (up_h - down_h) / (2 * step)), 1e-5);
    }
  }
}

TEST(Evaluate, RejectsMismatchedShapes) {
  const ProblemSpec s = make_spec({2, 2}, 0.1, 0.1, 3);
  EXPECT_THROW(evaluate(Matrix(2, 4), Matrix(3, 4), s), std::invalid_argument);
  EXPECT_THROW(evaluate(Matrix(2, 3), Matrix(3, 5), s), std::invalid_argument);
}

}  // namespace
}  // namespace collapse::kernels
