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

// Full-batch loss/gradient kernels for the regularized softmax cross-entropy
// objective. The default versions are OpenMP-parallel over feature columns and
// classifier entries; `serial::` holds plain loops with the same summation
// order, used as the test reference and benchmark baseline.

#pragma once

#include <span>
#include <vector>

#include "collapse/geometry.hpp"

namespace collapse::kernels {

struct Evaluation {
  double loss = 0.0;
  Matrix grad_w;  // K x d
  Matrix grad_h;  // d x N
};

/// Label of each feature column, classes laid out in order.
std::vector<std::size_t> column_labels(const std::vector<std::size_t>& counts);

/// Cross-entropy of one logit vector against `label`, via max-subtracted
/// log-sum-exp.
double cross_entropy(std::span<const double> logits, std::size_t label);

/// Objective value only.
double loss(const Matrix& w, const Matrix& h, const ProblemSpec& spec);

/// Objective value and both gradients:
///   gW = (1/N) sum (softmax(W h) - y) h^T + lambda_w W
///   gH[:, col] = (1/N) W^T (softmax(W h_col) - y) + lambda_h h_col
Evaluation evaluate(const Matrix& w, const Matrix& h, const ProblemSpec& spec);

namespace serial {
double loss(const Matrix& w, const Matrix& h, const ProblemSpec& spec);
Evaluation evaluate(const Matrix& w, const Matrix& h, const ProblemSpec& spec);
}  // namespace serial

}  // namespace collapse::kernels
