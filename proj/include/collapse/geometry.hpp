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

// Closed-form global minimizer of the regularized cross-entropy objective
//
//   (1/N) sum_{k,i} CE(W h_{k,i}, y_k) + lambda_w/2 ||W||_F^2 + lambda_h/2 ||H||_F^2,
//   subject to H >= 0 entrywise,
//
// with W in R^{K x d} and free (unconstrained) features H in R^{d x N}.
// Class indices are zero-based throughout.

#pragma once

#include <cstddef>
#include <vector>

#include "collapse/linalg.hpp"

namespace collapse {

using linalg::Matrix;

/// One training instance: class count, feature width, per-class sample
/// counts and the two regularization strengths.
struct ProblemSpec {
  std::size_t num_classes = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> counts;
  double lambda_w = 0.0;
  double lambda_h = 0.0;

  /// Total sample count, always derived from `counts`.
  std::size_t total() const noexcept;

  /// Throws std::invalid_argument unless K >= 2, d >= K, counts.size() == K,
  /// every count >= 1 and both lambdas are finite and positive.
  void validate() const;
};

/// The analytic minimizer in its canonical (axis-aligned) representative.
struct ClosedFormGeometry {
  std::vector<double> margin_constants;  // M_k, nats
  std::vector<double> mean_norms_sq;     // ||h_k||^2
  Matrix class_means;                    // d x K
  Matrix classifier;                     // K x d
  Matrix logits;                         // K x K, column k = W h_k
  std::vector<double> margins;           // nats
  double optimal_loss = 0.0;

  bool operator==(const ClosedFormGeometry&) const = default;
};

/// Sample count at or below which a class collapses:
/// C = N^2 K/(K-1) lambda_w lambda_h.
double collapse_threshold(const ProblemSpec& spec);

/// M_k from raw counts: zero when n_k <= C (within 1e-12 relative), else
/// log(K sqrt(n_k / C) - (K - 1)) with C = N^2 K/(K-1) lambda_w lambda_h.
double margin_constant_from_counts(double n_k, double total, std::size_t num_classes, double lambda_w,
                                   double lambda_h);

/// True when n_k <= C. Counts within 1e-12 relative of C are treated as
/// sitting on the threshold.
bool is_collapsed(const ProblemSpec& spec, std::size_t k);

/// M_k = log((K-1)(sqrt(n_k)/(N sqrt((K-1)/K lambda_w lambda_h)) - 1)) when
/// that is positive, else 0.
double margin_constant(const ProblemSpec& spec, std::size_t k);
std::vector<double> margin_constants(const ProblemSpec& spec);

/// ||h_k||^2 = sqrt((K-1)/K * lambda_w/lambda_h / n_k) * M_k.
double class_mean_norm_sq(const ProblemSpec& spec, std::size_t k);

/// d x K matrix with column k equal to ||h_k|| e_k.
Matrix canonical_class_means(const ProblemSpec& spec);

/// Row k: sqrt(lambda_h/(lambda_w K (K-1))) (K sqrt(n_k) h_k - sum_m sqrt(n_m) h_m).
Matrix classifier_from_means(const ProblemSpec& spec, const Matrix& class_means);

/// K x K prediction matrix: diagonal (K-1)/K M_k, off-diagonal -M_k/K in column k.
Matrix logit_matrix(const ProblemSpec& spec);

/// Per-class margin w_k.h_k - max_{j != k} w_j.h_k at the optimum, equal to M_k.
std::vector<double> margins(const ProblemSpec& spec);

/// d x N feature matrix holding column k of `class_means` counts[k] times,
/// classes in order.
Matrix expand_features(const Matrix& class_means, const std::vector<std::size_t>& counts);

/// Objective value at the minimizer,
/// sum_k n_k/N log(1 + (K-1) e^{-M_k}) + lambda_h sum_k n_k ||h_k||^2.
double closed_form_loss(const ProblemSpec& spec);

/// Everything above in one value.
ClosedFormGeometry closed_form_geometry(const ProblemSpec& spec);

}  // namespace collapse
