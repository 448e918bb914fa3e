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

// Neural-collapse discrepancy metrics between a learned (W, H) and the
// closed-form optimum.
//
// Covariances use the imbalanced normalizations:
//   Sigma_W = (1/N) sum_{k,i} (h_{k,i} - h_k)(h_{k,i} - h_k)^T
//   Sigma_B = (1/K) sum_k (h_k - h_G)(h_k - h_G)^T
// with h_G the mean of all N feature columns.
//
// Every gram-type metric is ||A/||A||_F - B/||B||_F||_F. When either norm is
// zero the metric is undefined and reported as std::nullopt ("undef" in CSV).

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "collapse/geometry.hpp"

namespace collapse {

struct ClassStatistics {
  Matrix class_means;              // d x K
  std::vector<double> global_mean; // d
  Matrix sigma_w;                  // d x d
  Matrix sigma_b;                  // d x d
};

/// Columns of `h` are grouped by class in order, counts[k] columns for class k.
ClassStatistics class_statistics(const Matrix& h, const std::vector<std::size_t>& counts);

/// Class means only.
Matrix class_means_of(const Matrix& h, const std::vector<std::size_t>& counts);

using MetricValue = std::optional<double>;

struct MetricsReport {
  MetricValue nc1;
  MetricValue nc2_w_vs_h;
  MetricValue nc2_wwt;
  MetricValue nc2_hth;
  MetricValue nc3_wh;
};

/// (1/K) trace(Sigma_W Sigma_B^+). Zero when Sigma_W vanishes; undefined when
/// Sigma_B is identically zero but Sigma_W is not.
MetricValue nc1(const Matrix& h, const std::vector<std::size_t>& counts, double rank_tol = 1e-10);

/// Distance between W and the scaled-centered map with rows
/// K sqrt(n_k) h_k^T - sum_m sqrt(n_m) h_m^T.
MetricValue nc2_w_vs_h(const Matrix& w, const Matrix& class_means, const std::vector<std::size_t>& counts);

/// Distance between W W^T and the closed-form classifier gram.
MetricValue nc2_wwt(const Matrix& w, const ProblemSpec& spec);

/// Distance between Hbar^T Hbar and diag(||h_k||^2) of the optimum.
MetricValue nc2_hth(const Matrix& class_means, const ProblemSpec& spec);

/// Distance between W Hbar and the optimal logit matrix.
MetricValue nc3_wh(const Matrix& w, const Matrix& class_means, const ProblemSpec& spec);

MetricsReport evaluate_metrics(const Matrix& w, const Matrix& h, const ProblemSpec& spec,
                               double rank_tol = 1e-10);

/// ||a/||a||_F - b/||b||_F||_F, or nullopt if either norm is zero.
MetricValue normalized_distance(const Matrix& a, const Matrix& b);

}  // namespace collapse
