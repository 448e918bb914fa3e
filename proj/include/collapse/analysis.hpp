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

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "collapse/geometry.hpp"

namespace collapse {

/// K_A majority classes with n_A samples each followed by K_B minority
/// classes with n_B samples each.
struct TwoGroupSpec {
  std::size_t num_major = 0;
  std::size_t num_minor = 0;
  std::size_t n_major = 0;
  std::size_t n_minor = 0;
  double lambda_w = 0.0;
  double lambda_h = 0.0;

  std::size_t num_classes() const noexcept { return num_major + num_minor; }
  std::size_t total() const noexcept { return n_major * num_major + n_minor * num_minor; }
  double imbalance_ratio() const { return static_cast<double>(n_major) / static_cast<double>(n_minor); }

  /// Throws std::invalid_argument unless n_A >= n_B >= 1, K >= 2, both
  /// groups nonempty and both lambdas positive.
  void validate() const;

  /// Equivalent ProblemSpec; `dim` defaults to K.
  ProblemSpec to_problem_spec(std::size_t dim = 0) const;

  /// Recovers the two-group view of a spec whose counts take exactly two
  /// distinct values, majority classes listed first. Returns nullopt when the
  /// counts are not already in that shape.
  static std::optional<TwoGroupSpec> from_problem_spec(const ProblemSpec& spec);
};

/// Optimal W W^T in closed form:
///   diag      alpha ((K-1)^2 sqrt(n_k) M_k + sum_{m != k} sqrt(n_m) M_m)
///   off-diag  alpha (-(K-1) sqrt(n_k) M_k - (K-1) sqrt(n_j) M_j + sum_{m != k,j} sqrt(n_m) M_m)
/// with alpha = sqrt(lambda_h/lambda_w) / (K sqrt(K (K-1))).
Matrix classifier_gram(const ProblemSpec& spec);

struct NormRatios {
  double classifier;  // ||w_i||^2 / ||w_j||^2
  double feature;     // ||h_i||^2 / ||h_j||^2 = sqrt(n_j/n_i) M_i/M_j
};

/// Throws std::domain_error when class j has collapsed (M_j = 0), since the
/// feature ratio then has a zero denominator.
NormRatios norm_ratios(const ProblemSpec& spec, std::size_t i, std::size_t j);

struct ClassifierAngles {
  double major;  // cos between two majority classifiers
  double minor;  // cos between two minority classifiers
  double cross;  // cos between a majority and a minority classifier
};

/// Pairwise classifier cosines in the two-group setting. The within-group
/// values use the group-level closed forms, the cross value the general
/// gram. Requires K_A >= 2 and K_B >= 2; throws std::domain_error when every
/// class has collapsed. Throws std::logic_error if n_A > n_B yet the majority
/// cosine is not strictly below the minority one.
ClassifierAngles classifier_angles(const TwoGroupSpec& spec);

struct CollapseReport {
  double threshold = 0.0;               // C(N, K, lambda_w, lambda_h)
  std::vector<bool> collapsed;          // n_k <= C, equivalently M_k == 0
  bool minority_collapse = false;       // at least one class collapsed
  bool complete_collapse = false;       // every class collapsed; optimum is (0, 0)
  std::optional<double> minority_ratio_bound;  // two-group specs only
};

CollapseReport collapse_report(const ProblemSpec& spec);

/// Imbalance ratio at or above which the minority group collapses:
/// (1/K_A) ((K-1)/(N K lambda_w lambda_h) - K_B).
double minority_ratio_bound(const TwoGroupSpec& spec);

/// Comparison of the optimal grams against the SVM (simplex-encoded-label
/// interpolation) grams in the equal-groups setting. All matrices have unit
/// Frobenius norm; the gaps are Frobenius distances between them.
struct SeliComparison {
  Matrix gram_w_ours;
  Matrix gram_h_centered_ours;
  Matrix gram_w_ours_limit;           // lambda -> 0
  Matrix gram_h_centered_ours_limit;  // lambda -> 0
  Matrix gram_w_seli;
  Matrix gram_h_seli;                 // centered class-mean gram
  double frobenius_gap_w = 0.0;
  double frobenius_gap_h = 0.0;
  double frobenius_gap_w_limit = 0.0;
  double frobenius_gap_h_limit = 0.0;
  double m_ratio_at_lambda = 0.0;     // M_A / M_B
};

/// Unit-normalized block grams for K/2 majority and K/2 minority classes.
/// Majority diagonal blocks carry a, minority ones b:
///   [ a I - (3a/2 - b/2)/K 11^T     -(a + b)/(2K) 11^T         ]
///   [ -(a + b)/(2K) 11^T            b I - (3b/2 - a/2)/K 11^T  ]
Matrix two_group_block_gram(std::size_t half, double a, double b);

/// Requires K_A == K_B. Throws std::invalid_argument otherwise.
SeliComparison seli_compare(const TwoGroupSpec& spec);

/// SVM-geometry grams straight from the simplex-encoded label matrix
/// Z = (I - 11^T/K) Y: W W^T = (Z Z^T)^{1/2} and the centered class-mean
/// gram derived from H^T H = (Z^T Z)^{1/2}. Both unit-normalized.
std::pair<Matrix, Matrix> seli_grams(const std::vector<std::size_t>& counts);

/// M_i / M_j at the given regularization pair. Throws std::domain_error if
/// either class is collapsed there.
double m_ratio_limit(std::size_t n_i, std::size_t n_j, std::size_t num_classes, std::size_t total,
                     double lambda_w, double lambda_h);

}  // namespace collapse
