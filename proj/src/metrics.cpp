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

#include "collapse/metrics.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "collapse/analysis.hpp"

namespace collapse {

namespace {

void require_counts(const Matrix& h, const std::vector<std::size_t>& counts) {
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (n != h.cols()) throw linalg::DimensionError("feature column count does not match the class counts");
  for (std::size_t c : counts) {
    if (c == 0) throw std::invalid_argument("every class needs at least one feature column");
  }
}

// Accumulates (x)(x)^T * weight into the upper triangle, then mirrors, so the
// result is exactly symmetric.
void add_outer(Matrix& acc, std::span<const double> x, double weight) {
  const std::size_t d = x.size();
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = r; c < d; ++c) acc(r, c) += weight * x[r] * x[c];
}

void mirror_upper(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < r; ++c) m(r, c) = m(c, r);
}

}  // namespace

Matrix class_means_of(const Matrix& h, const std::vector<std::size_t>& counts) {
  require_counts(h, counts);
  const std::size_t d = h.rows();
  Matrix means(d, counts.size());
  std::size_t col = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i, ++col)
      for (std::size_t r = 0; r < d; ++r) means(r, k) += h(r, col);
    const double inv = 1.0 / static_cast<double>(counts[k]);
    for (std::size_t r = 0; r < d; ++r) means(r, k) *= inv;
  }
  return means;
}

ClassStatistics class_statistics(const Matrix& h, const std::vector<std::size_t>& counts) {
  require_counts(h, counts);
  const std::size_t d = h.rows();
  const std::size_t kk = counts.size();
  const double n = static_cast<double>(h.cols());

  ClassStatistics s{class_means_of(h, counts), std::vector<double>(d, 0.0), Matrix(d, d), Matrix(d, d)};
  for (std::size_t c = 0; c < h.cols(); ++c)
    for (std::size_t r = 0; r < d; ++r) s.global_mean[r] += h(r, c);
  for (double& g : s.global_mean) g /= n;

  std::vector<double> diff(d);
  std::size_t col = 0;
  for (std::size_t k = 0; k < kk; ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i, ++col) {
      for (std::size_t r = 0; r < d; ++r) diff[r] = h(r, col) - s.class_means(r, k);
      add_outer(s.sigma_w, diff, 1.0 / n);
    }
    for (std::size_t r = 0; r < d; ++r) diff[r] = s.class_means(r, k) - s.global_mean[r];
    add_outer(s.sigma_b, diff, 1.0 / static_cast<double>(kk));
  }
  mirror_upper(s.sigma_w);
  mirror_upper(s.sigma_b);
  return s;
}

MetricValue normalized_distance(const Matrix& a, const Matrix& b) {
  const Matrix ua = linalg::unit_normalized(a);
  const Matrix ub = linalg::unit_normalized(b);
  if (ua.empty() || ub.empty()) return std::nullopt;
  return linalg::frobenius_norm(ua - ub);
}

MetricValue nc1(const Matrix& h, const std::vector<std::size_t>& counts, double rank_tol) {
  const ClassStatistics s = class_statistics(h, counts);
  if (linalg::max_abs(s.sigma_w) == 0.0) return 0.0;
  if (linalg::max_abs(s.sigma_b) == 0.0) return std::nullopt;
  const Matrix pinv = linalg::pseudo_inverse(s.sigma_b, rank_tol);
  return linalg::trace(linalg::serial::matmul(s.sigma_w, pinv)) / static_cast<double>(counts.size());
}

MetricValue nc2_w_vs_h(const Matrix& w, const Matrix& class_means, const std::vector<std::size_t>& counts) {
  const std::size_t kk = class_means.cols();
  const std::size_t d = class_means.rows();
  if (counts.size() != kk || w.rows() != kk || w.cols() != d) {
    throw linalg::DimensionError("nc2_w_vs_h: W must be K x d and class_means d x K");
  }
  std::vector<double> sqrt_n(kk);
  for (std::size_t k = 0; k < kk; ++k) sqrt_n[k] = std::sqrt(static_cast<double>(counts[k]));
  std::vector<double> weighted_sum(d, 0.0);
  for (std::size_t m = 0; m < kk; ++m)
    for (std::size_t j = 0; j < d; ++j) weighted_sum[j] += sqrt_n[m] * class_means(j, m);
  const double kd = static_cast<double>(kk);
  Matrix target(kk, d);
  for (std::size_t k = 0; k < kk; ++k)
    for (std::size_t j = 0; j < d; ++j) target(k, j) = kd * sqrt_n[k] * class_means(j, k) - weighted_sum[j];
  return normalized_distance(w, target);
}

MetricValue nc2_wwt(const Matrix& w, const ProblemSpec& spec) {
  if (w.rows() != spec.num_classes) throw linalg::DimensionError("nc2_wwt: W must have K rows");
  return normalized_distance(linalg::matmul_nt(w, w), classifier_gram(spec));
}

MetricValue nc2_hth(const Matrix& class_means, const ProblemSpec& spec) {
  if (class_means.cols() != spec.num_classes) throw linalg::DimensionError("nc2_hth: class_means must have K columns");
  std::vector<double> diag(spec.num_classes);
  for (std::size_t k = 0; k < spec.num_classes; ++k) diag[k] = class_mean_norm_sq(spec, k);
  return normalized_distance(linalg::matmul_tn(class_means, class_means), Matrix::diagonal(diag));
}

MetricValue nc3_wh(const Matrix& w, const Matrix& class_means, const ProblemSpec& spec) {
  if (w.rows() != spec.num_classes || class_means.cols() != spec.num_classes) {
    throw linalg::DimensionError("nc3_wh: W must be K x d and class_means d x K");
  }
  return normalized_distance(linalg::matmul(w, class_means), logit_matrix(spec));
}

MetricsReport evaluate_metrics(const Matrix& w, const Matrix& h, const ProblemSpec& spec, double rank_tol) {
  const Matrix means = class_means_of(h, spec.counts);
  return {nc1(h, spec.counts, rank_tol), nc2_w_vs_h(w, means, spec.counts), nc2_wwt(w, spec),
          nc2_hth(means, spec), nc3_wh(w, means, spec)};
}

}  // namespace collapse
