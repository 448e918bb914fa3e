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

#include "collapse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace collapse {

namespace {

constexpr double kThresholdRelTol = 1e-12;

void require_class(const ProblemSpec& spec, std::size_t k) {
  if (k >= spec.num_classes) {
    throw std::out_of_range("class index " + std::to_string(k) + " out of range");
  }
}

}  // namespace

std::size_t ProblemSpec::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

void ProblemSpec::validate() const {
  if (num_classes < 2) throw std::invalid_argument("ProblemSpec: need K >= 2");
  if (dim < num_classes) {
    throw std::invalid_argument("ProblemSpec: feature dimension d = " + std::to_string(dim) +
                                " is below the class count K = " + std::to_string(num_classes) +
                                " (d >= K is required)");
  }
  if (counts.size() != num_classes) throw std::invalid_argument("ProblemSpec: counts must have K entries");
  if (std::any_of(counts.begin(), counts.end(), [](std::size_t n) { return n == 0; })) {
    throw std::invalid_argument("ProblemSpec: every class needs at least one sample");
  }
  if (!(std::isfinite(lambda_w) && lambda_w > 0.0) || !(std::isfinite(lambda_h) && lambda_h > 0.0)) {
    throw std::invalid_argument("ProblemSpec: lambda_w and lambda_h must be positive");
  }
}

namespace {

double threshold_from(double total, double kk, double lambda_w, double lambda_h) {
  return total * total * (kk / (kk - 1.0)) * lambda_w * lambda_h;
}

bool below_threshold(double n_k, double threshold) {
  return n_k <= threshold * (1.0 + kThresholdRelTol);
}

}  // namespace

double collapse_threshold(const ProblemSpec& spec) {
  return threshold_from(static_cast<double>(spec.total()), static_cast<double>(spec.num_classes),
                        spec.lambda_w, spec.lambda_h);
}

bool is_collapsed(const ProblemSpec& spec, std::size_t k) {
  require_class(spec, k);
  return below_threshold(static_cast<double>(spec.counts[k]), collapse_threshold(spec));
}

// With r = n_k / C the inner argument (K-1)(sqrt(n_k)/(N sqrt((K-1)/K lw lh)) - 1)
// simplifies to K sqrt(r) - (K-1), which exceeds 1 exactly when r > 1.
double margin_constant_from_counts(double n_k, double total, std::size_t num_classes, double lambda_w,
                                   double lambda_h) {
  const double kk = static_cast<double>(num_classes);
  const double threshold = threshold_from(total, kk, lambda_w, lambda_h);
  if (below_threshold(n_k, threshold)) return 0.0;
  const double m = std::log(kk * std::sqrt(n_k / threshold) - (kk - 1.0));
  return m > 0.0 ? m : 0.0;
}

double margin_constant(const ProblemSpec& spec, std::size_t k) {
  spec.validate();
  require_class(spec, k);
  return margin_constant_from_counts(static_cast<double>(spec.counts[k]), static_cast<double>(spec.total()),
                                     spec.num_classes, spec.lambda_w, spec.lambda_h);
}

std::vector<double> margin_constants(const ProblemSpec& spec) {
  std::vector<double> m(spec.num_classes);
  for (std::size_t k = 0; k < spec.num_classes; ++k) m[k] = margin_constant(spec, k);
  return m;
}

double class_mean_norm_sq(const ProblemSpec& spec, std::size_t k) {
  const double m = margin_constant(spec, k);
  if (m == 0.0) return 0.0;
  const double kk = static_cast<double>(spec.num_classes);
  const double nk = static_cast<double>(spec.counts[k]);
  return std::sqrt(((kk - 1.0) / kk) * (spec.lambda_w / spec.lambda_h) / nk) * m;
}

Matrix canonical_class_means(const ProblemSpec& spec) {
  spec.validate();
  Matrix means(spec.dim, spec.num_classes);
  for (std::size_t k = 0; k < spec.num_classes; ++k) means(k, k) = std::sqrt(class_mean_norm_sq(spec, k));
  return means;
}

Matrix classifier_from_means(const ProblemSpec& spec, const Matrix& class_means) {
  spec.validate();
  if (class_means.cols() != spec.num_classes || class_means.rows() != spec.dim) {
    throw linalg::DimensionError("classifier_from_means: class_means must be d x K");
  }
  const std::size_t d = spec.dim;
  const std::size_t kk = spec.num_classes;
  std::vector<double> sqrt_n(kk);
  for (std::size_t k = 0; k < kk; ++k) sqrt_n[k] = std::sqrt(static_cast<double>(spec.counts[k]));

  std::vector<double> weighted_sum(d, 0.0);
  for (std::size_t m = 0; m < kk; ++m)
    for (std::size_t j = 0; j < d; ++j) weighted_sum[j] += sqrt_n[m] * class_means(j, m);

  const double kd = static_cast<double>(kk);
  const double scale = std::sqrt(spec.lambda_h / (spec.lambda_w * kd * (kd - 1.0)));
  Matrix w(kk, d);
  for (std::size_t k = 0; k < kk; ++k)
    for (std::size_t j = 0; j < d; ++j)
      w(k, j) = scale * (kd * sqrt_n[k] * class_means(j, k) - weighted_sum[j]);
  return w;
}

Matrix logit_matrix(const ProblemSpec& spec) {
  spec.validate();
  const std::size_t kk = spec.num_classes;
  const double kd = static_cast<double>(kk);
  Matrix z(kk, kk);
  for (std::size_t k = 0; k < kk; ++k) {
    const double m = margin_constant(spec, k);
    for (std::size_t r = 0; r < kk; ++r) z(r, k) = r == k ? (kd - 1.0) / kd * m : -m / kd;
  }
  return z;
}

std::vector<double> margins(const ProblemSpec& spec) {
  const Matrix z = logit_matrix(spec);
  const std::size_t kk = spec.num_classes;
  std::vector<double> q(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    double rival = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < kk; ++r)
      if (r != k) rival = std::max(rival, z(r, k));
    q[k] = z(k, k) - rival;
  }
  return q;
}

Matrix expand_features(const Matrix& class_means, const std::vector<std::size_t>& counts) {
  if (counts.size() != class_means.cols()) {
    throw linalg::DimensionError("expand_features: counts must match the class-mean column count");
  }
  const std::size_t n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  Matrix h(class_means.rows(), n);
  std::size_t col = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i, ++col)
      for (std::size_t r = 0; r < class_means.rows(); ++r) h(r, col) = class_means(r, k);
  }
  return h;
}

double closed_form_loss(const ProblemSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.total());
  const double kd = static_cast<double>(spec.num_classes);
  double ce = 0.0;
  double feature_term = 0.0;
  for (std::size_t k = 0; k < spec.num_classes; ++k) {
    const double nk = static_cast<double>(spec.counts[k]);
    ce += nk / n * std::log1p((kd - 1.0) * std::exp(-margin_constant(spec, k)));
    feature_term += nk * class_mean_norm_sq(spec, k);
  }
  // lambda_w ||W||^2 equals lambda_h sum_k n_k ||h_k||^2 at any critical point,
  // so the two half-regularizers add up to one full feature term.
  return ce + spec.lambda_h * feature_term;
}

ClosedFormGeometry closed_form_geometry(const ProblemSpec& spec) {
  spec.validate();
  ClosedFormGeometry g;
  g.margin_constants = margin_constants(spec);
  g.mean_norms_sq.resize(spec.num_classes);
  for (std::size_t k = 0; k < spec.num_classes; ++k) g.mean_norms_sq[k] = class_mean_norm_sq(spec, k);
  g.class_means = canonical_class_means(spec);
  g.classifier = classifier_from_means(spec, g.class_means);
  g.logits = logit_matrix(spec);
  g.margins = margins(spec);
  g.optimal_loss = closed_form_loss(spec);
  return g;
}

}  // namespace collapse
