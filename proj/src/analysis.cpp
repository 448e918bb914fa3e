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

#include "collapse/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <tuple>

namespace collapse {

void TwoGroupSpec::validate() const {
  if (num_major == 0 || num_minor == 0) throw std::invalid_argument("TwoGroupSpec: both groups must be nonempty");
  if (num_classes() < 2) throw std::invalid_argument("TwoGroupSpec: need K >= 2");
  if (n_minor == 0 || n_major < n_minor) throw std::invalid_argument("TwoGroupSpec: need n_A >= n_B >= 1");
  if (!(std::isfinite(lambda_w) && lambda_w > 0.0) || !(std::isfinite(lambda_h) && lambda_h > 0.0)) {
    throw std::invalid_argument("TwoGroupSpec: lambda_w and lambda_h must be positive");
  }
}

ProblemSpec TwoGroupSpec::to_problem_spec(std::size_t dim) const {
  validate();
  ProblemSpec spec;
  spec.num_classes = num_classes();
  spec.dim = dim == 0 ? num_classes() : dim;
  spec.counts.assign(num_major, n_major);
  spec.counts.insert(spec.counts.end(), num_minor, n_minor);
  spec.lambda_w = lambda_w;
  spec.lambda_h = lambda_h;
  return spec;
}

std::optional<TwoGroupSpec> TwoGroupSpec::from_problem_spec(const ProblemSpec& spec) {
  const std::set<std::size_t> distinct(spec.counts.begin(), spec.counts.end());
  if (distinct.size() != 2) return std::nullopt;
  const std::size_t hi = *distinct.rbegin();
  const std::size_t lo = *distinct.begin();
  const auto num_major = static_cast<std::size_t>(std::count(spec.counts.begin(), spec.counts.end(), hi));
  for (std::size_t k = 0; k < spec.counts.size(); ++k) {
    if ((k < num_major) != (spec.counts[k] == hi)) return std::nullopt;
  }
  return TwoGroupSpec{num_major, spec.counts.size() - num_major, hi, lo, spec.lambda_w, spec.lambda_h};
}

Matrix classifier_gram(const ProblemSpec& spec) {
  spec.validate();
  const std::size_t kk = spec.num_classes;
  const double kd = static_cast<double>(kk);
  const double alpha = std::sqrt(spec.lambda_h / spec.lambda_w) / (kd * std::sqrt(kd * (kd - 1.0)));

  // e_k = sqrt(n_k) M_k
  std::vector<double> e(kk);
  double sum_e = 0.0;
  for (std::size_t k = 0; k < kk; ++k) {
    e[k] = std::sqrt(static_cast<double>(spec.counts[k])) * margin_constant(spec, k);
    sum_e += e[k];
  }
  Matrix g(kk, kk);
  for (std::size_t k = 0; k < kk; ++k) {
    g(k, k) = alpha * ((kd - 1.0) * (kd - 1.0) * e[k] + (sum_e - e[k]));
    for (std::size_t j = 0; j < kk; ++j) {
      if (j == k) continue;
      g(k, j) = alpha * (-(kd - 1.0) * e[k] - (kd - 1.0) * e[j] + (sum_e - e[k] - e[j]));
    }
  }
  return g;
}

NormRatios norm_ratios(const ProblemSpec& spec, std::size_t i, std::size_t j) {
  spec.validate();
  if (i >= spec.num_classes || j >= spec.num_classes) throw std::out_of_range("norm_ratios: class index");
  const double mi = margin_constant(spec, i);
  const double mj = margin_constant(spec, j);
  if (mj == 0.0) throw std::domain_error("norm_ratios: denominator class has collapsed (M_j = 0)");
  const Matrix g = classifier_gram(spec);
  const double ni = static_cast<double>(spec.counts[i]);
  const double nj = static_cast<double>(spec.counts[j]);
  return {g(i, i) / g(j, j), std::sqrt(nj / ni) * mi / mj};
}

ClassifierAngles classifier_angles(const TwoGroupSpec& spec) {
  spec.validate();
  if (spec.num_major < 2 || spec.num_minor < 2) {
    throw std::invalid_argument("classifier_angles: each group needs at least two classes");
  }
  const ProblemSpec full = spec.to_problem_spec();
  const double kd = static_cast<double>(full.num_classes);
  const double ka = static_cast<double>(spec.num_major);
  const double kb = static_cast<double>(spec.num_minor);
  const double ea = std::sqrt(static_cast<double>(spec.n_major)) * margin_constant(full, 0);
  const double eb = std::sqrt(static_cast<double>(spec.n_minor)) * margin_constant(full, spec.num_major);
  if (ea == 0.0 && eb == 0.0) throw std::domain_error("classifier_angles: every class has collapsed");

  ClassifierAngles out{};
  out.major = 1.0 - kd * kd * ea / (kd * (kd - 1.0) * ea - kb * ea + kb * eb);
  out.minor = 1.0 - kd * kd * eb / (kd * (kd - 1.0) * eb - ka * eb + ka * ea);
  const Matrix g = classifier_gram(full);
  const std::size_t a = 0;
  const std::size_t b = spec.num_major;
  out.cross = g(a, b) / std::sqrt(g(a, a) * g(b, b));
  if (spec.n_major > spec.n_minor && !(out.major < out.minor)) {
    throw std::logic_error("classifier_angles: majority cosine is not below the minority cosine");
  }
  return out;
}

double minority_ratio_bound(const TwoGroupSpec& spec) {
  spec.validate();
  const double kd = static_cast<double>(spec.num_classes());
  const double n = static_cast<double>(spec.total());
  return ((kd - 1.0) / (n * kd * spec.lambda_w * spec.lambda_h) - static_cast<double>(spec.num_minor)) /
         static_cast<double>(spec.num_major);
}

CollapseReport collapse_report(const ProblemSpec& spec) {
  spec.validate();
  CollapseReport r;
  r.threshold = collapse_threshold(spec);
  r.collapsed.resize(spec.num_classes);
  for (std::size_t k = 0; k < spec.num_classes; ++k) r.collapsed[k] = is_collapsed(spec, k);
  r.minority_collapse = std::any_of(r.collapsed.begin(), r.collapsed.end(), [](bool c) { return c; });
  r.complete_collapse = std::all_of(r.collapsed.begin(), r.collapsed.end(), [](bool c) { return c; });
  if (const auto two = TwoGroupSpec::from_problem_spec(spec)) r.minority_ratio_bound = minority_ratio_bound(*two);
  return r;
}

Matrix two_group_block_gram(std::size_t half, double a, double b) {
  const std::size_t kk = 2 * half;
  const double kd = static_cast<double>(kk);
  Matrix g(kk, kk);
  for (std::size_t r = 0; r < kk; ++r) {
    for (std::size_t c = 0; c < kk; ++c) {
      const bool rm = r < half;
      const bool cm = c < half;
      double v;
      if (rm && cm) {
        v = (r == c ? a : 0.0) - (1.5 * a - 0.5 * b) / kd;
      } else if (!rm && !cm) {
        v = (r == c ? b : 0.0) - (1.5 * b - 0.5 * a) / kd;
      } else {
        v = -(a + b) / (2.0 * kd);
      }
      g(r, c) = v;
    }
  }
  return linalg::unit_normalized(g);
}

namespace {

Matrix centering(std::size_t k) {
  Matrix p = Matrix::identity(k);
  const double inv = 1.0 / static_cast<double>(k);
  for (double& v : p.data()) v -= inv;
  return p;
}

}  // namespace

std::pair<Matrix, Matrix> seli_grams(const std::vector<std::size_t>& counts) {
  const std::size_t kk = counts.size();
  if (kk < 2) throw std::invalid_argument("seli_grams: need at least two classes");
  const Matrix p = centering(kk);
  std::vector<double> n(kk);
  std::vector<double> sqrt_n(kk);
  for (std::size_t k = 0; k < kk; ++k) {
    n[k] = static_cast<double>(counts[k]);
    sqrt_n[k] = std::sqrt(n[k]);
  }
  // Z Z^T = P diag(n) P.
  const Matrix zzt = linalg::matmul(linalg::matmul(p, Matrix::diagonal(n)), p);
  const Matrix gram_w = linalg::psd_sqrt(zzt);

  // Z^T Z = Yhat diag(sqrt n) P diag(sqrt n) Yhat^T with Yhat orthonormal, so
  // the class-mean gram of (Z^T Z)^{1/2} is diag(1/sqrt n) S diag(1/sqrt n)
  // where S = (diag(sqrt n) P diag(sqrt n))^{1/2}.
  const Matrix d_sqrt = Matrix::diagonal(sqrt_n);
  const Matrix s = linalg::psd_sqrt(linalg::matmul(linalg::matmul(d_sqrt, p), d_sqrt));
  Matrix mean_gram(kk, kk);
  for (std::size_t r = 0; r < kk; ++r)
    for (std::size_t c = 0; c < kk; ++c) mean_gram(r, c) = s(r, c) / (sqrt_n[r] * sqrt_n[c]);
  const Matrix centered = linalg::matmul(linalg::matmul(p, mean_gram), p);
  return {linalg::unit_normalized(gram_w), linalg::unit_normalized(centered)};
}

SeliComparison seli_compare(const TwoGroupSpec& spec) {
  spec.validate();
  if (spec.num_major != spec.num_minor) {
    throw std::invalid_argument("seli_compare: requires equally sized majority and minority groups");
  }
  const ProblemSpec full = spec.to_problem_spec();
  const std::size_t half = spec.num_major;
  const double ma = margin_constant(full, 0);
  const double mb = margin_constant(full, half);
  const double sqrt_r = std::sqrt(spec.imbalance_ratio());

  SeliComparison out;
  out.gram_w_ours = two_group_block_gram(half, sqrt_r * ma, mb);
  out.gram_h_centered_ours = two_group_block_gram(half, ma / sqrt_r, mb);
  out.gram_w_ours_limit = two_group_block_gram(half, sqrt_r, 1.0);
  out.gram_h_centered_ours_limit = two_group_block_gram(half, 1.0 / sqrt_r, 1.0);
  std::tie(out.gram_w_seli, out.gram_h_seli) = seli_grams(full.counts);

  auto gap = [](const Matrix& x, const Matrix& y) {
    if (x.empty() || y.empty()) return 0.0;
    return linalg::frobenius_norm(x - y);
  };
  out.frobenius_gap_w = gap(out.gram_w_ours, out.gram_w_seli);
  out.frobenius_gap_h = gap(out.gram_h_centered_ours, out.gram_h_seli);
  out.frobenius_gap_w_limit = gap(out.gram_w_ours_limit, out.gram_w_seli);
  out.frobenius_gap_h_limit = gap(out.gram_h_centered_ours_limit, out.gram_h_seli);
  out.m_ratio_at_lambda = mb == 0.0 ? 0.0 : ma / mb;
  return out;
}

double m_ratio_limit(std::size_t n_i, std::size_t n_j, std::size_t num_classes, std::size_t total,
                     double lambda_w, double lambda_h) {
  if (num_classes < 2 || total == 0 || n_i == 0 || n_j == 0) throw std::invalid_argument("m_ratio_limit: bad counts");
  if (!(lambda_w > 0.0) || !(lambda_h > 0.0)) throw std::invalid_argument("m_ratio_limit: lambdas must be positive");
  const double n = static_cast<double>(total);
  const double mi = margin_constant_from_counts(static_cast<double>(n_i), n, num_classes, lambda_w, lambda_h);
  const double mj = margin_constant_from_counts(static_cast<double>(n_j), n, num_classes, lambda_w, lambda_h);
  if (mi == 0.0 || mj == 0.0) throw std::domain_error("m_ratio_limit: a class is collapsed at this lambda");
  return mi / mj;
}

}  // namespace collapse
