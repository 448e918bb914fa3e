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

#include "collapse/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace collapse::kernels {

namespace {

// Below this many multiply-adds per kernel the thread start-up dominates.
constexpr std::ptrdiff_t kParallelWork = 16384;

void require_shapes(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  if (w.rows() != spec.num_classes || w.cols() != spec.dim) {
    throw linalg::DimensionError("W must be K x d");
  }
  if (h.rows() != spec.dim || h.cols() != spec.total()) {
    throw linalg::DimensionError("H must be d x N");
  }
}

double squared_sum(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return s;
}

double regularizer(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  return 0.5 * spec.lambda_w * squared_sum(w) + 0.5 * spec.lambda_h * squared_sum(h);
}

// Writes softmax(z) - e_label into `z` and returns the cross-entropy.
double softmax_residual(std::span<double> z, std::size_t label) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double denom = 0.0;
  for (double v : z) denom += std::exp(v - zmax);
  const double ce = std::log(denom) - (z[label] - zmax);
  for (double& v : z) v = std::exp(v - zmax) / denom;
  z[label] -= 1.0;
  return ce;
}

double sum_in_order(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

std::vector<std::size_t> column_labels(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> labels;
  for (std::size_t k = 0; k < counts.size(); ++k) labels.insert(labels.end(), counts[k], k);
  return labels;
}

double cross_entropy(std::span<const double> logits, std::size_t label) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - zmax);
  return std::log(denom) - (logits[label] - zmax);
}

double loss(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  require_shapes(w, h, spec);
  const std::size_t kk = spec.num_classes;
  const std::size_t d = spec.dim;
  const auto n = static_cast<std::ptrdiff_t>(h.cols());
  const std::vector<std::size_t> labels = column_labels(spec.counts);
  std::vector<double> ce(h.cols());
#pragma omp parallel if (n * static_cast<std::ptrdiff_t>(kk * d) > kParallelWork)
  {
    std::vector<double> z(kk);
#pragma omp for schedule(static)
    for (std::ptrdiff_t col = 0; col < n; ++col) {
      const auto c = static_cast<std::size_t>(col);
      for (std::size_t k = 0; k < kk; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += w(k, j) * h(j, c);
        z[k] = s;
      }
      ce[c] = cross_entropy(z, labels[c]);
    }
  }
  return sum_in_order(ce) / static_cast<double>(n) + regularizer(w, h, spec);
}

Evaluation evaluate(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  require_shapes(w, h, spec);
  const std::size_t kk = spec.num_classes;
  const std::size_t d = spec.dim;
  const std::size_t n = h.cols();
  const double nd = static_cast<double>(n);
  const bool wide = static_cast<std::ptrdiff_t>(n * kk * d) > kParallelWork;
  const std::vector<std::size_t> labels = column_labels(spec.counts);

  Matrix resid(kk, n);
  std::vector<double> ce(n);
#pragma omp parallel if (wide)
  {
    std::vector<double> z(kk);
#pragma omp for schedule(static)
    for (std::ptrdiff_t col = 0; col < static_cast<std::ptrdiff_t>(n); ++col) {
      const auto c = static_cast<std::size_t>(col);
      for (std::size_t k = 0; k < kk; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += w(k, j) * h(j, c);
        z[k] = s;
      }
      ce[c] = softmax_residual(z, labels[c]);
      for (std::size_t k = 0; k < kk; ++k) resid(k, c) = z[k];
    }
  }

  Evaluation out{sum_in_order(ce) / nd + regularizer(w, h, spec), Matrix(kk, d), Matrix(d, n)};

#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t e = 0; e < static_cast<std::ptrdiff_t>(kk * d); ++e) {
    const std::size_t k = static_cast<std::size_t>(e) / d;
    const std::size_t j = static_cast<std::size_t>(e) % d;
    const auto rk = resid.row(k);
    const auto hj = h.row(j);
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) s += rk[c] * hj[c];
    out.grad_w(k, j) = s / nd + spec.lambda_w * w(k, j);
  }

#pragma omp parallel for schedule(static) if (wide)
  for (std::ptrdiff_t col = 0; col < static_cast<std::ptrdiff_t>(n); ++col) {
    const auto c = static_cast<std::size_t>(col);
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < kk; ++k) s += w(k, j) * resid(k, c);
      out.grad_h(j, c) = s / nd + spec.lambda_h * h(j, c);
    }
  }
  return out;
}

namespace serial {

double loss(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  require_shapes(w, h, spec);
  const Matrix z = linalg::serial::matmul(w, h);
  const std::vector<std::size_t> labels = column_labels(spec.counts);
  std::vector<double> ce(h.cols());
  for (std::size_t c = 0; c < h.cols(); ++c) ce[c] = cross_entropy(z.column(c), labels[c]);
  return sum_in_order(ce) / static_cast<double>(h.cols()) + regularizer(w, h, spec);
}

Evaluation evaluate(const Matrix& w, const Matrix& h, const ProblemSpec& spec) {
  require_shapes(w, h, spec);
  const std::size_t n = h.cols();
  const double nd = static_cast<double>(n);
  const std::vector<std::size_t> labels = column_labels(spec.counts);

  Matrix resid = linalg::serial::matmul(w, h);
  std::vector<double> ce(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<double> z = resid.column(c);
    ce[c] = softmax_residual(z, labels[c]);
    resid.set_column(c, z);
  }

  Evaluation out{sum_in_order(ce) / nd + regularizer(w, h, spec), linalg::serial::matmul_nt(resid, h),
                 linalg::serial::matmul_tn(w, resid)};
  for (std::size_t i = 0; i < out.grad_w.size(); ++i) {
    out.grad_w.data()[i] = out.grad_w.data()[i] / nd + spec.lambda_w * w.data()[i];
  }
  for (std::size_t i = 0; i < out.grad_h.size(); ++i) {
    out.grad_h.data()[i] = out.grad_h.data()[i] / nd + spec.lambda_h * h.data()[i];
  }
  return out;
}

}  // namespace serial

}  // namespace collapse::kernels
