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

#include <cmath>

#include "collapse/analysis.hpp"
#include "support.hpp"

namespace collapse {
namespace {

using testing::make_spec;
using testing::random_spec;
using testing::unit_etf_gram;

TwoGroupSpec two_group(std::size_t ka, std::size_t kb, std::size_t na, std::size_t nb, double lambda) {
  TwoGroupSpec s;
  s.num_major = ka;
  s.num_minor = kb;
  s.n_major = na;
  s.n_minor = nb;
  s.lambda_w = s.lambda_h = lambda;
  return s;
}

TwoGroupSpec random_two_group(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> kd(2, 5), nb(1, 20), mult(2, 10);
  std::uniform_real_distribution<double> ld(-4.0, -2.0);
  const std::size_t b = nb(rng);
  return two_group(kd(rng), kd(rng), b * mult(rng), b, std::pow(10.0, ld(rng)));
}

TEST(ClassifierGram, MatchesConstructedClassifier) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const ProblemSpec s = random_spec(rng);
    const Matrix w = classifier_from_means(s, canonical_class_means(s));
    const Matrix g = classifier_gram(s);
    EXPECT_LT(linalg::max_abs_diff(linalg::matmul_nt(w, w), g), 1e-12 * std::max(1.0, linalg::max_abs(g)));
  }
}

TEST(ClassifierAngles, FrozenTwoGroupInstance) {
  const ClassifierAngles a = classifier_angles(two_group(2, 2, 20, 5, 0.005));
  EXPECT_NEAR(a.major, -0.47912880154646755, 1e-13);
  EXPECT_NEAR(a.minor, -0.074193722390072783, 1e-13);
  EXPECT_NEAR(a.cross, -0.3472124081000298, 1e-13);
}

TEST(ClassifierAngles, AgreeWithGramOnRandomSpecs) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 50; ++t) {
    const TwoGroupSpec s = random_two_group(rng);
    const Matrix g = classifier_gram(s.to_problem_spec());
    const std::size_t a0 = 0, a1 = 1, b0 = s.num_major, b1 = s.num_major + 1;
    auto cosine = [&](std::size_t i, std::size_t j) { return g(i, j) / std::sqrt(g(i, i) * g(j, j)); };
    const ClassifierAngles a = classifier_angles(s);
    EXPECT_NEAR(a.major, cosine(a0, a1), 1e-12);
    EXPECT_NEAR(a.cross, cosine(a0, b0), 1e-12);
    if (g(b0, b0) > 0.0) EXPECT_NEAR(a.minor, cosine(b0, b1), 1e-12);
    EXPECT_LT(a.major, a.minor);
  }
}

TEST(ClassifierAngles, BalancedGivesSimplexAngle) {
  const ClassifierAngles a = classifier_angles(two_group(3, 2, 6, 6, 0.01));
  EXPECT_NEAR(a.major, -0.25, 1e-14);
  EXPECT_NEAR(a.minor, -0.25, 1e-14);
  EXPECT_NEAR(a.cross, -0.25, 1e-14);
}

TEST(ClassifierAngles, RequiresTwoClassesPerGroup) {
  EXPECT_THROW(classifier_angles(two_group(1, 2, 10, 2, 0.01)), std::invalid_argument);
  EXPECT_THROW(classifier_angles(two_group(2, 2, 8, 2, 0.3)), std::domain_error);
}

TEST(NormRatios, MatchClosedFormNorms) {
  const ProblemSpec s = make_spec({20, 10, 3}, 0.003, 0.007);
  const ClosedFormGeometry g = closed_form_geometry(s);
  const Matrix ww = linalg::matmul_nt(g.classifier, g.classifier);
  const NormRatios r = norm_ratios(s, 0, 2);
  EXPECT_NEAR(r.classifier, ww(0, 0) / ww(2, 2), 1e-12);
  EXPECT_NEAR(r.feature, g.mean_norms_sq[0] / g.mean_norms_sq[2], 1e-12);
  EXPECT_GT(r.classifier, 1.0);
  EXPECT_LT(r.feature, 1.0);
  EXPECT_THROW(norm_ratios(make_spec({8, 2}, 0.1, 0.1), 0, 1), std::domain_error);
}

TEST(CollapseReport, ThreeRegimes) {
  const CollapseReport none = collapse_report(make_spec({8, 2}, 0.01, 0.01, 3));
  EXPECT_EQ(none.collapsed, (std::vector<bool>{false, false}));
  EXPECT_FALSE(none.minority_collapse);
  EXPECT_NEAR(none.threshold, 0.02, 1e-17);

  const CollapseReport minority = collapse_report(make_spec({8, 2}, 0.1, 0.1, 3));
  EXPECT_EQ(minority.collapsed, (std::vector<bool>{false, true}));
  EXPECT_TRUE(minority.minority_collapse);
  EXPECT_FALSE(minority.complete_collapse);

  const CollapseReport all = collapse_report(make_spec({8, 2}, 0.3, 0.3, 3));
  EXPECT_TRUE(all.complete_collapse);
  ASSERT_TRUE(all.minority_ratio_bound.has_value());
}

TEST(CollapseReport, RatioBoundSeparatesRegimes) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 100; ++t) {
    const TwoGroupSpec s = random_two_group(rng);
    const double bound = minority_ratio_bound(s);
    const bool collapsed = is_collapsed(s.to_problem_spec(), s.num_major);
    if (std::abs(s.imbalance_ratio() - bound) > 1e-9 * bound) EXPECT_EQ(collapsed, s.imbalance_ratio() >= bound);
  }
  EXPECT_FALSE(collapse_report(make_spec({5, 3, 1}, 0.01, 0.01)).minority_ratio_bound.has_value());
}

TEST(TwoGroupSpec, FromProblemSpec) {
  const auto g = TwoGroupSpec::from_problem_spec(make_spec({9, 9, 9, 3, 3}, 0.01, 0.02));
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->num_major, 3u);
  EXPECT_EQ(g->num_minor, 2u);
  EXPECT_EQ(g->n_major, 9u);
  EXPECT_EQ(g->n_minor, 3u);
  EXPECT_FALSE(TwoGroupSpec::from_problem_spec(make_spec({3, 9}, 0.01, 0.01)));
  EXPECT_FALSE(TwoGroupSpec::from_problem_spec(make_spec({9, 3, 9}, 0.01, 0.01)));
  EXPECT_FALSE(TwoGroupSpec::from_problem_spec(make_spec({4, 4}, 0.01, 0.01)));
}

// From an SVD of Z = (I - 11^T/K) Y in numpy, counts (4, 4, 1, 1).
TEST(Seli, FrozenGrams) {
  const auto [w, h] = seli_grams({4, 4, 1, 1});
  const Matrix want_w{{0.509485938967517, -0.220810804372704, -0.144337567297406, -0.144337567297406},
                      {-0.220810804372704, 0.509485938967517, -0.144337567297407, -0.144337567297407},
                      {-0.144337567297406, -0.144337567297407, 0.326911753132462, -0.038236618537649},
                      {-0.144337567297406, -0.144337567297407, -0.038236618537649, 0.326911753132462}};
  const Matrix want_h{{0.317716227019713, -0.071533245061048, -0.123091490979333, -0.123091490979333},
                      {-0.071533245061048, 0.317716227019713, -0.123091490979333, -0.123091490979333},
                      {-0.123091490979333, -0.123091490979333, 0.512340963060094, -0.266157981101429},
                      {-0.123091490979333, -0.123091490979333, -0.266157981101429, 0.512340963060094}};
  EXPECT_LT(linalg::max_abs_diff(w, want_w), 1e-12);
  EXPECT_LT(linalg::max_abs_diff(h, want_h), 1e-12);
}

TEST(Seli, BlockGramsMatchClosedForm) {
  const TwoGroupSpec s = two_group(2, 2, 12, 3, 0.004);
  const ProblemSpec p = s.to_problem_spec(6);
  const ClosedFormGeometry g = closed_form_geometry(p);
  const SeliComparison c = seli_compare(s);
  const Matrix ww = linalg::unit_normalized(linalg::matmul_nt(g.classifier, g.classifier));
  EXPECT_LT(linalg::max_abs_diff(ww, c.gram_w_ours), 1e-12);
  Matrix pc = Matrix::identity(4);
  for (double& v : pc.data()) v -= 0.25;
  const Matrix hc = linalg::matmul(linalg::matmul(pc, linalg::matmul_tn(g.class_means, g.class_means)), pc);
  EXPECT_LT(linalg::max_abs_diff(linalg::unit_normalized(hc), c.gram_h_centered_ours), 1e-12);
}

TEST(Seli, GapsPositiveWhenImbalanced) {
  const SeliComparison c = seli_compare(two_group(2, 2, 4, 1, 0.01));
  EXPECT_GT(c.frobenius_gap_w, 1e-3);
  EXPECT_GT(c.frobenius_gap_h, 1e-3);
  EXPECT_GT(c.frobenius_gap_w_limit, 1e-3);
  EXPECT_GT(c.m_ratio_at_lambda, 1.0);
  EXPECT_THROW(seli_compare(two_group(3, 2, 4, 1, 0.01)), std::invalid_argument);
}

TEST(Seli, BalancedLimitIsSimplex) {
  const SeliComparison c = seli_compare(two_group(3, 3, 5, 5, 0.01));
  const Matrix etf = unit_etf_gram(6);
  EXPECT_LT(linalg::frobenius_norm(c.gram_w_ours_limit - etf), 1e-12);
  EXPECT_LT(linalg::frobenius_norm(c.gram_h_centered_ours_limit - etf), 1e-12);
  EXPECT_LT(linalg::frobenius_norm(c.gram_w_seli - etf), 1e-12);
  EXPECT_LT(c.frobenius_gap_w, 1e-12);
}

TEST(MRatio, FrozenLadder) {
  const double want[] = {1.2442307930479805, 1.131421978367093, 1.0912316537769178,
                         1.0699930885521124, 1.0567873045356962, 1.0477747471157813,
                         1.0412311697932273, 1.0362641740826989, 1.03236523222911};
  double prev = 1e300;
  for (int e = 2; e <= 10; ++e) {
    const double lambda = std::pow(10.0, -e);
    const double r = m_ratio_limit(8, 2, 2, 10, lambda, lambda);
    EXPECT_NEAR(r, want[e - 2], 1e-12);
    EXPECT_LT(r, prev);
    EXPECT_GT(r, 1.0);
    prev = r;
  }
  EXPECT_THROW(m_ratio_limit(8, 2, 2, 10, 0.1, 0.1), std::domain_error);
}

TEST(BalancedReduction, GramsAreSimplexOnRandomSpecs) {
  std::mt19937_64 rng(34);
  std::uniform_int_distribution<std::size_t> kd(2, 10), nd(1, 50);
  std::uniform_real_distribution<double> ld(-4.0, -2.0);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = kd(rng);
    const ProblemSpec s = make_spec(std::vector<std::size_t>(k, nd(rng)), std::pow(10.0, ld(rng)),
                                    std::pow(10.0, ld(rng)));
    if (margin_constant(s, 0) == 0.0) continue;
    const ClosedFormGeometry g = closed_form_geometry(s);
    const Matrix etf = unit_etf_gram(k);
    EXPECT_LT(linalg::frobenius_norm(linalg::unit_normalized(linalg::matmul_nt(g.classifier, g.classifier)) - etf),
              1e-10);
  }
}

}  // namespace
}  // namespace collapse
