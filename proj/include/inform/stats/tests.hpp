// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace inform::stats {

enum class TestMethod {
  spearman_t,
  spearman_permutation,
  kendall_tau_a,
  kendall_tau_b,
  wilcoxon_exact,
  wilcoxon_normal,
  paired_t,
};

std::string_view to_string(TestMethod method) noexcept;

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::spearman_t;
  std::size_t n = 0;
};

// Distribution functions.

/// I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double x, double a, double b);
double student_t_cdf(double t, double df);
/// P(|T| >= |t|) for T ~ t(df).
double student_t_two_sided_p(double t, double df);
/// Inverse CDF by bisection on student_t_cdf.
double student_t_quantile(double p, double df);
double normal_cdf(double z);

// Rank statistics.

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Spearman rho with the t-approximation p-value on n - 2 degrees of freedom.
/// Throws ConstantInput if either input is constant, InvalidArgument for
/// n < 4 or unequal lengths.
TestResult spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided t-approximation p for a given rho and n; |rho| = 1 gives 0.
TestResult spearman_from_rho(double rho, std::size_t n);

/// Exact permutation p for Spearman (all n! orderings of y), n <= 10.
TestResult spearman_permutation(std::span<const double> x, std::span<const double> y);

enum class KendallVariant { tau_a, tau_b };

/// Kendall tau. The p-value is exact (inversion-count distribution) when
/// there are no ties and n <= 50, otherwise a normal approximation.
TestResult kendall(std::span<const double> x, std::span<const double> y, KendallVariant variant = KendallVariant::tau_a);

/// Wilcoxon signed-rank on paired differences. Zeros are dropped; exact
/// null distribution for n <= 20, normal approximation with continuity and
/// tie corrections above. The statistic is min(W+, W-).
/// Throws AllZero when every difference is zero, TooFewSamples when fewer
/// than three non-zero differences remain.
TestResult wilcoxon_signed_rank(std::span<const double> differences);

/// One-sample t-test of the mean difference against 0.
/// Throws TooFewSamples for n < 2, ZeroVariance for a constant sample.
TestResult paired_t(std::span<const double> differences);

struct MeanCI {
  double mean = 0.0;
  double halfwidth = 0.0;
};

/// Mean and t-based 95% half-width. Throws TooFewSamples for n < 2.
MeanCI mean_ci95(std::span<const double> samples);

}  // namespace inform::stats
