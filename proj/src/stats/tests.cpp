// SPDX-License-Identifier: Apache-2.0
#include "inform/stats/tests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "inform/error.hpp"

namespace inform::stats {

std::string_view to_string(TestMethod method) noexcept {
  switch (method) {
    case TestMethod::spearman_t: return "spearman_t";
    case TestMethod::spearman_permutation: return "spearman_permutation";
    case TestMethod::kendall_tau_a: return "kendall_tau_a";
    case TestMethod::kendall_tau_b: return "kendall_tau_b";
    case TestMethod::wilcoxon_exact: return "wilcoxon_exact";
    case TestMethod::wilcoxon_normal: return "wilcoxon_normal";
    case TestMethod::paired_t: return "paired_t";
  }
  return "unknown";
}

namespace {

// Modified Lentz evaluation of the incomplete-beta continued fraction.
double beta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-15;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double num = m * (b - m) * x / ((a + m2 - 1.0) * (a + m2));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    num = -(a + m) * (a + b + m) * x / ((a + m2) * (a + m2 + 1.0));
    d = 1.0 + num * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + num / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) return h;
  }
  throw Error(ErrorCode::NonFinite, "incomplete beta continued fraction did not converge");
}

void require_pair(std::span<const double> x, std::span<const double> y, std::size_t min_n) {
  if (x.size() != y.size()) throw Error(ErrorCode::InvalidArgument, "samples differ in length");
  if (x.size() < min_n) {
    throw Error(ErrorCode::InvalidArgument, "at least " + std::to_string(min_n) + " paired samples are required");
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw Error(ErrorCode::NonFinite, "non-finite sample");
  }
}

bool is_constant(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw Error(ErrorCode::InvalidArgument, "incomplete beta argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The fraction converges quickly for x < (a + 1) / (a + b + 2); use the
  // symmetry relation otherwise.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::InvalidArgument, "degrees of freedom must be positive");
  if (std::isnan(t)) throw Error(ErrorCode::NonFinite, "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return clamp_p(regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5));
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile probability must lie in (0, 1)");
  double lo = -1.0;
  double hi = 1.0;
  while (student_t_cdf(lo, df) > p) lo *= 2.0;
  while (student_t_cdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, df) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

TestResult spearman_from_rho(double rho, std::size_t n) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "spearman needs n >= 4");
  if (!(rho >= -1.0 && rho <= 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [-1, 1]");
  TestResult r{rho, 0.0, TestMethod::spearman_t, n};
  if (std::abs(rho) == 1.0) return r;
  const double df = static_cast<double>(n) - 2.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  r.p_value = student_t_two_sided_p(t, df);
  return r;
}

TestResult spearman(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y, 4);
  if (is_constant(x) || is_constant(y)) throw Error(ErrorCode::ConstantInput, "spearman of a constant input");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return spearman_from_rho(pearson(rx, ry), x.size());
}

TestResult spearman_permutation(std::span<const double> x, std::span<const double> y) {
  require_pair(x, y, 4);
  if (x.size() > 10) throw Error(ErrorCode::InvalidArgument, "exact permutation test limited to n <= 10");
  if (is_constant(x) || is_constant(y)) throw Error(ErrorCode::ConstantInput, "spearman of a constant input");
  const std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  const double observed = pearson(rx, ry);
  std::sort(ry.begin(), ry.end());
  std::size_t extreme = 0;
  std::size_t total = 0;
  // Small slack so permutations tying the observed |rho| count as extreme.
  const double bound = std::abs(observed) - 1e-12;
  do {
    ++total;
    if (std::abs(pearson(rx, ry)) >= bound) ++extreme;
  } while (std::next_permutation(ry.begin(), ry.end()));
  // next_permutation visits distinct orderings only; with tied ranks every
  // distinct ordering has the same multiplicity, so the ratio is unchanged.
  return {observed, static_cast<double>(extreme) / static_cast<double>(total), TestMethod::spearman_permutation,
          x.size()};
}

TestResult kendall(std::span<const double> x, std::span<const double> y, KendallVariant variant) {
  require_pair(x, y, 4);
  if (is_constant(x) || is_constant(y)) throw Error(ErrorCode::ConstantInput, "kendall of a constant input");
  const std::size_t n = x.size();
  long long s = 0;
  long long tx = 0;
  long long ty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0) ++tx;
      if (dy == 0.0) ++ty;
      if (dx == 0.0 || dy == 0.0) continue;
      s += (dx > 0.0) == (dy > 0.0) ? 1 : -1;
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  TestResult r;
  r.n = n;
  if (variant == KendallVariant::tau_a) {
    r.method = TestMethod::kendall_tau_a;
    r.statistic = static_cast<double>(s) / pairs;
  } else {
    r.method = TestMethod::kendall_tau_b;
    r.statistic = static_cast<double>(s) / std::sqrt((pairs - static_cast<double>(tx)) * (pairs - static_cast<double>(ty)));
  }

  if (tx == 0 && ty == 0 && n <= 50) {
    // Distribution of the inversion count over all n! permutations:
    // S = pairs - 2 * inversions.
    const std::size_t max_inv = n * (n - 1) / 2;
    std::vector<double> counts(max_inv + 1, 0.0);
    counts[0] = 1.0;
    for (std::size_t m = 2; m <= n; ++m) {
      std::vector<double> next(max_inv + 1, 0.0);
      for (std::size_t k = 0; k <= max_inv; ++k) {
        if (counts[k] == 0.0) continue;
        for (std::size_t add = 0; add < m && k + add <= max_inv; ++add) next[k + add] += counts[k];
      }
      counts = std::move(next);
    }
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double extreme = 0.0;
    for (std::size_t k = 0; k <= max_inv; ++k) {
      const long long sk = static_cast<long long>(max_inv) - 2 * static_cast<long long>(k);
      if (std::llabs(sk) >= std::llabs(s)) extreme += counts[k];
    }
    r.p_value = clamp_p(extreme / total);
    return r;
  }
  const double nd = static_cast<double>(n);
  const double var_s = nd * (nd - 1.0) * (2.0 * nd + 5.0) / 18.0;
  const double z = static_cast<double>(s) / std::sqrt(var_s);
  r.p_value = clamp_p(2.0 * (1.0 - normal_cdf(std::abs(z))));
  return r;
}

TestResult wilcoxon_signed_rank(std::span<const double> differences) {
  std::vector<double> d;
  for (double v : differences) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite difference");
    if (v != 0.0) d.push_back(v);
  }
  if (d.empty()) throw Error(ErrorCode::AllZero, "all differences are zero");
  if (d.size() < 3) throw Error(ErrorCode::TooFewSamples, "wilcoxon needs at least three non-zero differences");
  const std::size_t n = d.size();
  std::vector<double> mags(n);
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(d[i]);
  const std::vector<double> ranks = average_ranks(mags);
  double w_plus = 0.0;
  double w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) (d[i] > 0.0 ? w_plus : w_minus) += ranks[i];
  const double w = std::min(w_plus, w_minus);

  TestResult r;
  r.statistic = w;
  r.n = n;
  if (n <= 20) {
    // Average ranks are multiples of 1/2; doubling makes them integers.
    std::vector<std::size_t> twice(n);
    std::size_t sum2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      twice[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
      sum2 += twice[i];
    }
    std::vector<double> ways(sum2 + 1, 0.0);
    ways[0] = 1.0;
    for (std::size_t rk : twice) {
      for (std::size_t s = sum2; s + 1 > rk; --s) ways[s] += ways[s - rk];
    }
    const auto w2 = static_cast<std::size_t>(std::llround(2.0 * w));
    double extreme = 0.0;
    for (std::size_t s = 0; s <= sum2; ++s) {
      if (std::min(s, sum2 - s) <= w2) extreme += ways[s];
    }
    r.method = TestMethod::wilcoxon_exact;
    r.p_value = clamp_p(extreme / std::ldexp(1.0, static_cast<int>(n)));
    return r;
  }
  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0;
  std::vector<double> sorted = mags;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    var -= (t * t * t - t) / 48.0;
    i = j + 1;
  }
  const double z = std::max(0.0, std::abs(w - mean) - 0.5) / std::sqrt(var);
  r.method = TestMethod::wilcoxon_normal;
  r.p_value = clamp_p(2.0 * (1.0 - normal_cdf(z)));
  return r;
}

namespace {

std::pair<double, double> mean_sd(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

TestResult paired_t(std::span<const double> differences) {
  if (differences.size() < 2) throw Error(ErrorCode::TooFewSamples, "paired t-test needs n >= 2");
  for (double v : differences) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite difference");
  }
  const auto [mean, sd] = mean_sd(differences);
  if (sd == 0.0) throw Error(ErrorCode::ZeroVariance, "differences have zero variance");
  const double n = static_cast<double>(differences.size());
  const double t = mean / (sd / std::sqrt(n));
  return {t, student_t_two_sided_p(t, n - 1.0), TestMethod::paired_t, differences.size()};
}

MeanCI mean_ci95(std::span<const double> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::TooFewSamples, "confidence interval needs n >= 2");
  for (double v : samples) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "non-finite sample");
  }
  const auto [mean, sd] = mean_sd(samples);
  const double n = static_cast<double>(samples.size());
  if (sd == 0.0) return {mean, 0.0};
  return {mean, student_t_quantile(0.975, n - 1.0) * sd / std::sqrt(n)};
}

}  // namespace inform::stats
