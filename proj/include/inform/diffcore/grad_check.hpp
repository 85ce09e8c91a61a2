// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "inform/diffcore/tape.hpp"
#include "inform/error.hpp"

namespace inform {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// Compares the taped gradient of `f` against central differences.
/// `f` must be callable with both std::span<const double> and
/// std::span<const ad::Var> (a generic lambda is the usual shape).
/// Relative error per coordinate is |analytic - numeric| / max(|analytic|, 1e-8).
///
/// When `f` also accepts std::span<const long double> the differences are
/// taken in extended precision. Rounding in a double evaluation is about
/// 1e-16 |f| / step, which swamps gradients near the 1e-8 floor.
template <class F>
GradCheckResult grad_check(F&& f, std::span<const double> point, double step) {
  if (!(step >= 1e-7 && step <= 1e-3)) throw Error(ErrorCode::InvalidArgument, "grad_check step outside [1e-7, 1e-3]");

  ad::Tape tape;
  std::vector<ad::Var> leaves;
  leaves.reserve(point.size());
  for (double x : point) leaves.push_back(tape.variable(x));
  const ad::Var out = f(std::span<const ad::Var>(leaves));
  if (!std::isfinite(out.value)) throw Error(ErrorCode::NonFinite, "function value at the check point");

  GradCheckResult result;
  result.analytic = tape.gradient(out, leaves);
  result.numeric.resize(point.size());
  using Probe = std::conditional_t<std::is_invocable_v<F&, std::span<const long double>>, long double, double>;
  std::vector<Probe> probe(point.begin(), point.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    probe[i] = static_cast<Probe>(point[i]) + static_cast<Probe>(step);
    const Probe up = f(std::span<const Probe>(probe));
    probe[i] = static_cast<Probe>(point[i]) - static_cast<Probe>(step);
    const Probe down = f(std::span<const Probe>(probe));
    probe[i] = point[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error(ErrorCode::NonFinite, "function value near the check point, coordinate " + std::to_string(i));
    }
    result.numeric[i] = static_cast<double>((up - down) / (2 * static_cast<Probe>(step)));
    const double a = result.analytic[i];
    const double err = std::abs(a - result.numeric[i]) / std::max(std::abs(a), 1e-8);
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace inform
