// SPDX-License-Identifier: Apache-2.0
#pragma once

// Differentiable primitives, written over a generic scalar so the same code
// serves plain evaluation (double) and taped evaluation (ad::Var).

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "inform/diffcore/rng.hpp"
#include "inform/diffcore/tape.hpp"
#include "inform/diffcore/tensor.hpp"
#include "inform/error.hpp"

namespace inform {

/// Logit assigned to unavailable entries. Kept finite so shapes stay fixed.
inline constexpr double kMaskedLogit = -1e9;

inline bool is_masked_logit(double x) noexcept { return x <= 0.5 * kMaskedLogit; }

/// Row softmax with excluded entries forced to exactly zero.
template <class T>
std::vector<T> softmax_row(std::span<const T> v, const std::vector<bool>& masked) {
  using std::exp;
  using ad::exp;
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (masked[i]) continue;
    const double x = ad::value_of(v[i]);
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "softmax input at index " + std::to_string(i));
    if (x > max) max = x;
  }
  if (max == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorCode::AllMasked, "softmax over an empty support");
  }
  std::vector<T> out(v.size(), T(0.0));
  std::vector<T> live;
  live.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (masked[i]) continue;
    out[i] = exp(v[i] - max);
    live.push_back(out[i]);
  }
  const T total = ad::sum(std::span<const T>(live));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!masked[i]) out[i] = out[i] / total;
  }
  return out;
}

/// log softmax_row(v)[index], computed in log-sum-exp form.
template <class T>
T log_softmax_at(std::span<const T> v, const std::vector<bool>& masked, std::size_t index) {
  using std::exp;
  using std::log;
  using ad::exp;
  using ad::log;
  if (masked[index]) throw Error(ErrorCode::AllMasked, "log-probability of a masked entry");
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (masked[i]) continue;
    const double x = ad::value_of(v[i]);
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, "log-softmax input at index " + std::to_string(i));
    if (x > max) max = x;
  }
  std::vector<T> terms;
  terms.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!masked[i]) terms.push_back(exp(v[i] - max));
  }
  return v[index] - max - log(ad::sum(std::span<const T>(terms)));
}

template <class T>
T cosine_sim(std::span<const T> a, std::span<const T> b) {
  using std::sqrt;
  using ad::sqrt;
  const T aa = ad::dot(a, a);
  const T bb = ad::dot(b, b);
  if (ad::value_of(aa) == 0.0 || ad::value_of(bb) == 0.0) {
    throw Error(ErrorCode::ZeroVector, "cosine similarity of a zero vector");
  }
  return ad::dot(a, b) / (sqrt(aa) * sqrt(bb));
}

/// Natural-log entropy, 0 log 0 = 0.
template <class T>
T entropy(std::span<const T> p) {
  using std::log;
  using ad::log;
  T h(0.0);
  for (const T& x : p) {
    if (ad::value_of(x) > 0.0) h -= x * log(x);
  }
  return h;
}

// Plain-value conveniences.
Vector softmax_row(const Vector& v, std::span<const std::size_t> masked_indices = {});
double cosine_sim(const Vector& a, const Vector& b);

struct GumbelSample {
  Vector soft;        // softmax((logits + noise) / temperature)
  std::size_t hard;   // argmax of logits + noise over the unmasked support
  Vector noise;       // the Gumbel(0, 1) draws, kept for replay
};

/// Draws i.i.d. Gumbel(0, 1) noise.
Vector gumbel_noise(std::size_t n, Rng& rng);

/// Gumbel-Softmax sample. Entries at kMaskedLogit are excluded from both
/// the soft and the hard outputs. `min_temperature` is the configured floor.
GumbelSample gumbel_softmax(const Vector& logits, double temperature, Rng& rng, double min_temperature = 0.0);

/// Soft relaxation from given noise; differentiable in the logits.
template <class T>
std::vector<T> gumbel_soft(std::span<const T> logits, std::span<const double> noise, double temperature,
                           const std::vector<bool>& masked) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::NonPositiveTemperature, "gumbel temperature must be > 0");
  std::vector<T> z(logits.size(), T(0.0));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!masked[i]) z[i] = (logits[i] + noise[i]) / temperature;
  }
  return softmax_row(std::span<const T>(z), masked);
}

/// Straight-through estimator: forward value is the one-hot of `hard`,
/// gradient is that of `soft`.
template <class T>
std::vector<T> straight_through(const std::vector<T>& soft, std::size_t hard) {
  std::vector<T> y(soft.size());
  for (std::size_t i = 0; i < soft.size(); ++i) {
    y[i] = T(i == hard ? 1.0 : 0.0) + (soft[i] - ad::stop_gradient(soft[i]));
  }
  return y;
}

/// Mask vector from a logit vector carrying kMaskedLogit sentinels.
std::vector<bool> sentinel_mask(std::span<const double> logits);

}  // namespace inform
