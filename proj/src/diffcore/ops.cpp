// SPDX-License-Identifier: Apache-2.0
#include "inform/diffcore/ops.hpp"

namespace inform {

Vector softmax_row(const Vector& v, std::span<const std::size_t> masked_indices) {
  std::vector<bool> masked(v.size(), false);
  for (std::size_t i : masked_indices) {
    if (i >= v.size()) throw Error(ErrorCode::InvalidArgument, "masked index out of range");
    masked[i] = true;
  }
  return Vector(softmax_row(v.span(), masked));
}

double cosine_sim(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "cosine of unequal lengths");
  return cosine_sim(a.span(), b.span());
}

std::vector<bool> sentinel_mask(std::span<const double> logits) {
  std::vector<bool> masked(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) masked[i] = is_masked_logit(logits[i]);
  return masked;
}

Vector gumbel_noise(std::size_t n, Rng& rng) {
  Vector g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = -std::log(-std::log(uniform_open(rng)));
  return g;
}

GumbelSample gumbel_softmax(const Vector& logits, double temperature, Rng& rng, double min_temperature) {
  if (!(temperature > 0.0)) throw Error(ErrorCode::NonPositiveTemperature, "gumbel temperature must be > 0");
  if (temperature < min_temperature) {
    throw Error(ErrorCode::InvalidArgument, "gumbel temperature below the configured floor");
  }
  const std::vector<bool> masked = sentinel_mask(logits.span());
  Vector noise = gumbel_noise(logits.size(), rng);
  std::size_t hard = logits.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (masked[i]) continue;
    const double z = logits[i] + noise[i];
    if (z > best) {
      best = z;
      hard = i;
    }
  }
  if (hard == logits.size()) throw Error(ErrorCode::AllMasked, "gumbel-softmax over an empty support");
  Vector soft(gumbel_soft(logits.span(), noise.span(), temperature, masked));
  return {std::move(soft), hard, std::move(noise)};
}

}  // namespace inform
