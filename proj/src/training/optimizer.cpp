// SPDX-License-Identifier: Apache-2.0
#include "inform/training/optimizer.hpp"

#include <cmath>
#include <numbers>

#include "inform/error.hpp"

namespace inform {

double scheduled_learning_rate(std::size_t step, std::size_t total_steps, double peak, double warmup_ratio) {
  if (total_steps == 0) throw Error(ErrorCode::InvalidArgument, "schedule needs at least one step");
  const auto warmup = static_cast<std::size_t>(std::llround(warmup_ratio * static_cast<double>(total_steps)));
  if (step < warmup) return peak * static_cast<double>(step) / static_cast<double>(warmup);
  if (step + 1 >= total_steps) return warmup + 1 >= total_steps ? peak : 0.0;
  const double progress = static_cast<double>(step - warmup) / static_cast<double>(total_steps - 1 - warmup);
  return 0.5 * peak * (1.0 + std::cos(std::numbers::pi * progress));
}

double clip_gradient(std::span<double> grad, double max_norm) {
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double scale = max_norm / norm;
    for (double& g : grad) g *= scale;
  }
  return norm;
}

void adam_update(std::span<double> params, std::span<const double> grad, OptimizerState& state,
                 double learning_rate, const AdamConfig& cfg) {
  if (params.size() != grad.size() || state.m.size() != params.size()) {
    throw Error(ErrorCode::DimensionMismatch, "optimizer state does not match the parameters");
  }
  ++state.step;
  state.learning_rate = learning_rate;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace inform
