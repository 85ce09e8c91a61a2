// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace inform {

struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::size_t step = 0;  // completed updates
  double learning_rate = 0.0;

  explicit OptimizerState(std::size_t parameters = 0) : m(parameters, 0.0), v(parameters, 0.0) {}
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Linear warmup from 0 over round(warmup_ratio * total_steps) steps to
/// `peak`, then cosine decay reaching 0 at step total_steps - 1.
double scheduled_learning_rate(std::size_t step, std::size_t total_steps, double peak, double warmup_ratio);

/// Rescales `grad` in place so its L2 norm is at most `max_norm`; returns
/// the norm before clipping.
double clip_gradient(std::span<double> grad, double max_norm);

/// One bias-corrected Adam update at `learning_rate`.
void adam_update(std::span<double> params, std::span<const double> grad, OptimizerState& state,
                 double learning_rate, const AdamConfig& cfg);

}  // namespace inform
