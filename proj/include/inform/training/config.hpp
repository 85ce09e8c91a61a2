// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace inform {

enum class SelLossMode { selected_mass, literal };

std::string_view to_string(SelLossMode mode) noexcept;
SelLossMode parse_sel_loss_mode(std::string_view text);

struct LossWeights {
  double utility = 0.5;
  double distill = 0.5;
  double symm = 0.05;
  double spar = 0.1;
  double oracle = 0.5;
  double diver = 0.1;
  double sel = 1.0;
  double len = 0.5;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 2;
  std::size_t epochs = 5;
  double warmup_ratio = 0.1;
  double grad_clip_norm = 15.0;
  double gumbel_temp_init = 1.0;
  double gumbel_temp_min = 0.5;
  double gumbel_temp_decay = 0.999;
  bool temp_decay_per_step = true;  // false: decay once per epoch
  LossWeights weights;
  double alpha = 1.0;  // per-call length cost
  SelLossMode sel_loss_mode = SelLossMode::selected_mass;
  double diversity_sign = -1.0;  // -1 reproduces -(1/M) var(s); +1 penalizes imbalance
  double confidence_decay = 0.9;
  double lambda_init = 0.5;
  double init_scale = 0.1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

}  // namespace inform
