// SPDX-License-Identifier: Apache-2.0
#include "inform/training/config.hpp"

#include <cmath>
#include <string>

#include "inform/error.hpp"

namespace inform {

std::string_view to_string(SelLossMode mode) noexcept {
  return mode == SelLossMode::literal ? "literal" : "selected_mass";
}

SelLossMode parse_sel_loss_mode(std::string_view text) {
  if (text == "selected_mass") return SelLossMode::selected_mass;
  if (text == "literal") return SelLossMode::literal;
  throw Error(ErrorCode::ConfigError, "unknown sel_loss_mode '" + std::string(text) + "'");
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ConfigError, what);
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(epochs >= 1, "epochs must be at least 1");
  require(warmup_ratio >= 0.0 && warmup_ratio < 1.0, "warmup_ratio must lie in [0, 1)");
  require(grad_clip_norm > 0.0, "grad_clip_norm must be positive");
  require(gumbel_temp_min > 0.0, "gumbel_temp_min must be positive");
  require(gumbel_temp_min <= gumbel_temp_init, "gumbel_temp_min must not exceed gumbel_temp_init");
  require(gumbel_temp_decay > 0.0 && gumbel_temp_decay <= 1.0, "gumbel_temp_decay must lie in (0, 1]");
  const LossWeights& w = weights;
  require(w.utility >= 0 && w.distill >= 0 && w.symm >= 0 && w.spar >= 0 && w.oracle >= 0 && w.diver >= 0 &&
              w.sel >= 0 && w.len >= 0,
          "loss weights must be non-negative");
  require(alpha >= 0.0, "alpha must be non-negative");
  require(diversity_sign == 1.0 || diversity_sign == -1.0, "diversity_sign must be +1 or -1");
  require(confidence_decay >= 0.0 && confidence_decay < 1.0, "confidence_decay must lie in [0, 1)");
  require(init_scale >= 0.0, "init_scale must be non-negative");
  require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0, "adam betas in [0, 1)");
  require(adam_epsilon > 0.0, "adam_epsilon must be positive");
}

}  // namespace inform
