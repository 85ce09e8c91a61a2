// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "inform/diffcore/tensor.hpp"
#include "inform/orchestrator/rollout.hpp"

namespace inform {

/// self: ||d log P(E_i | x) / d h_i|| for each available expert i.
/// selected: ||d log P(E_sel | x) / d h_i|| for the realized selection.
enum class AttributionMode { self, selected };

std::string_view to_string(AttributionMode mode) noexcept;
AttributionMode parse_attribution_mode(std::string_view text);

struct AttributionReport {
  std::size_t epoch = 0;
  Vector intrinsic;   // I(E_i)
  Vector relational;  // mean incoming mass u_j
  std::size_t samples = 0;
  AttributionMode mode = AttributionMode::self;
};

/// The chain positions a prompt is attributed over.
struct AttributionPath {
  std::vector<ChainState> states;
  std::vector<std::size_t> chosen;
};

AttributionPath attribution_path(const RolloutResult& r);

/// Per-expert gradient norms for one prompt, averaged over the steps at
/// which the expert contributes (self: steps where it is available;
/// selected: every step). The chain context x_t is held constant.
/// Throws NonFinite naming the prompt.
Vector intrinsic_importance(const PromptContext& ctx, const OrchestratorView& view, const AttributionPath& path,
                            AttributionMode mode);

struct AttributionOptions {
  std::size_t k = 1;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  AttributionMode mode = AttributionMode::self;
  std::size_t epoch = 0;
};

/// Intrinsic and relational importance averaged over prompts. Each prompt
/// is rolled out once with a stream keyed by (seed, prompt id).
AttributionReport attribute(const OrchestratorView& view, std::span<const PromptContext> prompts,
                            const AttributionOptions& opts);

}  // namespace inform
