// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "inform/diffcore/tensor.hpp"
#include "inform/orchestrator/rollout.hpp"

namespace inform {

/// How s(x), the distribution of the first selected expert, is estimated.
/// By default it is the mean of `draws` relaxed Gumbel samples at
/// `temperature`; the noise depends only on (seed, prompt id), so a prompt
/// and its perturbed or masked variants see identical draws.
struct FirstChoiceOptions {
  bool closed_form = false;
  std::size_t draws = 64;
  std::uint64_t seed = 0;
  double temperature = 1.0;
};

Vector first_choice_distribution(const Vector& logits, std::string_view prompt_id, const FirstChoiceOptions& opts);

/// Step-0 routing state of one prompt.
struct PromptRouting {
  CollabMatrix collab;
  Vector logits;
  Vector first_choice;  // s(x)
};

PromptRouting route_prompt(const PromptContext& ctx, const OrchestratorView& view, const FirstChoiceOptions& opts);

/// Routing statistics over a prompt set.
struct RoutingSummary {
  double collab_entropy = 0.0;                // mean row entropy, averaged over prompts
  double ordering_entropy = 0.0;              // entropy of the prompt-averaged s(x)
  double ordering_entropy_conditional = 0.0;  // mean per-prompt entropy of s(x)
  double gini = 0.0;                          // Gini of the prompt-averaged incoming mass
  double gini_mean = 0.0;                     // mean per-prompt Gini
  Vector first_choice_marginal;
  Vector incoming_mass;
  Matrix mean_collab;
};

RoutingSummary summarize_routing(const OrchestratorView& view, std::span<const PromptContext> prompts,
                                 const FirstChoiceOptions& opts);

}  // namespace inform
