// SPDX-License-Identifier: Apache-2.0
#include "inform/probes/summary.hpp"

#include "inform/diffcore/ops.hpp"
#include "inform/probes/metrics.hpp"

namespace inform {

Vector first_choice_distribution(const Vector& logits, std::string_view prompt_id, const FirstChoiceOptions& opts) {
  const std::span<const double> l = logits.span();
  const std::vector<bool> masked = sentinel_mask(l);
  if (opts.closed_form) return Vector(softmax_row(l, masked));
  if (opts.draws == 0) throw Error(ErrorCode::InvalidArgument, "at least one draw is required");
  Rng rng = derive_stream(opts.seed, {fnv1a("first-choice"), fnv1a(prompt_id)});
  Vector mean(logits.size());
  for (std::size_t k = 0; k < opts.draws; ++k) {
    const Vector noise = gumbel_noise(logits.size(), rng);
    const std::vector<double> soft = gumbel_soft(l, noise.span(), opts.temperature, masked);
    for (std::size_t i = 0; i < soft.size(); ++i) mean[i] += soft[i];
  }
  for (double& x : mean) x /= static_cast<double>(opts.draws);
  return mean;
}

PromptRouting route_prompt(const PromptContext& ctx, const OrchestratorView& view, const FirstChoiceOptions& opts) {
  const ChainState state = initial_state(ctx, view);
  PromptRouting r;
  r.collab = interaction_matrix(ctx.base_outputs(), view);
  r.logits = selection_logits(view, state.input, r.collab, 0, state.available);
  r.first_choice = first_choice_distribution(r.logits, ctx.prompt_id(), opts);
  return r;
}

RoutingSummary summarize_routing(const OrchestratorView& view, std::span<const PromptContext> prompts,
                                 const FirstChoiceOptions& opts) {
  if (prompts.empty()) throw Error(ErrorCode::InvalidArgument, "routing summary over an empty prompt set");
  const std::size_t n = view.experts();
  RoutingSummary s;
  s.first_choice_marginal = Vector(n);
  s.incoming_mass = Vector(n);
  s.mean_collab = Matrix(n, n);
  for (const PromptContext& ctx : prompts) {
    const PromptRouting r = route_prompt(ctx, view, opts);
    const Vector u = relational_importance(r.collab);
    s.collab_entropy += collab_entropy(r.collab);
    s.ordering_entropy_conditional += dist_entropy(r.first_choice);
    s.gini_mean += gini(u);
    for (std::size_t i = 0; i < n; ++i) {
      s.first_choice_marginal[i] += r.first_choice[i];
      s.incoming_mass[i] += u[i];
      for (std::size_t j = 0; j < n; ++j) s.mean_collab(i, j) += r.collab(i, j);
    }
  }
  const double m = static_cast<double>(prompts.size());
  s.collab_entropy /= m;
  s.ordering_entropy_conditional /= m;
  s.gini_mean /= m;
  for (double& x : s.first_choice_marginal) x /= m;
  for (double& x : s.incoming_mass) x /= m;
  for (double& x : s.mean_collab.span()) x /= m;
  s.ordering_entropy = dist_entropy(s.first_choice_marginal);
  s.gini = gini(s.incoming_mass);
  return s;
}

}  // namespace inform
