// SPDX-License-Identifier: Apache-2.0
#include "inform/orchestrator/rollout.hpp"

#include <algorithm>

#include "inform/diffcore/ops.hpp"

namespace inform {

PromptContext::PromptContext(const Consortium& consortium, std::uint64_t run_seed, std::string prompt_id,
                             Vector prompt_embedding)
    : consortium_(&consortium),
      run_seed_(run_seed),
      prompt_id_(std::move(prompt_id)),
      prompt_(std::move(prompt_embedding)) {
  if (prompt_.size() != consortium.dim()) throw Error(ErrorCode::DimensionMismatch, "prompt embedding dimension");
  base_ = Matrix(consortium.size(), consortium.dim());
  entropies_ = Vector(consortium.size());
  const std::uint64_t key = fnv1a(prompt_id_);
  for (std::size_t e = 0; e < consortium.size(); ++e) {
    Rng rng = derive_stream(run_seed_, {key, e, 0});
    ExpertOutput out = consortium.expert(e).respond(prompt_.span(), rng);
    std::copy(out.embedding.begin(), out.embedding.end(), base_.row(e).begin());
    entropies_[e] = out.token_entropy;
  }
}

PromptContext::PromptContext(std::string prompt_id, Vector prompt_embedding, Matrix base_outputs,
                             Vector token_entropies)
    : prompt_id_(std::move(prompt_id)),
      prompt_(std::move(prompt_embedding)),
      base_(std::move(base_outputs)),
      entropies_(std::move(token_entropies)) {
  if (prompt_.size() != base_.cols()) throw Error(ErrorCode::DimensionMismatch, "prompt embedding dimension");
  if (entropies_.size() != base_.rows()) throw Error(ErrorCode::DimensionMismatch, "token entropy count");
  if (base_.rows() < 2) throw Error(ErrorCode::TooFewExperts, "at least two experts are required");
}

Matrix PromptContext::respond_all(std::size_t step, std::span<const double> input) const {
  if (step == 0 && std::equal(input.begin(), input.end(), prompt_.begin(), prompt_.end())) return base_;
  if (consortium_ == nullptr) return base_;
  Matrix out(experts(), dim());
  const std::uint64_t key = fnv1a(prompt_id_);
  for (std::size_t e = 0; e < experts(); ++e) {
    Rng rng = derive_stream(run_seed_, {key, e, step});
    ExpertOutput r = consortium_->expert(e).respond(input, rng);
    std::copy(r.embedding.begin(), r.embedding.end(), out.row(e).begin());
  }
  return out;
}

ChainState initial_state(const PromptContext& ctx, const OrchestratorView& view) {
  if (ctx.experts() != view.experts() || ctx.dim() != view.layout().dim) {
    throw Error(ErrorCode::DimensionMismatch, "prompt context does not match the orchestrator");
  }
  ChainState s;
  s.available.resize(ctx.experts());
  for (std::size_t i = 0; i < ctx.experts(); ++i) s.available[i] = !view.is_masked(i);
  s.input = ctx.prompt_embedding();
  return s;
}

StepView evaluate_step(const PromptContext& ctx, const OrchestratorView& view, const ChainState& state,
                       const CollabMatrix& first_collab) {
  StepView v;
  v.candidates = state.step == 0 ? ctx.base_outputs() : ctx.respond_all(state.step, state.input.span());
  v.collab = (state.step > 0 && view.config().recompute_collab_per_step) ? interaction_matrix(v.candidates, view)
                                                                         : first_collab;
  v.logits = selection_logits(view, state.input, v.collab, state.step, state.available);
  const std::span<const double> logits = v.logits.span();
  v.pi = Vector(softmax_row(logits, sentinel_mask(logits)));
  return v;
}

ChainState advance(const PromptContext& ctx, const OrchestratorView& view, const ChainState& state,
                   const StepView& step, std::size_t chosen) {
  ChainState next;
  next.step = state.step + 1;
  next.available = state.available;
  if (!view.config().with_replacement) next.available[chosen] = false;
  const double b = view.config().chain_blend;
  next.input = Vector(ctx.dim());
  const auto out = step.candidates.row(chosen);
  for (std::size_t a = 0; a < ctx.dim(); ++a) next.input[a] = (1.0 - b) * ctx.prompt_embedding()[a] + b * out[a];
  return next;
}

RolloutResult rollout(const PromptContext& ctx, const OrchestratorView& view, std::size_t k, double gumbel_temperature,
                      Rng& rng, double min_temperature) {
  ChainState state = initial_state(ctx, view);
  const std::size_t reachable = view.config().with_replacement ? view.experts() : view.active_count();
  if (k < 1 || k > reachable) throw Error(ErrorCode::InvalidArgument, "chain length must lie in [1, active experts]");

  RolloutResult r;
  r.prompt_id = ctx.prompt_id();
  r.collab = interaction_matrix(ctx.base_outputs(), view);
  for (std::size_t t = 0; t < k; ++t) {
    StepView v = evaluate_step(ctx, view, state, r.collab);
    GumbelSample g = gumbel_softmax(v.logits, gumbel_temperature, rng, min_temperature);
    SelectionStep s{t, v.logits, v.pi, g.hard, state.available, state.input, std::move(g.noise), std::move(g.soft)};
    r.sequence.push_back(s.chosen);
    if (t + 1 == k) r.chain_output = Vector(v.candidates.row(s.chosen));
    ChainState next = advance(ctx, view, state, v, s.chosen);
    r.steps.push_back(std::move(s));
    r.step_collabs.push_back(std::move(v.collab));
    r.step_candidates.push_back(std::move(v.candidates));
    state = std::move(next);
  }
  r.first_choice_dist = r.steps.front().pi;
  return r;
}

}  // namespace inform
