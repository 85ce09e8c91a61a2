// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "inform/diffcore/rng.hpp"
#include "inform/diffcore/tensor.hpp"
#include "inform/experts/consortium.hpp"
#include "inform/orchestrator/routing.hpp"

namespace inform {

/// Deterministic access to the consortium for one prompt. The response of
/// expert e at chain step t uses the stream (run_seed, prompt_id, e, t), so
/// results do not depend on the order in which experts are queried.
///
/// A context built from precomputed outputs (ingested traces) cannot
/// re-query experts; every chain step then sees the step-0 outputs.
class PromptContext {
 public:
  PromptContext(const Consortium& consortium, std::uint64_t run_seed, std::string prompt_id, Vector prompt_embedding);
  PromptContext(std::string prompt_id, Vector prompt_embedding, Matrix base_outputs, Vector token_entropies);

  const std::string& prompt_id() const noexcept { return prompt_id_; }
  const Vector& prompt_embedding() const noexcept { return prompt_; }
  std::size_t experts() const noexcept { return base_.rows(); }
  std::size_t dim() const noexcept { return base_.cols(); }

  /// Responses to the raw prompt (N x d).
  const Matrix& base_outputs() const noexcept { return base_; }
  const Vector& token_entropies() const noexcept { return entropies_; }

  /// Responses of every expert to `input` at chain step `step`.
  Matrix respond_all(std::size_t step, std::span<const double> input) const;

 private:
  const Consortium* consortium_ = nullptr;
  std::uint64_t run_seed_ = 0;
  std::string prompt_id_;
  Vector prompt_;
  Matrix base_;
  Vector entropies_;
};

/// Chain position before a selection is made.
struct ChainState {
  std::size_t step = 0;
  std::vector<bool> available;
  Vector input;  // x_t
};

/// Everything the orchestrator computes at one chain position.
struct StepView {
  Matrix candidates;  // responses of every expert to x_t (N x d)
  CollabMatrix collab;
  Vector logits;
  Vector pi;  // softmax of the logits over the available experts
};

ChainState initial_state(const PromptContext& ctx, const OrchestratorView& view);

/// Evaluates step `state.step`. `first_collab` is reused unless the view's
/// config asks for per-step recomputation.
StepView evaluate_step(const PromptContext& ctx, const OrchestratorView& view, const ChainState& state,
                       const CollabMatrix& first_collab);

/// State after choosing `chosen` at `state`; the successor input blends
/// the prompt with the chosen expert's response.
ChainState advance(const PromptContext& ctx, const OrchestratorView& view, const ChainState& state,
                   const StepView& step, std::size_t chosen);

struct SelectionStep {
  std::size_t step_index = 0;
  Vector logits;
  Vector pi;
  std::size_t chosen = 0;
  std::vector<bool> available;
  Vector input;  // x_t
  Vector noise;  // Gumbel draws
  Vector soft;   // relaxed sample at the rollout temperature
};

struct RolloutResult {
  std::string prompt_id;
  CollabMatrix collab;  // computed from the step-0 responses
  std::vector<SelectionStep> steps;
  std::vector<std::size_t> sequence;  // 0-based expert indices
  Vector chain_output;
  Vector first_choice_dist;

  // Chain state reused by the training objective and the probes.
  std::vector<CollabMatrix> step_collabs;  // matrix used at each step
  std::vector<Matrix> step_candidates;     // responses at each step
};

/// k-step sequential selection; sampled without replacement unless the view
/// config says otherwise.
RolloutResult rollout(const PromptContext& ctx, const OrchestratorView& view, std::size_t k, double gumbel_temperature,
                      Rng& rng, double min_temperature = 0.0);

}  // namespace inform
