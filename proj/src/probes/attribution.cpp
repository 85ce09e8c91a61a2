// SPDX-License-Identifier: Apache-2.0
#include "inform/probes/attribution.hpp"

#include <cmath>
#include <string>

#include "inform/diffcore/ops.hpp"
#include "inform/diffcore/tape.hpp"
#include "inform/probes/metrics.hpp"

namespace inform {

std::string_view to_string(AttributionMode mode) noexcept {
  return mode == AttributionMode::self ? "self" : "selected";
}

AttributionMode parse_attribution_mode(std::string_view text) {
  if (text == "self") return AttributionMode::self;
  if (text == "selected") return AttributionMode::selected;
  throw Error(ErrorCode::ConfigError, "unknown attribution mode '" + std::string(text) + "'");
}

AttributionPath attribution_path(const RolloutResult& r) {
  AttributionPath p;
  for (const SelectionStep& s : r.steps) {
    p.states.push_back(ChainState{s.step_index, s.available, s.input});
    p.chosen.push_back(s.chosen);
  }
  return p;
}

Vector intrinsic_importance(const PromptContext& ctx, const OrchestratorView& view, const AttributionPath& path,
                            AttributionMode mode) {
  const ParamLayout& L = view.layout();
  const std::size_t n = L.experts;
  const std::size_t d = L.dim;
  if (ctx.experts() != n || ctx.dim() != d) throw Error(ErrorCode::DimensionMismatch, "context/orchestrator shape");

  ad::Tape tape;
  std::vector<ad::Var> H;
  H.reserve(n * d);
  for (double v : ctx.base_outputs().span()) H.push_back(tape.variable(v));
  const std::vector<ad::Var> theta(view.params().values().begin(), view.params().values().end());
  const std::vector<ad::Var> C = routing::collab<ad::Var>(L, theta, H, view.config().diagonal, view.masked());

  Vector total(n);
  std::vector<std::size_t> counts(n, 0);
  auto add_gradient = [&](const ad::Var& out, std::size_t only) {
    const std::vector<double> g = tape.gradient(out, H);
    for (std::size_t i = 0; i < n; ++i) {
      if (only != n && i != only) continue;
      double sq = 0.0;
      for (std::size_t a = 0; a < d; ++a) sq += g[i * d + a] * g[i * d + a];
      const double norm = std::sqrt(sq);
      if (!std::isfinite(norm)) {
        throw Error(ErrorCode::NonFinite, "attribution gradient is not finite for prompt '" + ctx.prompt_id() + "'");
      }
      total[i] += norm;
      ++counts[i];
    }
  };

  for (std::size_t s = 0; s < path.states.size(); ++s) {
    const ChainState& state = path.states[s];
    std::vector<bool> live = state.available;
    for (std::size_t i = 0; i < n; ++i) live[i] = live[i] && !view.is_masked(i);
    std::vector<ad::Var> step_collab;
    std::span<const ad::Var> Cs(C);
    if (state.step > 0 && view.config().recompute_collab_per_step) {
      // Later-step matrices come from chain responses, which are context.
      const Matrix Ht = ctx.respond_all(state.step, state.input.span());
      const CollabMatrix Ct = interaction_matrix(Ht, view);
      step_collab.assign(Ct.values.span().begin(), Ct.values.span().end());
      Cs = step_collab;
    }
    const std::vector<ad::Var> x(state.input.begin(), state.input.end());
    const std::vector<ad::Var> logits = routing::selection_logits<ad::Var>(L, theta, x, Cs, state.step,
                                                                           view.config().gamma, live);
    std::vector<bool> masked(n);
    for (std::size_t i = 0; i < n; ++i) masked[i] = !live[i];
    if (mode == AttributionMode::selected) {
      add_gradient(log_softmax_at(std::span<const ad::Var>(logits), masked, path.chosen[s]), n);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (live[i]) add_gradient(log_softmax_at(std::span<const ad::Var>(logits), masked, i), i);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) total[i] /= static_cast<double>(counts[i]);
  }
  return total;
}

AttributionReport attribute(const OrchestratorView& view, std::span<const PromptContext> prompts,
                            const AttributionOptions& opts) {
  if (prompts.empty()) throw Error(ErrorCode::InvalidArgument, "attribution over an empty prompt set");
  const std::size_t n = view.experts();
  AttributionReport rep;
  rep.epoch = opts.epoch;
  rep.mode = opts.mode;
  rep.intrinsic = Vector(n);
  rep.relational = Vector(n);
  const std::size_t k = std::min(opts.k, view.active_count());
  for (const PromptContext& ctx : prompts) {
    Rng rng = derive_stream(opts.seed, {fnv1a("attribution"), fnv1a(ctx.prompt_id())});
    const RolloutResult r = rollout(ctx, view, k, opts.temperature, rng);
    const Vector I = intrinsic_importance(ctx, view, attribution_path(r), opts.mode);
    const Vector u = relational_importance(r.collab);
    for (std::size_t i = 0; i < n; ++i) {
      rep.intrinsic[i] += I[i];
      rep.relational[i] += u[i];
    }
    ++rep.samples;
  }
  for (double& x : rep.intrinsic) x /= static_cast<double>(rep.samples);
  for (double& x : rep.relational) x /= static_cast<double>(rep.samples);
  return rep;
}

}  // namespace inform
