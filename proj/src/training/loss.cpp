// SPDX-License-Identifier: Apache-2.0
#include "inform/training/loss.hpp"

#include <numeric>

#include "inform/diffcore/tape.hpp"

namespace inform {

std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k,
                                       const std::vector<bool>& available) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (available[i]) idx.push_back(i);
  }
  k = std::min(k, idx.size());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

namespace {

void require_square(const Matrix& C) {
  if (C.rows() != C.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
}

}  // namespace

double symmetry_loss(const Matrix& C) {
  require_square(C);
  return loss::symmetry(C.span(), C.rows());
}

double sparsity_loss(const Matrix& C) {
  require_square(C);
  return loss::sparsity(C.span(), C.rows(), std::vector<bool>(C.rows(), true));
}

double oracle_alignment_loss(const Matrix& C, const Vector& pi, const Matrix& expert_outputs, const Vector& oracle) {
  require_square(C);
  const std::size_t n = C.rows();
  if (pi.size() != n || expert_outputs.rows() != n || expert_outputs.cols() != oracle.size()) {
    throw Error(ErrorCode::DimensionMismatch, "oracle alignment operand shapes");
  }
  return loss::oracle_alignment(C.span(), pi.span(), expert_outputs.span(), oracle.span(), n, oracle.size(),
                                std::vector<bool>(n, true));
}

double diversity_loss(const Vector& pi, std::span<const std::size_t> topk, double sign) {
  for (std::size_t i : topk) {
    if (i >= pi.size()) throw Error(ErrorCode::InvalidArgument, "top-k index out of range");
  }
  if (topk.empty()) throw Error(ErrorCode::InvalidArgument, "empty top-k set");
  return loss::diversity(pi.span(), topk, std::vector<bool>(pi.size(), true), sign);
}

FrozenRollout freeze(const RolloutResult& r, const PromptContext& ctx, const OrchestratorView& view,
                     const Vector& target, const OracleOutput& oracle, double temperature) {
  if (r.steps.empty()) throw Error(ErrorCode::InvalidArgument, "empty rollout");
  FrozenRollout fr;
  fr.prompt_id = r.prompt_id;
  fr.base = ctx.base_outputs();
  fr.first_input = r.steps.front().input;
  fr.first_available = r.steps.front().available;
  fr.active.resize(view.experts());
  for (std::size_t i = 0; i < view.experts(); ++i) fr.active[i] = !view.is_masked(i);
  const SelectionStep& last = r.steps.back();
  fr.last_step = last.step_index;
  fr.last_input = last.input;
  fr.last_available = last.available;
  fr.last_source = r.step_candidates.back();
  fr.last_noise = last.noise;
  fr.last_chosen = last.chosen;
  fr.final_candidates = r.step_candidates.back();
  fr.k = r.steps.size();
  fr.topk = top_k_indices(r.first_choice_dist.span(), fr.k, fr.first_available);
  fr.temperature = temperature;
  fr.target = target;
  fr.oracle = oracle.embedding;
  return fr;
}

void anchor_relaxation(FrozenRollout& fr, const OrchestratorParams& params, const ModelConfig& model) {
  const ParamLayout& L = params.layout();
  std::vector<bool> excluded(L.experts);
  for (std::size_t i = 0; i < L.experts; ++i) excluded[i] = !fr.active[i];
  const std::vector<double> C = routing::collab(L, params.values(), std::span<const double>(fr.base.span()), model.diagonal, excluded);
  fr.soft_anchor = Vector(detail::last_relaxed_sample(L, params.values(), std::span<const double>(C), fr, model, excluded));
}

namespace {

template <class T>
LossBreakdown breakdown_of(const LossTerms<T>& t, const FrozenRollout& fr, std::span<const double> pi) {
  LossBreakdown b;
  b.utility = ad::value_of(t.utility);
  b.distill = ad::value_of(t.distill);
  b.symm = ad::value_of(t.symm);
  b.spar = ad::value_of(t.spar);
  b.oracle = ad::value_of(t.oracle);
  b.diver = ad::value_of(t.diver);
  b.sel = ad::value_of(t.sel);
  b.len = ad::value_of(t.len);
  b.total = ad::value_of(t.total);
  const std::pair<const char*, double> terms[] = {{"utility", b.utility}, {"distill", b.distill}, {"symm", b.symm},
                                                  {"spar", b.spar},       {"oracle", b.oracle},   {"diver", b.diver},
                                                  {"sel", b.sel},         {"len", b.len},         {"total", b.total}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::NonFinite,
                  std::string("loss term '") + name + "' is not finite for prompt '" + fr.prompt_id + "'");
    }
  }
  const double var_over_m = std::abs(loss::diversity(pi, std::span<const std::size_t>(fr.topk), fr.active, 1.0));
  b.diver_literal = -var_over_m;
  b.diver_intent = var_over_m;
  b.sel_selected_mass = loss::selection(pi, std::span<const std::size_t>(fr.topk), fr.active, SelLossMode::selected_mass);
  b.sel_literal = loss::selection(pi, std::span<const std::size_t>(fr.topk), fr.active, SelLossMode::literal);
  return b;
}

std::vector<double> step0_pi(const OrchestratorParams& params, const FrozenRollout& fr, const ModelConfig& model,
                             const std::vector<double>& C) {
  const ParamLayout& L = params.layout();
  const std::vector<double> logits = routing::selection_logits(L, params.values(), fr.first_input.span(),
                                                               std::span<const double>(C), 0, model.gamma,
                                                               fr.first_available);
  std::vector<bool> masked(L.experts);
  for (std::size_t i = 0; i < L.experts; ++i) masked[i] = !fr.first_available[i];
  return softmax_row(std::span<const double>(logits), masked);
}

}  // namespace

LossBreakdown evaluate_loss(const OrchestratorParams& params, const FrozenRollout& fr, const TrainConfig& cfg,
                            const ModelConfig& model) {
  const ParamLayout& L = params.layout();
  const LossTerms<double> t = composite_loss<double>(L, params.values(), fr.base.span(), fr, cfg, model);
  std::vector<bool> excluded(L.experts);
  for (std::size_t i = 0; i < L.experts; ++i) excluded[i] = !fr.active[i];
  const std::vector<double> C = routing::collab(L, params.values(), std::span<const double>(fr.base.span()), model.diagonal, excluded);
  const std::vector<double> pi = step0_pi(params, fr, model, C);
  return breakdown_of(t, fr, pi);
}

LossGradient loss_and_gradient(const OrchestratorParams& params, const FrozenRollout& fr, const TrainConfig& cfg,
                               const ModelConfig& model) {
  const ParamLayout& L = params.layout();
  ad::Tape tape;
  std::vector<ad::Var> theta;
  theta.reserve(params.count());
  for (double v : params.values()) theta.push_back(tape.variable(v));
  const std::vector<ad::Var> H = detail::lift<ad::Var>(fr.base.span());
  const LossTerms<ad::Var> t = composite_loss<ad::Var>(L, theta, H, fr, cfg, model);

  std::vector<bool> excluded(L.experts);
  for (std::size_t i = 0; i < L.experts; ++i) excluded[i] = !fr.active[i];
  const std::vector<double> C = routing::collab(L, params.values(), std::span<const double>(fr.base.span()), model.diagonal, excluded);
  LossGradient out;
  out.breakdown = breakdown_of(t, fr, step0_pi(params, fr, model, C));
  out.gradient = tape.gradient(t.total, theta);
  for (std::size_t i = 0; i < out.gradient.size(); ++i) {
    if (!std::isfinite(out.gradient[i])) {
      throw Error(ErrorCode::NonFinite, "gradient of the total loss is not finite for prompt '" + fr.prompt_id +
                                            "' (parameter " + std::to_string(i) + ")");
    }
  }
  return out;
}

}  // namespace inform
