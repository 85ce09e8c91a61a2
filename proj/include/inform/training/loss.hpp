// SPDX-License-Identifier: Apache-2.0
#pragma once

// Composite training objective. Each term is a template over the scalar
// type so it can be evaluated plainly or on a tape; FrozenRollout fixes the
// discrete decisions of one rollout (sequence, noise, top-k set) so the
// objective is a smooth function of the parameters and of H.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inform/diffcore/ops.hpp"
#include "inform/experts/oracle.hpp"
#include "inform/orchestrator/rollout.hpp"
#include "inform/orchestrator/routing.hpp"
#include "inform/training/config.hpp"

namespace inform {

namespace loss {

/// ||C - C^T||_F^2 for an n x n row-major matrix.
template <class T>
T symmetry(std::span<const T> C, std::size_t n) {
  std::vector<T> diffs;
  diffs.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) diffs.push_back(C[i * n + j] - C[j * n + i]);
    }
  }
  return ad::dot(std::span<const T>(diffs), std::span<const T>(diffs));
}

/// Mean entropy of the active rows.
template <class T>
T sparsity(std::span<const T> C, std::size_t n, const std::vector<bool>& active) {
  T total(0.0);
  std::size_t rows = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    total += entropy(C.subspan(i * n, n));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::AllMasked, "no active rows");
  return total / static_cast<double>(rows);
}

/// (1/(M(M-1))) sum_{i != j} (C_ij - cos((o_i + o_j)/2, o))^2
///   + (1/M) sum_i (pi_i - cos(o_i, o))^2
/// over the M active experts; O holds the expert outputs o_i row-major.
template <class T>
T oracle_alignment(std::span<const T> C, std::span<const T> pi, std::span<const T> O, std::span<const T> o,
                   std::size_t n, std::size_t d, const std::vector<bool>& active) {
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) m += active[i] ? 1 : 0;
  if (m < 2) throw Error(ErrorCode::TooFewExperts, "oracle alignment needs two active experts");
  std::vector<T> mid(d);
  std::vector<T> pair_terms;
  std::vector<T> pi_terms;
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    const std::span<const T> oi = O.subspan(i * d, d);
    const T target_pi = cosine_sim(oi, o);
    pi_terms.push_back((pi[i] - target_pi) * (pi[i] - target_pi));
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || !active[j]) continue;
      const std::span<const T> oj = O.subspan(j * d, d);
      for (std::size_t a = 0; a < d; ++a) mid[a] = 0.5 * (oi[a] + oj[a]);
      const T diff = C[i * n + j] - cosine_sim(std::span<const T>(mid), o);
      pair_terms.push_back(diff * diff);
    }
  }
  const double md = static_cast<double>(m);
  return ad::sum(std::span<const T>(pair_terms)) / (md * (md - 1.0)) + ad::sum(std::span<const T>(pi_terms)) / md;
}

/// sign * (1/M) * var(s), s_i = pi_i 1[i in topk], population variance over
/// the M active experts.
template <class T>
T diversity(std::span<const T> pi, std::span<const std::size_t> topk, const std::vector<bool>& active, double sign) {
  const std::size_t n = pi.size();
  std::vector<T> s(n, T(0.0));
  for (std::size_t i : topk) s[i] = pi[i];
  std::vector<T> live;
  for (std::size_t i = 0; i < n; ++i) {
    if (active[i]) live.push_back(s[i]);
  }
  const double m = static_cast<double>(live.size());
  if (live.empty()) throw Error(ErrorCode::AllMasked, "no active experts");
  const T mean = ad::sum(std::span<const T>(live)) / m;
  for (T& x : live) x = x - mean;
  const T var = ad::dot(std::span<const T>(live), std::span<const T>(live)) / m;
  return sign * var / m;
}

/// selected_mass: -(1/k) sum_{topk} pi_i;  literal: -(1/M) sum_i pi_i.
/// `pi` is a distribution, so the selected mass is taken as one minus the
/// mass outside the set: when the set covers the support the term is then an
/// exact constant instead of a rounding-noisy sum of softmax entries.
template <class T>
T selection(std::span<const T> pi, std::span<const std::size_t> topk, const std::vector<bool>& active,
            SelLossMode mode) {
  std::vector<bool> inside(pi.size(), false);
  double count = 0.0;
  if (mode == SelLossMode::literal) {
    inside = active;
    count = static_cast<double>(std::count(active.begin(), active.end(), true));
  } else {
    if (topk.empty()) throw Error(ErrorCode::InvalidArgument, "empty top-k set");
    for (std::size_t i : topk) inside[i] = true;
    count = static_cast<double>(topk.size());
  }
  if (count == 0.0) throw Error(ErrorCode::AllMasked, "no active experts");
  std::vector<T> outside;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (!inside[i]) outside.push_back(pi[i]);
  }
  const T mass = outside.empty() ? T(1.0) : T(1.0) - ad::sum(std::span<const T>(outside));
  return -mass / count;
}

}  // namespace loss

/// Indices of the k largest entries among `available`, ties to the lowest
/// index, returned in ascending index order.
std::vector<std::size_t> top_k_indices(std::span<const double> values, std::size_t k, const std::vector<bool>& available);

// Plain-value entry points for the individual terms.
double symmetry_loss(const Matrix& C);
double sparsity_loss(const Matrix& C);
double oracle_alignment_loss(const Matrix& C, const Vector& pi, const Matrix& expert_outputs, const Vector& oracle);
double diversity_loss(const Vector& pi, std::span<const std::size_t> topk, double sign = -1.0);

/// The discrete outcome of one rollout plus everything the objective needs.
struct FrozenRollout {
  std::string prompt_id;
  Matrix base;  // H at step 0 (N x d)
  Vector first_input;
  std::vector<bool> first_available;
  std::vector<bool> active;  // not masked
  std::size_t last_step = 0;
  Vector last_input;
  std::vector<bool> last_available;
  Matrix last_source;  // H used for C at the last step when recomputing per step
  Vector last_noise;
  std::size_t last_chosen = 0;
  Matrix final_candidates;  // responses of every expert at the last step
  std::vector<std::size_t> topk;
  std::size_t k = 1;
  double temperature = 1.0;
  Vector target;
  Vector oracle;
  // When set, the straight-through offset subtracts this constant instead of
  // the detached relaxed sample. Anchored at the current parameters this
  // changes neither value nor gradient, but it makes the objective a smooth
  // function that finite differences can check.
  Vector soft_anchor;
};

FrozenRollout freeze(const RolloutResult& r, const PromptContext& ctx, const OrchestratorView& view,
                     const Vector& target, const OracleOutput& oracle, double temperature);

template <class T>
struct LossTerms {
  T utility, distill, symm, spar, oracle, diver, sel, len, total;
};

struct LossBreakdown {
  double utility = 0, distill = 0, symm = 0, spar = 0, oracle = 0, diver = 0, sel = 0, len = 0, total = 0;
  // Both signs of the diversity term, whichever one is optimized.
  double diver_literal = 0, diver_intent = 0;
  // Selection term under both variants.
  double sel_selected_mass = 0, sel_literal = 0;
};

namespace detail {

template <class T>
std::vector<T> lift(std::span<const double> xs) {
  return std::vector<T>(xs.begin(), xs.end());
}

template <class T>
std::vector<T> last_relaxed_sample(const ParamLayout& L, std::span<const T> theta, std::span<const T> C_first,
                                   const FrozenRollout& fr, const ModelConfig& model,
                                   const std::vector<bool>& excluded) {
  const std::size_t n = L.experts;
  std::vector<T> C_last_store;
  std::span<const T> C_last = C_first;
  if (fr.last_step > 0 && model.recompute_collab_per_step) {
    const std::vector<T> src = detail::lift<T>(fr.last_source.span());
    C_last_store = routing::collab(L, theta, std::span<const T>(src), model.diagonal, excluded);
    C_last = C_last_store;
  }
  const std::vector<T> xl = detail::lift<T>(fr.last_input.span());
  const std::vector<T> logits_last = routing::selection_logits(L, theta, std::span<const T>(xl), C_last,
                                                               fr.last_step, model.gamma, fr.last_available);
  std::vector<bool> masked_last(n);
  for (std::size_t i = 0; i < n; ++i) masked_last[i] = !fr.last_available[i];
  return gumbel_soft(std::span<const T>(logits_last), fr.last_noise.span(), fr.temperature, masked_last);
}

}  // namespace detail

/// Full objective for one frozen rollout. `H` replaces fr.base so that
/// gradients with respect to the expert representations can be taken.
template <class T>
LossTerms<T> composite_loss(const ParamLayout& L, std::span<const T> theta, std::span<const T> H,
                            const FrozenRollout& fr, const TrainConfig& cfg, const ModelConfig& model) {
  const std::size_t n = L.experts;
  const std::size_t d = L.dim;
  std::vector<bool> excluded(n);
  for (std::size_t i = 0; i < n; ++i) excluded[i] = !fr.active[i];

  const std::vector<T> C = routing::collab(L, theta, H, model.diagonal, excluded);
  const std::span<const T> Cs(C);

  const std::vector<T> x0 = detail::lift<T>(fr.first_input.span());
  const std::vector<T> logits0 =
      routing::selection_logits(L, theta, std::span<const T>(x0), Cs, 0, model.gamma, fr.first_available);
  std::vector<bool> masked0(n);
  for (std::size_t i = 0; i < n; ++i) masked0[i] = !fr.first_available[i];
  const std::vector<T> pi = softmax_row(std::span<const T>(logits0), masked0);
  const std::span<const T> pis(pi);

  const std::vector<T> soft = detail::last_relaxed_sample(L, theta, Cs, fr, model, excluded);
  std::vector<T> y;
  if (fr.soft_anchor.empty()) {
    y = straight_through(soft, fr.last_chosen);
  } else {
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = T(i == fr.last_chosen ? 1.0 : 0.0) + (soft[i] - fr.soft_anchor[i]);
  }

  // chain output and the final expert's representation, both through y
  T utility(0.0);
  T distill(0.0);
  std::vector<T> col(n);
  std::vector<T> cand(n);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t i = 0; i < n; ++i) {
      cand[i] = T(fr.final_candidates(i, a));
      col[i] = H[i * d + a];
    }
    const T chain = ad::dot(std::span<const T>(y), std::span<const T>(cand));
    const T rep = ad::dot(std::span<const T>(y), std::span<const T>(col));
    const T du = chain - fr.target[a];
    const T dd = fr.oracle[a] - rep;
    utility += du * du;
    distill += dd * dd;
  }

  const std::vector<T> o = detail::lift<T>(fr.oracle.span());
  LossTerms<T> t;
  t.utility = utility;
  t.distill = distill;
  t.symm = loss::symmetry(Cs, n);
  t.spar = loss::sparsity(Cs, n, fr.active);
  t.oracle = loss::oracle_alignment(Cs, pis, H, std::span<const T>(o), n, d, fr.active);
  t.diver = loss::diversity(pis, std::span<const std::size_t>(fr.topk), fr.active, cfg.diversity_sign);
  t.sel = loss::selection(pis, std::span<const std::size_t>(fr.topk), fr.active, cfg.sel_loss_mode);
  t.len = T(static_cast<double>(fr.k) * cfg.alpha);
  const LossWeights& w = cfg.weights;
  t.total = w.utility * t.utility + w.distill * t.distill + w.symm * t.symm + w.spar * t.spar +
            w.oracle * t.oracle + w.diver * t.diver + w.sel * t.sel + w.len * t.len;
  return t;
}

/// Sets fr.soft_anchor to the relaxed sample at `params`.
void anchor_relaxation(FrozenRollout& fr, const OrchestratorParams& params, const ModelConfig& model);

/// Plain evaluation with diagnostics: throws NonFinite naming the first
/// offending term.
LossBreakdown evaluate_loss(const OrchestratorParams& params, const FrozenRollout& fr, const TrainConfig& cfg,
                            const ModelConfig& model);

/// Loss and its gradient with respect to every parameter.
struct LossGradient {
  LossBreakdown breakdown;
  std::vector<double> gradient;
};
LossGradient loss_and_gradient(const OrchestratorParams& params, const FrozenRollout& fr, const TrainConfig& cfg,
                               const ModelConfig& model);

}  // namespace inform
