// SPDX-License-Identifier: Apache-2.0
#include "inform/orchestrator/routing.hpp"

#include <algorithm>
#include <cmath>

namespace inform {

OrchestratorView::OrchestratorView(const OrchestratorParams& params, ModelConfig config)
    : params_(&params), config_(config), masked_(params.layout().experts, false) {}

std::size_t OrchestratorView::active_count() const noexcept {
  return static_cast<std::size_t>(std::count(masked_.begin(), masked_.end(), false));
}

OrchestratorView mask_expert(const OrchestratorView& view, std::size_t expert) {
  if (expert >= view.experts()) throw Error(ErrorCode::InvalidArgument, "expert index out of range");
  OrchestratorView out = view;
  if (out.masked_[expert]) return out;
  if (view.active_count() < 3) throw Error(ErrorCode::TooFewExperts, "masking would leave fewer than two experts");
  out.masked_[expert] = true;
  return out;
}

CollabMatrix mask_collab(const CollabMatrix& C, std::size_t expert) {
  const std::size_t n = C.size();
  if (expert >= n) throw Error(ErrorCode::InvalidArgument, "expert index out of range");
  CollabMatrix out = C;
  if (!out.active[expert]) return out;
  if (std::count(C.active.begin(), C.active.end(), true) < 3) {
    throw Error(ErrorCode::TooFewExperts, "masking would leave fewer than two experts");
  }
  out.active[expert] = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.active[i]) {
      for (std::size_t j = 0; j < n; ++j) out.values(i, j) = 0.0;
      continue;
    }
    out.values(i, expert) = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += out.values(i, j);
    if (total == 0.0) throw Error(ErrorCode::ZeroMass, "row has no mass left after masking");
    for (std::size_t j = 0; j < n; ++j) out.values(i, j) /= total;
  }
  return out;
}

CollabMatrix interaction_matrix(const Matrix& H, const OrchestratorView& view) {
  const ParamLayout& L = view.layout();
  if (H.rows() != L.experts || H.cols() != L.dim) {
    throw Error(ErrorCode::DimensionMismatch, "expert representation matrix does not match the orchestrator");
  }
  std::vector<double> C =
      routing::collab(L, view.params().values(), H.span(), view.config().diagonal, view.masked());
  CollabMatrix out{Matrix(L.experts, L.experts, std::move(C)), view.config().diagonal, {}};
  out.active.resize(L.experts);
  for (std::size_t i = 0; i < L.experts; ++i) out.active[i] = !view.is_masked(i);
  return out;
}

Vector selection_logits(const OrchestratorView& view, const Vector& input, const CollabMatrix& C, std::size_t t,
                        const std::vector<bool>& available) {
  std::vector<bool> live = available;
  for (std::size_t i = 0; i < live.size(); ++i) live[i] = live[i] && !view.is_masked(i);
  return Vector(routing::selection_logits(view.layout(), view.params().values(), input.span(), C.values.span(), t,
                                          view.config().gamma, live));
}

std::size_t adaptive_k(double confidence_ema, std::size_t experts) {
  if (!(confidence_ema >= 0.0 && confidence_ema <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence EMA must lie in [0, 1]");
  }
  // The small slack keeps exact products such as 10 * 0.45 from rounding up.
  const double raw = std::ceil(static_cast<double>(experts) * (1.0 - confidence_ema) - 1e-9);
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, experts);
}

}  // namespace inform
