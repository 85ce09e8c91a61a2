// SPDX-License-Identifier: Apache-2.0
#pragma once

// Interaction and selection modules. The templates take the parameters and
// the expert representations as spans of a generic scalar so the same code
// is evaluated with doubles, with taped parameters (training) or with taped
// expert representations (attribution).

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "inform/diffcore/ops.hpp"
#include "inform/diffcore/tensor.hpp"
#include "inform/orchestrator/params.hpp"

namespace inform {

enum class DiagonalPolicy { masked, free };

struct ModelConfig {
  DiagonalPolicy diagonal = DiagonalPolicy::masked;
  double gamma = 0.1;               // position penalty, fixed
  double chain_blend = 0.5;         // weight of the previous output in successor inputs
  bool recompute_collab_per_step = false;
  bool with_replacement = false;
};

/// Row-stochastic N x N collaboration matrix. Rows of inactive (masked)
/// experts are all zero and their columns carry no mass.
struct CollabMatrix {
  Matrix values;
  DiagonalPolicy diagonal = DiagonalPolicy::masked;
  std::vector<bool> active;

  std::size_t size() const noexcept { return values.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

namespace routing {

/// Row-major collaboration matrix:
///   C_ij = softmax_j( <Q A h_i, K A h_j> / sqrt(d_r) + lambda * cos(h_i, h_j) )
/// with the diagonal excluded under DiagonalPolicy::masked and `excluded`
/// experts removed from both rows and columns.
template <class T>
std::vector<T> collab(const ParamLayout& L, std::span<const T> theta, std::span<const T> H, DiagonalPolicy diagonal,
                      const std::vector<bool>& excluded) {
  const std::size_t n = L.experts;
  const std::size_t d = L.dim;
  const std::size_t dr = L.routing_dim;
  if (H.size() != n * d) throw Error(ErrorCode::DimensionMismatch, "expert representations do not match layout");

  std::vector<T> q(n * dr);
  std::vector<T> k(n * dr);
  std::vector<T> r(dr);
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) continue;
    const std::span<const T> h = H.subspan(i * d, d);
    for (std::size_t a = 0; a < dr; ++a) r[a] = ad::dot(theta.subspan(L.adapter() + a * d, d), h);
    for (std::size_t a = 0; a < dr; ++a) {
      q[i * dr + a] = ad::dot(theta.subspan(L.query() + a * dr, dr), std::span<const T>(r));
      k[i * dr + a] = ad::dot(theta.subspan(L.key() + a * dr, dr), std::span<const T>(r));
    }
  }

  std::vector<T> cos(n * n, T(0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) continue;
    for (std::size_t j = i; j < n; ++j) {
      if (excluded[j]) continue;
      if (i == j && diagonal == DiagonalPolicy::masked) continue;
      const T c = cosine_sim(H.subspan(i * d, d), H.subspan(j * d, d));
      cos[i * n + j] = c;
      cos[j * n + i] = c;
    }
  }

  const T lambda = theta[L.lambda()];
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dr));
  std::vector<T> C(n * n, T(0.0));
  std::vector<T> scores(n);
  std::vector<bool> masked(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i]) continue;
    for (std::size_t j = 0; j < n; ++j) {
      masked[j] = excluded[j] || (diagonal == DiagonalPolicy::masked && i == j);
      scores[j] = T(0.0);
      if (masked[j]) continue;
      scores[j] = ad::dot(std::span<const T>(q).subspan(i * dr, dr), std::span<const T>(k).subspan(j * dr, dr)) *
                      inv_sqrt +
                  lambda * cos[i * n + j];
    }
    const std::vector<T> row = softmax_row(std::span<const T>(scores), masked);
    for (std::size_t j = 0; j < n; ++j) C[i * n + j] = row[j];
  }
  return C;
}

/// Selection logits at chain position t:
///   logit_i = <W_i, x> + phi_i + 0.5 * sum_j (C_ij + C_ji) - gamma * t
/// for available i, kMaskedLogit otherwise.
template <class T>
std::vector<T> selection_logits(const ParamLayout& L, std::span<const T> theta, std::span<const T> x,
                                std::span<const T> C, std::size_t t, double gamma, const std::vector<bool>& available) {
  const std::size_t n = L.experts;
  const std::size_t d = L.dim;
  if (x.size() != d) throw Error(ErrorCode::DimensionMismatch, "selection input dimension");
  bool any = false;
  std::vector<T> logits(n, T(kMaskedLogit));
  for (std::size_t i = 0; i < n; ++i) {
    if (!available[i]) continue;
    any = true;
    T connectivity(0.0);
    for (std::size_t j = 0; j < n; ++j) connectivity += C[i * n + j] + C[j * n + i];
    logits[i] = ad::dot(theta.subspan(L.input_heads() + i * d, d), x) + theta[L.quality() + i] +
                0.5 * connectivity - gamma * static_cast<double>(t);
  }
  if (!any) throw Error(ErrorCode::AllMasked, "no expert available for selection");
  return logits;
}

}  // namespace routing

/// Read-only orchestrator with an optional set of masked experts. Masking
/// never touches the underlying parameters.
class OrchestratorView {
 public:
  OrchestratorView(const OrchestratorParams& params, ModelConfig config);

  const OrchestratorParams& params() const noexcept { return *params_; }
  const ModelConfig& config() const noexcept { return config_; }
  const ParamLayout& layout() const noexcept { return params_->layout(); }
  std::size_t experts() const noexcept { return masked_.size(); }
  const std::vector<bool>& masked() const noexcept { return masked_; }
  bool is_masked(std::size_t expert) const { return masked_.at(expert); }
  std::size_t active_count() const noexcept;

 private:
  friend OrchestratorView mask_expert(const OrchestratorView& view, std::size_t expert);

  const OrchestratorParams* params_;
  ModelConfig config_;
  std::vector<bool> masked_;
};

/// Removes an expert at inference time: its selection logit is the sentinel
/// at every step and its row and column leave C's support. Idempotent.
/// Throws TooFewExperts when fewer than two experts would remain.
OrchestratorView mask_expert(const OrchestratorView& view, std::size_t expert);

/// Same removal applied to an already computed matrix (rows renormalized).
CollabMatrix mask_collab(const CollabMatrix& C, std::size_t expert);

/// H is N x d (one expert representation per row).
CollabMatrix interaction_matrix(const Matrix& H, const OrchestratorView& view);

Vector selection_logits(const OrchestratorView& view, const Vector& input, const CollabMatrix& C, std::size_t t,
                        const std::vector<bool>& available);

/// Number of active chain steps: clamp(ceil(N * (1 - confidence_ema)), 1, N).
std::size_t adaptive_k(double confidence_ema, std::size_t experts);

}  // namespace inform
