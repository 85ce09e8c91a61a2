// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scalar summaries of routing distributions. Natural log throughout.

#include <span>

#include "inform/diffcore/tensor.hpp"
#include "inform/orchestrator/routing.hpp"

namespace inform {

/// u_j = sum_{i != j} C_ij.
Vector relational_importance(const Matrix& C);
Vector relational_importance(const CollabMatrix& C);

double dist_entropy(std::span<const double> p);
inline double dist_entropy(const Vector& p) { return dist_entropy(p.span()); }

/// Mean entropy over the active rows.
double collab_entropy(const CollabMatrix& C);
double collab_entropy(const Matrix& C);

/// Mean absolute difference Gini: sum_ij |u_i - u_j| / (2 n sum u).
/// Throws ZeroMass when the total is zero, InvalidArgument on negatives.
double gini(std::span<const double> u);
inline double gini(const Vector& u) { return gini(u.span()); }

/// KL(p || q) on epsilon-smoothed, renormalized copies.
double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon = 1e-10);
inline double kl_divergence(const Vector& p, const Vector& q, double epsilon = 1e-10) {
  return kl_divergence(p.span(), q.span(), epsilon);
}

}  // namespace inform
