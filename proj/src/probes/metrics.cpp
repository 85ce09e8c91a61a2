// SPDX-License-Identifier: Apache-2.0
#include "inform/probes/metrics.hpp"

#include <cmath>

#include "inform/error.hpp"

namespace inform {

Vector relational_importance(const Matrix& C) {
  if (C.rows() != C.cols()) throw Error(ErrorCode::DimensionMismatch, "collaboration matrix must be square");
  const std::size_t n = C.rows();
  Vector u(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) u[j] += C(i, j);
    }
  }
  return u;
}

Vector relational_importance(const CollabMatrix& C) { return relational_importance(C.values); }

double dist_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x < 0.0 || !std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "not a distribution");
    if (x > 0.0) h -= x * std::log(x);
  }
  return std::max(h, 0.0);
}

double collab_entropy(const CollabMatrix& C) {
  double total = 0.0;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < C.size(); ++i) {
    if (!C.active.empty() && !C.active[i]) continue;
    total += dist_entropy(C.values.row(i));
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::AllMasked, "no active rows");
  return total / static_cast<double>(rows);
}

double collab_entropy(const Matrix& C) {
  return collab_entropy(CollabMatrix{C, DiagonalPolicy::free, std::vector<bool>(C.rows(), true)});
}

double gini(std::span<const double> u) {
  if (u.empty()) throw Error(ErrorCode::InvalidArgument, "gini of an empty vector");
  double total = 0.0;
  for (double x : u) {
    if (x < 0.0 || !std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "gini needs finite non-negative entries");
    total += x;
  }
  if (total == 0.0) throw Error(ErrorCode::ZeroMass, "gini of an all-zero vector");
  double diff = 0.0;
  for (double a : u) {
    for (double b : u) diff += std::abs(a - b);
  }
  return diff / (2.0 * static_cast<double>(u.size()) * total);
}

double kl_divergence(std::span<const double> p, std::span<const double> q, double epsilon) {
  if (p.size() != q.size()) throw Error(ErrorCode::DimensionMismatch, "KL operands differ in length");
  if (p.empty()) throw Error(ErrorCode::InvalidArgument, "KL of empty distributions");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  double zp = 0.0;
  double zq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0 || !std::isfinite(p[i]) || !std::isfinite(q[i])) {
      throw Error(ErrorCode::InvalidArgument, "KL operands must be finite and non-negative");
    }
    zp += p[i] + epsilon;
    zq += q[i] + epsilon;
  }
  if (zp == 0.0 || zq == 0.0) throw Error(ErrorCode::ZeroMass, "KL of an all-zero vector");
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double ps = (p[i] + epsilon) / zp;
    const double qs = (q[i] + epsilon) / zq;
    if (ps > 0.0) kl += ps * std::log(ps / qs);
  }
  return kl;
}

}  // namespace inform
