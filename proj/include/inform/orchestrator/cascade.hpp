// SPDX-License-Identifier: Apache-2.0
#pragma once

// Fixed-order cascade: experts are consulted in order and inference stops
// at the first one whose token entropy falls below the threshold.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "inform/diffcore/tape.hpp"
#include "inform/diffcore/tensor.hpp"
#include "inform/error.hpp"

namespace inform {

struct CascadeRecord {
  std::string prompt_id;
  Vector entropies;  // H_i in cascade order
  std::size_t stopping_index = 0;
  Vector stop_probs;
};

namespace cascade {

template <class T>
T sigmoid(const T& x) {
  using std::exp;
  using ad::exp;
  return T(1.0) / (T(1.0) + exp(-x));
}

/// p_stop(i) = g_i * prod_{j<i} (1 - g_j), g_i = sigmoid(beta (threshold - H_i));
/// the last expert absorbs the remaining mass.
template <class T>
std::vector<T> stop_probabilities(std::span<const T> H, double threshold, double beta) {
  if (H.empty()) throw Error(ErrorCode::InvalidArgument, "cascade needs at least one expert");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "cascade sharpness must be > 0");
  std::vector<T> p(H.size());
  T survive(1.0);
  for (std::size_t i = 0; i + 1 < H.size(); ++i) {
    const T g = sigmoid(T(beta) * (T(threshold) - H[i]));
    p[i] = g * survive;
    survive = survive * (T(1.0) - g);
  }
  p.back() = survive;
  return p;
}

}  // namespace cascade

/// Hard stopping index plus the soft stopping distribution.
CascadeRecord cascade_run(std::string prompt_id, std::span<const double> entropies, double threshold, double beta);

/// |d p_stop(i) / d H_i| for every i, in closed form. Zero for the last
/// expert, whose mass is the remainder and does not depend on its own H.
Vector stop_sensitivity(std::span<const double> entropies, double threshold, double beta);

}  // namespace inform
