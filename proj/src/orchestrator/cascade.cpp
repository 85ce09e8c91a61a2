// SPDX-License-Identifier: Apache-2.0
#include "inform/orchestrator/cascade.hpp"

namespace inform {

CascadeRecord cascade_run(std::string prompt_id, std::span<const double> entropies, double threshold, double beta) {
  require_finite(entropies, "cascade entropies");
  CascadeRecord r;
  r.prompt_id = std::move(prompt_id);
  r.entropies = Vector(entropies);
  r.stop_probs = Vector(cascade::stop_probabilities(entropies, threshold, beta));
  r.stopping_index = entropies.size() - 1;
  for (std::size_t i = 0; i < entropies.size(); ++i) {
    if (entropies[i] < threshold) {
      r.stopping_index = i;
      break;
    }
  }
  return r;
}

Vector stop_sensitivity(std::span<const double> entropies, double threshold, double beta) {
  const std::size_t n = entropies.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "cascade needs at least one expert");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "cascade sharpness must be > 0");
  Vector out(n);
  double survive = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double g = cascade::sigmoid(beta * (threshold - entropies[i]));
    // d g / d H = -beta g (1 - g); the survival prefix does not involve H_i.
    out[i] = std::abs(survive * beta * g * (1.0 - g));
    survive *= 1.0 - g;
  }
  return out;
}

}  // namespace inform
