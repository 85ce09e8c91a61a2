// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "inform/diffcore/rng.hpp"
#include "inform/diffcore/tensor.hpp"
#include "inform/experts/types.hpp"

namespace inform {

/// Prior token-level entropy of an expert: better experts are more confident.
double base_entropy(double capability) noexcept;

/// A simulated expert. Its fixed maps are derived from the family seed:
/// `mixing` is close to the identity (I + 0.3 G / sqrt(d)) and `distractor`
/// is a dense Gaussian map whose image is nearly orthogonal to the input.
///
/// Response to an input embedding p:
///   h = normalize(c * M p + (1 - c) * normalize(D p) + tau * eps / sqrt(d))
/// with c the capability, tau the decoding temperature and eps ~ N(0, I).
class ExpertModel {
 public:
  ExpertModel(ExpertProfile profile, std::size_t dim);

  const ExpertProfile& profile() const noexcept { return profile_; }
  std::size_t dim() const noexcept { return dim_; }
  const Matrix& mixing() const noexcept { return mixing_; }

  ExpertOutput respond(std::span<const double> input, Rng& rng) const;

 private:
  ExpertProfile profile_;
  std::size_t dim_;
  Matrix mixing_;
  Matrix distractor_;
};

ExpertOutput expert_respond(const ExpertModel& expert, const Vector& prompt_embedding, Rng& rng);

/// Expert pool. Requires at least two experts with unique ids.
class Consortium {
 public:
  Consortium(std::vector<ExpertProfile> profiles, std::size_t dim);

  std::size_t size() const noexcept { return experts_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const ExpertModel& expert(std::size_t index) const { return experts_.at(index); }
  std::vector<ExpertProfile> profiles() const;

 private:
  std::size_t dim_;
  std::vector<ExpertModel> experts_;
};

/// Ten equal-capacity experts from three families with the decoding
/// temperature ladder {8e-6, 0.2, 0.5, 0.5, 8e-6, 1.0, 8e-6, 1.5, 2.0, 8e-6}.
std::vector<ExpertProfile> homogeneous_profiles();

/// Same temperature ladder over 1B / 3B / 7B tiers mapped to capability
/// 0.3 / 0.6 / 1.0.
std::vector<ExpertProfile> heterogeneous_profiles();

}  // namespace inform
