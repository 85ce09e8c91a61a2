// SPDX-License-Identifier: Apache-2.0
#include "inform/experts/consortium.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "inform/error.hpp"

namespace inform {

namespace {

constexpr double kMixingSpread = 0.3;
constexpr double kEntropyNoise = 0.25;

Matrix gaussian_matrix(std::size_t dim, Rng& rng, double scale) {
  Matrix m(dim, dim);
  for (double& x : m.span()) x = scale * standard_normal(rng);
  return m;
}

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), x);
}

constexpr double kTemperatureLadder[10] = {8e-6, 0.2, 0.5, 0.5, 8e-6, 1.0, 8e-6, 1.5, 2.0, 8e-6};

}  // namespace

double base_entropy(double capability) noexcept { return 1.5 * (1.0 - capability) + 0.2; }

ExpertModel::ExpertModel(ExpertProfile profile, std::size_t dim) : profile_(std::move(profile)), dim_(dim) {
  if (profile_.capability < 0.0 || profile_.capability > 1.0) {
    throw Error(ErrorCode::InvalidArgument, "expert capability must lie in [0, 1]");
  }
  if (profile_.temperature < 0.0) throw Error(ErrorCode::InvalidArgument, "expert temperature must be >= 0");
  Rng rng = derive_stream(profile_.family_seed, {fnv1a("expert-maps")});
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  mixing_ = gaussian_matrix(dim, rng, kMixingSpread * scale);
  for (std::size_t i = 0; i < dim; ++i) mixing_(i, i) += 1.0;
  distractor_ = gaussian_matrix(dim, rng, scale);
}

ExpertOutput ExpertModel::respond(std::span<const double> input, Rng& rng) const {
  if (input.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "expert input dimension");
  if (norm(input) == 0.0) throw Error(ErrorCode::ZeroVector, "expert input embedding has zero norm");

  const double c = profile_.capability;
  std::vector<double> signal(dim_);
  std::vector<double> off(dim_);
  matvec(mixing_, input, signal);
  matvec(distractor_, input, off);
  const Vector off_unit = normalized(off);

  const double noise_scale = profile_.temperature / std::sqrt(static_cast<double>(dim_));
  std::vector<double> raw(dim_);
  for (std::size_t i = 0; i < dim_; ++i) {
    raw[i] = c * signal[i] + (1.0 - c) * off_unit[i] + noise_scale * standard_normal(rng);
  }
  const double entropy =
      std::max(0.0, base_entropy(c) + kEntropyNoise * profile_.temperature * standard_normal(rng));
  return {profile_.expert_id, normalized(raw), entropy};
}

ExpertOutput expert_respond(const ExpertModel& expert, const Vector& prompt_embedding, Rng& rng) {
  return expert.respond(prompt_embedding.span(), rng);
}

Consortium::Consortium(std::vector<ExpertProfile> profiles, std::size_t dim) : dim_(dim) {
  if (profiles.size() < 2) throw Error(ErrorCode::TooFewExperts, "a consortium needs at least two experts");
  std::set<int> ids;
  for (const ExpertProfile& p : profiles) {
    if (!ids.insert(p.expert_id).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate expert id " + std::to_string(p.expert_id));
    }
  }
  experts_.reserve(profiles.size());
  for (ExpertProfile& p : profiles) experts_.emplace_back(std::move(p), dim);
}

std::vector<ExpertProfile> Consortium::profiles() const {
  std::vector<ExpertProfile> out;
  out.reserve(experts_.size());
  for (const ExpertModel& e : experts_) out.push_back(e.profile());
  return out;
}

std::vector<ExpertProfile> homogeneous_profiles() {
  const char* families[3] = {"LLaMA 3.1", "Qwen3", "DeepSeek-R1"};
  std::vector<ExpertProfile> out;
  for (int i = 0; i < 10; ++i) {
    const std::string family = families[i % 3];
    out.push_back({i + 1, fnv1a(family), kTemperatureLadder[i], 1.0, family, "8B"});
  }
  return out;
}

std::vector<ExpertProfile> heterogeneous_profiles() {
  const char* families[3] = {"LLaMA 3.2", "Qwen2.5", "Mistral"};
  const char* sizes[3] = {"1B", "3B", "7B"};
  const double capability[3] = {0.3, 0.6, 1.0};
  std::vector<ExpertProfile> out;
  for (int i = 0; i < 10; ++i) {
    const int tier = i % 3;
    out.push_back({i + 1, fnv1a(families[tier]), kTemperatureLadder[i], capability[tier], families[tier], sizes[tier]});
  }
  return out;
}

}  // namespace inform
