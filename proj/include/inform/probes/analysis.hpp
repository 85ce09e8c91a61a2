// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "inform/diffcore/tensor.hpp"
#include "inform/experts/consortium.hpp"
#include "inform/experts/types.hpp"
#include "inform/orchestrator/cascade.hpp"
#include "inform/orchestrator/rollout.hpp"
#include "inform/probes/attribution.hpp"
#include "inform/probes/perturb.hpp"
#include "inform/probes/summary.hpp"
#include "inform/stats/tests.hpp"

namespace inform {

struct ProbeSettings {
  FirstChoiceOptions first_choice;  // s(x) estimation
  double epsilon = 1e-10;           // KL smoothing
  std::size_t routing_depth = 3;    // chain steps whose transitions enter the routing kernel
  std::size_t mask_random_seeds = 20;
  std::uint64_t perturbation_seed = 0;
  std::vector<std::string> reasoning_cues = default_reasoning_cues();
};

/// Mean per-row KL(base_i || variant_i) over rows active in `variant`, with
/// the baseline restricted to the variant's support and renormalized.
double routing_kl(const Matrix& base, const Matrix& variant, const std::vector<bool>& variant_active, double epsilon);

// ---------------------------------------------------------------------------
// Perturbation sensitivity

struct PerturbationReport {
  PerturbationKind kind = PerturbationKind::remove_numbers;
  double kl_sequence = 0.0;      // mean KL(s_base || s_perturbed)
  double kl_sequence_ci = 0.0;   // 95% half-width over prompts
  double kl_collab = 0.0;        // mean per-row KL between C_base and C_perturbed
  double delta_entropy = 0.0;    // mean H(s_perturbed) - H(s_base)
  std::size_t prompts = 0;
  std::size_t noops = 0;
  std::size_t skipped = 0;       // perturbation left no tokens to encode
  std::vector<double> per_prompt_kl;
};

/// Re-queries the consortium with perturbed prompts; the perturbed prompt
/// keeps its id, so expert noise and Gumbel draws are shared with the
/// baseline.
PerturbationReport perturbation_sensitivity(const OrchestratorView& view, const Consortium& consortium,
                                            std::uint64_t run_seed, std::span<const PromptInstance> prompts,
                                            PerturbationKind kind, const ProbeSettings& settings);

// ---------------------------------------------------------------------------
// Masking interventions

enum class MaskStrategy { top_intrinsic, top_frequent, random_nontop };

std::string_view to_string(MaskStrategy strategy) noexcept;
MaskStrategy parse_mask_strategy(std::string_view text);

/// Routing kernel actually executed by the orchestrator: row i is the
/// distribution of the next selection given that expert i was just selected,
/// pooled over chain steps t < depth and weighted by the probability of each
/// prefix. Computed by exact enumeration (N^(depth-1) chain prefixes). Rows of
/// experts that are never selected are left at zero.
Matrix routing_distribution(const PromptContext& ctx, const OrchestratorView& view, const ProbeSettings& settings);

struct MaskingOutcome {
  std::size_t expert = 0;
  double kl_sequence = 0.0;            // KL(s_base || s_masked), full support
  double kl_sequence_surviving = 0.0;  // same, baseline restricted to survivors
  double kl_routing = 0.0;
  double kl_collab = 0.0;  // same comparison on C(x) itself
  std::vector<double> per_prompt_sequence;
  std::vector<double> per_prompt_routing;
};

MaskingOutcome mask_and_measure(const OrchestratorView& view, std::span<const PromptContext> prompts,
                                std::size_t expert, const ProbeSettings& settings);

struct MaskingReport {
  MaskStrategy strategy = MaskStrategy::top_intrinsic;
  std::vector<MaskingOutcome> outcomes;  // one per masked draw
  double kl_sequence = 0.0;              // mean over outcomes
  double kl_sequence_surviving = 0.0;
  double kl_routing = 0.0;
  double kl_collab = 0.0;
  double kl_sequence_ci = 0.0;  // 95% half-width over prompts (single draw) or draws
  double kl_routing_ci = 0.0;
};

/// Picks the expert(s) to mask: argmax I, argmax u (ties to the lowest
/// index), or `draws` seeded picks among the remaining experts.
std::vector<std::size_t> mask_targets(MaskStrategy strategy, const Vector& intrinsic, const Vector& relational,
                                      std::size_t draws, std::uint64_t seed);

MaskingReport masking_analysis(const OrchestratorView& view, std::span<const PromptContext> prompts,
                               MaskStrategy strategy, const AttributionReport& attribution,
                               const ProbeSettings& settings);

// ---------------------------------------------------------------------------
// Alignment between intrinsic and relational importance

struct AlignmentReport {
  stats::TestResult spearman;
  std::optional<stats::TestResult> spearman_exact;  // n <= 10
  stats::TestResult kendall;
};

AlignmentReport alignment_report(const Vector& intrinsic, const Vector& relational);

// ---------------------------------------------------------------------------
// Cascade

struct CascadeSettings {
  double threshold = 1.0;
  double beta = 2.0;
};

struct CascadeReport {
  Vector sensitivity;      // mean |d p_stop(i) / d H_i|
  Vector skip_kl;          // mean KL(p_stop || p_stop with expert i skipped)
  Vector mean_stop_probs;
  Vector hard_stop_frequency;
  std::vector<CascadeRecord> records;
};

/// Cascade over the consortium order using each prompt's token entropies.
CascadeReport cascade_sensitivity(std::span<const PromptContext> prompts, const CascadeSettings& settings,
                                  double epsilon = 1e-10);

}  // namespace inform
