// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace inform {

enum class PerturbationKind { remove_numbers, mask_numbers, shuffle_sentences, remove_reasoning };

std::string_view to_string(PerturbationKind kind) noexcept;
PerturbationKind parse_perturbation_kind(std::string_view text);
std::vector<PerturbationKind> all_perturbation_kinds();

/// Reasoning cue lexicon, version 1.
const std::vector<std::string>& default_reasoning_cues();
inline constexpr int kReasoningCueVersion = 1;

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::remove_numbers;
  std::uint64_t seed = 0;
  std::vector<std::string> cues = default_reasoning_cues();
};

struct PerturbedText {
  std::string text;
  bool noop = false;  // the perturbation found nothing to act on
};

/// remove_numbers deletes digit runs with embedded decimal points;
/// mask_numbers replaces them with "[NUM]"; shuffle_sentences permutes the
/// sentence segments with a seeded shuffle (never the identity when two or
/// more distinct segments exist); remove_reasoning deletes cue phrases
/// case-insensitively at word boundaries.
PerturbedText perturb_prompt(std::string_view text, const PerturbationSpec& spec);

}  // namespace inform
