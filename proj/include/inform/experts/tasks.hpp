// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "inform/diffcore/rng.hpp"
#include "inform/experts/encoder.hpp"
#include "inform/experts/types.hpp"

namespace inform {

/// Synthetic prompt with a deterministic target.
///
/// arith: a two-number word problem with a reasoning cue.
/// code: an imperative function specification.
/// knowledge: a multi-sentence factual passage and question, occasionally
/// carrying a year.
///
/// The target is normalize(encode(text) + 0.5 * encode(answer)), where the
/// answer string is built from the instance's latent parameters.
PromptInstance generate_task(TaskTag tag, Rng& rng, const PromptEncoder& encoder);

/// Relative task weights, e.g. {{arith, 1.0}}.
using TaskMix = std::map<TaskTag, double>;

/// `count` prompts with ids "<tag>-<index>", each drawn from its own stream
/// derived from (seed, index).
std::vector<PromptInstance> generate_corpus(const TaskMix& mix, std::size_t count, std::uint64_t seed,
                                            const PromptEncoder& encoder);

}  // namespace inform
