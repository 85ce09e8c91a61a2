// SPDX-License-Identifier: Apache-2.0
#pragma once

// Privileged teacher signal. Only the training objective includes this
// header; the orchestrator's inference path never sees an OracleOutput.

#include "inform/diffcore/tensor.hpp"
#include "inform/experts/types.hpp"

namespace inform {

struct OracleOutput {
  Vector embedding;  // unit norm
};

/// Noise-free answer direction: the prompt's target, bit for bit.
OracleOutput oracle_respond(const PromptInstance& prompt);

}  // namespace inform
