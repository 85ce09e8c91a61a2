// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "inform/diffcore/tensor.hpp"

namespace inform {

/// Task families; they play the roles of arithmetic word problems, code
/// synthesis and multiple-choice knowledge questions.
enum class TaskTag { arith, code, knowledge };

std::string_view to_string(TaskTag tag) noexcept;
TaskTag parse_task_tag(std::string_view text);

struct PromptInstance {
  std::string id;
  std::string text;
  Vector target;  // unit-norm embedding of the ideal answer
  TaskTag task = TaskTag::arith;
};

struct ExpertProfile {
  int expert_id = 0;  // 1-based, unique within a consortium
  std::uint64_t family_seed = 0;
  double temperature = 0.0;
  double capability = 1.0;  // in [0, 1]
  std::string family;
  std::string size;
};

struct ExpertOutput {
  int expert_id = 0;
  Vector embedding;  // unit norm
  double token_entropy = 0.0;
};

}  // namespace inform
