// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "inform/experts/consortium.hpp"
#include "inform/experts/types.hpp"
#include "inform/orchestrator/params.hpp"
#include "inform/orchestrator/rollout.hpp"
#include "inform/orchestrator/routing.hpp"
#include "inform/training/config.hpp"
#include "inform/training/loss.hpp"
#include "inform/training/optimizer.hpp"

namespace inform {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to continue training or to probe a trained model.
struct TrainState {
  OrchestratorParams params;
  OptimizerState optimizer;
  ModelConfig model;
  double confidence_ema = 0.0;
  double temperature = 1.0;
  std::size_t epoch = 0;  // completed epochs
  std::size_t step = 0;   // completed optimizer steps

  std::size_t current_k() const;
};

struct Checkpoint {
  std::string config_hash;
  TrainState state;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws IoError when unreadable, SchemaError on a malformed file and
/// ConfigError if `expected_hash` is non-empty and differs.
Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_hash = {});

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  LossBreakdown loss;     // mean over the epoch's training prompts
  double collab_entropy = 0.0;
  double ordering_entropy = 0.0;
  double ordering_entropy_conditional = 0.0;
  double gini = 0.0;
  double gini_mean = 0.0;
  std::size_t k = 0;
  double confidence_ema = 0.0;
  double temperature = 0.0;
  double learning_rate = 0.0;
  double grad_norm = 0.0;  // mean pre-clip norm
  Vector first_choice_marginal;
  Vector incoming_mass;
};

struct TrainOptions {
  std::optional<std::filesystem::path> out_dir;  // checkpoints, metrics.jsonl, trace.jsonl
  std::string config_hash;
  std::optional<std::filesystem::path> resume_from;
  bool write_trace = true;
};

struct TrainResult {
  TrainState state;
  std::vector<EpochMetrics> metrics;
  std::vector<std::filesystem::path> checkpoints;
};

/// Per-prompt expert access for a prompt set.
std::vector<PromptContext> build_contexts(const Consortium& consortium, std::span<const PromptInstance> prompts,
                                          std::uint64_t run_seed);

TrainState initial_train_state(const TrainConfig& cfg, const ModelConfig& model, std::size_t experts, std::size_t dim);

/// Trains on `corpus` and evaluates routing metrics on `eval` at the end of
/// every epoch. Only this function and the loss see oracle outputs.
TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const Consortium& consortium,
                  std::span<const PromptInstance> corpus, std::span<const PromptInstance> eval,
                  const TrainOptions& options = {});

}  // namespace inform
