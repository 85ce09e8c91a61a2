// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "inform/experts/consortium.hpp"
#include "inform/experts/tasks.hpp"
#include "inform/orchestrator/routing.hpp"
#include "inform/probes/analysis.hpp"
#include "inform/probes/attribution.hpp"
#include "inform/training/config.hpp"
#include "json.hpp"

namespace inform::cli {

struct ConsortiumSpec {
  std::string kind = "homogeneous";  // homogeneous | heterogeneous | custom
  std::size_t dim = 32;
  std::vector<ExpertProfile> profiles;  // only for kind = custom
};

struct TaskSpec {
  TaskMix mix{{TaskTag::arith, 1.0}};
  std::size_t prompts = 200;
  std::size_t eval_prompts = 50;
};

struct ProbeConfig {
  std::size_t draws = 64;  // Gumbel draws behind s(x)
  bool closed_form = false;
  double epsilon = 1e-10;
  std::size_t routing_depth = 3;
  std::size_t mask_random_seeds = 20;
  std::uint64_t perturbation_seed = 0;
  AttributionMode attribution_mode = AttributionMode::self;
  int cue_version = kReasoningCueVersion;
  std::vector<std::string> reasoning_cues = default_reasoning_cues();
  std::vector<PerturbationKind> kinds = all_perturbation_kinds();
};

/// Everything needed to reproduce a run. `train.seed` is always taken from
/// `seed`; `out` does not enter the config hash.
struct RunConfig {
  std::uint64_t seed = 0;
  ConsortiumSpec consortium;
  TaskSpec tasks;
  TrainConfig train;
  ModelConfig model;
  ProbeConfig probe;
  CascadeSettings cascade;
  std::string out = "runs/default";

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Overlays `doc` on the defaults. Unknown keys and mistyped values throw
/// ConfigError naming the dotted key.
RunConfig run_config_from_json(const nlohmann::json& doc);

/// Applies INFORM_<SECTION>__<KEY>=value overrides, `__` separating nesting
/// levels (case-insensitive). Values are parsed as JSON when possible and
/// taken as strings otherwise.
void apply_env_overrides(nlohmann::json& doc, const std::vector<std::pair<std::string, std::string>>& env);

/// INFORM_* entries of the process environment.
std::vector<std::pair<std::string, std::string>> inform_environment();

/// Reads the file (if any), then applies environment overrides.
RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::pair<std::string, std::string>>& env);

/// 16 hex digits of FNV-1a over the canonical dump, `out` excluded.
std::string config_hash(const RunConfig& cfg);

/// Same digest over the sections that determine training (seed, consortium,
/// tasks, train, model). Checkpoints, metrics and traces carry this one, so
/// changing probe settings does not orphan a trained run.
std::string training_hash(const RunConfig& cfg);

TrainConfig effective_train_config(const RunConfig& cfg);
Consortium make_consortium(const RunConfig& cfg);

struct PromptSets {
  std::vector<PromptInstance> train;
  std::vector<PromptInstance> eval;
};

/// Training and held-out prompts; held-out ids carry an "eval-" prefix.
PromptSets make_prompt_sets(const RunConfig& cfg);

ProbeSettings probe_settings(const RunConfig& cfg, double temperature);

}  // namespace inform::cli
