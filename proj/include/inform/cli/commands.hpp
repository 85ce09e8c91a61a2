// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "inform/cli/reports.hpp"
#include "inform/cli/run_config.hpp"
#include "inform/error.hpp"
#include "inform/training/trainer.hpp"

namespace inform::cli {

/// Flags shared by the subcommands; unset fields fall back to the config.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> epochs;
  std::optional<std::filesystem::path> checkpoint;
  bool untrained = false;  // probe the freshly initialized orchestrator
  std::optional<std::filesystem::path> trace;  // ingest prompts from a trace file
  std::vector<std::string> kinds;
  std::vector<std::string> strategies;
};

/// Config precedence: defaults < file (--config, else <out>/config.json when
/// present) < INFORM_* environment < command-line flags.
RunConfig resolve_config(const CommandOptions& opts, const std::vector<std::pair<std::string, std::string>>& env);

struct RunArtifact {
  std::string config_hash;
  std::string training_hash;
  std::filesystem::path out;
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path metrics;
  std::filesystem::path trace;
  std::vector<EpochMetrics> metrics_rows;
};

/// Writes <out>/config.json, <out>/run.json, checkpoints, metrics.jsonl and
/// trace.jsonl.
RunArtifact cmd_train(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// Each probe command writes <out>/reports/<name>.json plus CSVs and returns
/// the report it wrote.
ProbeReport cmd_probe(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
ProbeReport cmd_perturb(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
ProbeReport cmd_mask(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);
ProbeReport cmd_cascade(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log);

/// Consolidates a run directory into <dir>/report: summary.json, one CSV per
/// metric family and heatmap matrices. Throws IoError when the directory
/// holds no run artifacts.
ProbeReport cmd_report(const std::filesystem::path& dir, std::ostream& log);

/// 0 success, 2 configuration error, 3 numerical abort, 4 I/O error.
int exit_code_for(ErrorCode code) noexcept;

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace inform::cli
