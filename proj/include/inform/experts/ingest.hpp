// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "inform/experts/oracle.hpp"
#include "inform/experts/types.hpp"

namespace inform {

struct IngestedRecord {
  PromptInstance prompt;
  std::vector<ExpertOutput> experts;
  OracleOutput oracle;
  std::optional<int> epoch;
};

/// Reads a line-delimited trace file (one JSON object per line).
///
/// Required per record: `prompt_id` (string), `expert_embeddings` (array of
/// N arrays of length `dim`), `oracle_embedding` (array of length `dim`).
/// Optional: `text` (defaults to the prompt id), `task`, `target` (defaults
/// to the oracle embedding), `epoch`, `entropies.token` (per-expert token
/// entropies). Other trace fields (`C`, `s`, `sequence`) are accepted and
/// ignored here. All embeddings are renormalized to unit length.
///
/// Throws SchemaError naming the 1-based line, or DimensionMismatch.
std::vector<IngestedRecord> ingest_embeddings(const std::filesystem::path& path, std::size_t dim);

}  // namespace inform
