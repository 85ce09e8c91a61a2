// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "inform/diffcore/tensor.hpp"
#include "json.hpp"

namespace inform::cli {

struct TrainingRow {
  std::size_t epoch = 0;
  double loss = 0.0;
  double collab_entropy = 0.0;
  double ordering_entropy = 0.0;
  double gini = 0.0;
  std::size_t k = 0;
  double temperature = 0.0;

  bool operator==(const TrainingRow&) const = default;
};

struct RoutingRow {
  double collab_entropy = 0.0;
  double ordering_entropy = 0.0;
  double ordering_entropy_conditional = 0.0;
  double gini = 0.0;
  double gini_mean = 0.0;

  bool operator==(const RoutingRow&) const = default;
};

struct ExpertRow {
  int expert_id = 0;
  double intrinsic_self = 0.0;
  double intrinsic_selected = 0.0;
  double relational = 0.0;
  double first_choice = 0.0;

  bool operator==(const ExpertRow&) const = default;
};

struct PerturbationRow {
  std::string kind;
  double kl_sequence = 0.0;
  double kl_sequence_ci = 0.0;
  double kl_collab = 0.0;
  double delta_entropy = 0.0;
  std::size_t prompts = 0;
  std::size_t noops = 0;
  std::size_t skipped = 0;

  bool operator==(const PerturbationRow&) const = default;
};

struct MaskingRow {
  std::string label;  // task or dataset name
  std::string strategy;
  std::vector<int> experts;  // masked expert ids, one per draw
  double kl_sequence = 0.0;
  double kl_sequence_ci = 0.0;
  double kl_sequence_surviving = 0.0;
  double kl_routing = 0.0;
  double kl_routing_ci = 0.0;
  double kl_collab = 0.0;

  bool operator==(const MaskingRow&) const = default;
};

/// kl_routing / kl_sequence; empty when the denominator is zero.
std::optional<double> routing_over_sequence(const MaskingRow& row);

struct AlignmentRow {
  std::string mode;  // attribution mode behind I
  std::size_t n = 0;
  double spearman_rho = 0.0;
  double spearman_p = 1.0;
  std::optional<double> spearman_exact_p;
  double kendall_tau = 0.0;
  double kendall_p = 1.0;

  bool operator==(const AlignmentRow&) const = default;
};

struct CascadeRow {
  int expert_id = 0;
  double sensitivity = 0.0;
  double skip_kl = 0.0;
  double mean_stop_prob = 0.0;
  double hard_stop_frequency = 0.0;

  bool operator==(const CascadeRow&) const = default;
};

/// Each probe command fills its own sections; `report` merges them.
struct ProbeReport {
  std::string config_hash;
  std::optional<std::size_t> epoch;  // checkpoint epoch; 0 = untrained
  std::vector<TrainingRow> training;
  std::optional<RoutingRow> routing;
  std::vector<ExpertRow> experts;
  std::vector<PerturbationRow> perturbations;
  std::vector<MaskingRow> masking;
  std::vector<AlignmentRow> alignment;
  std::vector<CascadeRow> cascade;

  bool empty() const noexcept;
  bool operator==(const ProbeReport&) const = default;
};

nlohmann::json to_json(const ProbeReport& report);
/// Throws SchemaError.
ProbeReport probe_report_from_json(const nlohmann::json& doc);

/// Later non-empty sections replace earlier ones.
void merge_into(ProbeReport& target, const ProbeReport& part);

// ---------------------------------------------------------------------------
// CSV tables. Numbers are written with 6 significant digits.

using Cell = std::variant<std::string, double>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string format_number(double value);
std::string to_csv(const Table& table);
/// Every cell comes back as text; see `number_at`.
Table parse_csv(const std::string& text);
/// Numeric value of a parsed cell; empty cells are missing values.
std::optional<double> number_at(const Table& table, std::size_t row, const std::string& column);
std::string text_at(const Table& table, std::size_t row, const std::string& column);

Table training_table(const std::vector<TrainingRow>& rows);
Table routing_table(const RoutingRow& row);
Table experts_table(const std::vector<ExpertRow>& rows);
Table perturbation_table(const std::vector<PerturbationRow>& rows);
Table masking_table(const std::vector<MaskingRow>& rows);
Table alignment_table(const std::vector<AlignmentRow>& rows);
Table cascade_table(const std::vector<CascadeRow>& rows);

std::vector<PerturbationRow> perturbation_rows(const Table& table);
std::vector<MaskingRow> masking_rows(const Table& table);

// ---------------------------------------------------------------------------
// Heatmap export: a square matrix with labels, stored row-major.

struct MatrixExport {
  std::string name;
  std::vector<std::string> labels;
  Matrix values;
};

nlohmann::json to_json(const MatrixExport& m);
MatrixExport matrix_export_from_json(const nlohmann::json& doc);

// ---------------------------------------------------------------------------
// File helpers; failures throw IoError.

void write_file(const std::filesystem::path& path, const std::string& text);
std::string read_file(const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace inform::cli
