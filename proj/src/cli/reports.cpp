// SPDX-License-Identifier: Apache-2.0
#include "inform/cli/reports.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "inform/error.hpp"

namespace inform::cli {

using nlohmann::json;

std::optional<double> routing_over_sequence(const MaskingRow& row) {
  if (row.kl_sequence == 0.0) return std::nullopt;
  return row.kl_routing / row.kl_sequence;
}

bool ProbeReport::empty() const noexcept {
  return training.empty() && !routing && experts.empty() && perturbations.empty() && masking.empty() &&
         alignment.empty() && cascade.empty();
}

namespace {

[[noreturn]] void schema_fail(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_number(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

template <class Row, class Fn>
std::vector<Row> rows_of(const json& doc, const char* key, Fn fn) {
  std::vector<Row> out;
  if (!doc.contains(key)) return out;
  const json& arr = doc.at(key);
  if (!arr.is_array()) schema_fail(std::string(key) + " must be an array");
  for (const json& j : arr) out.push_back(fn(j));
  return out;
}

}  // namespace

json to_json(const ProbeReport& r) {
  json j = {{"format", "inform-probe-report"}, {"version", 1}, {"config_hash", r.config_hash}};
  j["epoch"] = r.epoch ? json(*r.epoch) : json(nullptr);
  json training = json::array();
  for (const TrainingRow& t : r.training) {
    training.push_back({{"epoch", t.epoch},
                        {"loss", t.loss},
                        {"collab_entropy", t.collab_entropy},
                        {"ordering_entropy", t.ordering_entropy},
                        {"gini", t.gini},
                        {"k", t.k},
                        {"temperature", t.temperature}});
  }
  j["training"] = training;
  if (r.routing) {
    j["routing"] = {{"collab_entropy", r.routing->collab_entropy},
                    {"ordering_entropy", r.routing->ordering_entropy},
                    {"ordering_entropy_conditional", r.routing->ordering_entropy_conditional},
                    {"gini", r.routing->gini},
                    {"gini_mean", r.routing->gini_mean}};
  } else {
    j["routing"] = nullptr;
  }
  json experts = json::array();
  for (const ExpertRow& e : r.experts) {
    experts.push_back({{"expert_id", e.expert_id},
                       {"intrinsic_self", e.intrinsic_self},
                       {"intrinsic_selected", e.intrinsic_selected},
                       {"relational", e.relational},
                       {"first_choice", e.first_choice}});
  }
  j["experts"] = experts;
  json perturb = json::array();
  for (const PerturbationRow& p : r.perturbations) {
    perturb.push_back({{"kind", p.kind},
                       {"kl_sequence", p.kl_sequence},
                       {"kl_sequence_ci", p.kl_sequence_ci},
                       {"kl_collab", p.kl_collab},
                       {"delta_entropy", p.delta_entropy},
                       {"prompts", p.prompts},
                       {"noops", p.noops},
                       {"skipped", p.skipped}});
  }
  j["perturbations"] = perturb;
  json masking = json::array();
  for (const MaskingRow& m : r.masking) {
    masking.push_back({{"label", m.label},
                       {"strategy", m.strategy},
                       {"experts", m.experts},
                       {"kl_sequence", m.kl_sequence},
                       {"kl_sequence_ci", m.kl_sequence_ci},
                       {"kl_sequence_surviving", m.kl_sequence_surviving},
                       {"kl_routing", m.kl_routing},
                       {"kl_routing_ci", m.kl_routing_ci},
                       {"kl_collab", m.kl_collab},
                       {"routing_over_sequence", opt(routing_over_sequence(m))}});
  }
  j["masking"] = masking;
  json align = json::array();
  for (const AlignmentRow& a : r.alignment) {
    align.push_back({{"mode", a.mode},
                     {"n", a.n},
                     {"spearman_rho", a.spearman_rho},
                     {"spearman_p", a.spearman_p},
                     {"spearman_exact_p", opt(a.spearman_exact_p)},
                     {"kendall_tau", a.kendall_tau},
                     {"kendall_p", a.kendall_p}});
  }
  j["alignment"] = align;
  json cascade = json::array();
  for (const CascadeRow& c : r.cascade) {
    cascade.push_back({{"expert_id", c.expert_id},
                       {"sensitivity", c.sensitivity},
                       {"skip_kl", c.skip_kl},
                       {"mean_stop_prob", c.mean_stop_prob},
                       {"hard_stop_frequency", c.hard_stop_frequency}});
  }
  j["cascade"] = cascade;
  return j;
}

ProbeReport probe_report_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", "") != "inform-probe-report") schema_fail("not a probe report");
    if (doc.at("version").get<int>() != 1) schema_fail("unsupported probe report version");
    ProbeReport r;
    r.config_hash = doc.at("config_hash").get<std::string>();
    if (doc.contains("epoch") && !doc.at("epoch").is_null()) r.epoch = doc.at("epoch").get<std::size_t>();
    r.training = rows_of<TrainingRow>(doc, "training", [](const json& j) {
      return TrainingRow{j.at("epoch").get<std::size_t>(),       j.at("loss").get<double>(),
                         j.at("collab_entropy").get<double>(),   j.at("ordering_entropy").get<double>(),
                         j.at("gini").get<double>(),             j.at("k").get<std::size_t>(),
                         j.at("temperature").get<double>()};
    });
    if (doc.contains("routing") && !doc.at("routing").is_null()) {
      const json& j = doc.at("routing");
      r.routing = RoutingRow{j.at("collab_entropy").get<double>(), j.at("ordering_entropy").get<double>(),
                             j.at("ordering_entropy_conditional").get<double>(), j.at("gini").get<double>(),
                             j.at("gini_mean").get<double>()};
    }
    r.experts = rows_of<ExpertRow>(doc, "experts", [](const json& j) {
      return ExpertRow{j.at("expert_id").get<int>(), j.at("intrinsic_self").get<double>(),
                       j.at("intrinsic_selected").get<double>(), j.at("relational").get<double>(),
                       j.at("first_choice").get<double>()};
    });
    r.perturbations = rows_of<PerturbationRow>(doc, "perturbations", [](const json& j) {
      return PerturbationRow{j.at("kind").get<std::string>(),     j.at("kl_sequence").get<double>(),
                             j.at("kl_sequence_ci").get<double>(), j.at("kl_collab").get<double>(),
                             j.at("delta_entropy").get<double>(),  j.at("prompts").get<std::size_t>(),
                             j.at("noops").get<std::size_t>(),     j.at("skipped").get<std::size_t>()};
    });
    r.masking = rows_of<MaskingRow>(doc, "masking", [](const json& j) {
      return MaskingRow{j.at("label").get<std::string>(),
                        j.at("strategy").get<std::string>(),
                        j.at("experts").get<std::vector<int>>(),
                        j.at("kl_sequence").get<double>(),
                        j.value("kl_sequence_ci", 0.0),
                        j.value("kl_sequence_surviving", 0.0),
                        j.at("kl_routing").get<double>(),
                        j.value("kl_routing_ci", 0.0),
                        j.value("kl_collab", 0.0)};
    });
    r.alignment = rows_of<AlignmentRow>(doc, "alignment", [](const json& j) {
      return AlignmentRow{j.at("mode").get<std::string>(),       j.at("n").get<std::size_t>(),
                          j.at("spearman_rho").get<double>(),    j.at("spearman_p").get<double>(),
                          opt_number(j, "spearman_exact_p"),     j.at("kendall_tau").get<double>(),
                          j.at("kendall_p").get<double>()};
    });
    r.cascade = rows_of<CascadeRow>(doc, "cascade", [](const json& j) {
      return CascadeRow{j.at("expert_id").get<int>(), j.at("sensitivity").get<double>(), j.at("skip_kl").get<double>(),
                        j.at("mean_stop_prob").get<double>(), j.at("hard_stop_frequency").get<double>()};
    });
    return r;
  } catch (const json::exception& e) {
    schema_fail(std::string("malformed probe report: ") + e.what());
  }
}

void merge_into(ProbeReport& target, const ProbeReport& part) {
  if (target.config_hash.empty()) target.config_hash = part.config_hash;
  if (part.epoch) target.epoch = part.epoch;
  if (!part.training.empty()) target.training = part.training;
  if (part.routing) target.routing = part.routing;
  if (!part.experts.empty()) target.experts = part.experts;
  if (!part.perturbations.empty()) target.perturbations = part.perturbations;
  if (!part.masking.empty()) target.masking = part.masking;
  if (!part.alignment.empty()) target.alignment = part.alignment;
  if (!part.cascade.empty()) target.cascade = part.cascade;
}

// ---------------------------------------------------------------------------

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::size_t column_index(const Table& t, const std::string& column) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == column) return i;
  }
  schema_fail("CSV has no column '" + column + "'");
}

const std::string& raw_cell(const Table& t, std::size_t row, const std::string& column) {
  const std::size_t c = column_index(t, column);
  if (row >= t.rows.size() || c >= t.rows[row].size()) schema_fail("CSV row " + std::to_string(row) + " is short");
  const std::string* s = std::get_if<std::string>(&t.rows[row][c]);
  if (s == nullptr) schema_fail("CSV cell is not text");
  return *s;
}

Cell num(double v) { return v; }
Cell num(std::size_t v) { return static_cast<double>(v); }
Cell num(int v) { return static_cast<double>(v); }
Cell num(const std::optional<double>& v) { return v ? Cell(*v) : Cell(std::string()); }

}  // namespace

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) out += (i ? "," : "") + quote(table.header[i]);
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      if (const double* d = std::get_if<double>(&row[i])) {
        out += format_number(*d);
      } else {
        out += quote(std::get<std::string>(row[i]));
      }
    }
    out += '\n';
  }
  return out;
}

Table parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      field.clear();
      record.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) schema_fail("unterminated quote in CSV");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  if (records.empty()) schema_fail("empty CSV");
  Table t;
  t.header = records.front();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) schema_fail("CSV row " + std::to_string(r) + " has the wrong width");
    std::vector<Cell> row(records[r].begin(), records[r].end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::optional<double> number_at(const Table& table, std::size_t row, const std::string& column) {
  const std::string& s = raw_cell(table, row, column);
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') schema_fail("CSV cell '" + s + "' in column " + column + " is not a number");
  return v;
}

std::string text_at(const Table& table, std::size_t row, const std::string& column) {
  return raw_cell(table, row, column);
}

Table training_table(const std::vector<TrainingRow>& rows) {
  Table t{{"epoch", "loss", "collab_entropy", "ordering_entropy", "gini", "k", "temperature"}, {}};
  for (const TrainingRow& r : rows) {
    t.rows.push_back({num(r.epoch), num(r.loss), num(r.collab_entropy), num(r.ordering_entropy), num(r.gini),
                      num(r.k), num(r.temperature)});
  }
  return t;
}

Table routing_table(const RoutingRow& r) {
  return Table{{"collab_entropy", "ordering_entropy", "ordering_entropy_conditional", "gini", "gini_mean"},
               {{num(r.collab_entropy), num(r.ordering_entropy), num(r.ordering_entropy_conditional), num(r.gini),
                 num(r.gini_mean)}}};
}

Table experts_table(const std::vector<ExpertRow>& rows) {
  Table t{{"expert_id", "intrinsic_self", "intrinsic_selected", "relational", "first_choice"}, {}};
  for (const ExpertRow& r : rows) {
    t.rows.push_back(
        {num(r.expert_id), num(r.intrinsic_self), num(r.intrinsic_selected), num(r.relational), num(r.first_choice)});
  }
  return t;
}

Table perturbation_table(const std::vector<PerturbationRow>& rows) {
  Table t{{"kind", "kl_sequence", "kl_sequence_ci", "kl_collab", "delta_entropy", "prompts", "noops", "skipped"}, {}};
  for (const PerturbationRow& r : rows) {
    t.rows.push_back({r.kind, num(r.kl_sequence), num(r.kl_sequence_ci), num(r.kl_collab), num(r.delta_entropy),
                      num(r.prompts), num(r.noops), num(r.skipped)});
  }
  return t;
}

Table masking_table(const std::vector<MaskingRow>& rows) {
  Table t{{"label", "strategy", "experts", "kl_sequence", "kl_sequence_ci", "kl_sequence_surviving", "kl_routing",
           "kl_routing_ci", "kl_collab", "routing_over_sequence"},
          {}};
  for (const MaskingRow& r : rows) {
    std::string ids;
    for (std::size_t i = 0; i < r.experts.size(); ++i) ids += (i ? ";" : "") + std::to_string(r.experts[i]);
    t.rows.push_back({r.label, r.strategy, ids, num(r.kl_sequence), num(r.kl_sequence_ci),
                      num(r.kl_sequence_surviving), num(r.kl_routing), num(r.kl_routing_ci), num(r.kl_collab),
                      num(routing_over_sequence(r))});
  }
  return t;
}

Table alignment_table(const std::vector<AlignmentRow>& rows) {
  Table t{{"mode", "n", "spearman_rho", "spearman_p", "spearman_exact_p", "kendall_tau", "kendall_p"}, {}};
  for (const AlignmentRow& r : rows) {
    t.rows.push_back({r.mode, num(r.n), num(r.spearman_rho), num(r.spearman_p), num(r.spearman_exact_p),
                      num(r.kendall_tau), num(r.kendall_p)});
  }
  return t;
}

Table cascade_table(const std::vector<CascadeRow>& rows) {
  Table t{{"expert_id", "sensitivity", "skip_kl", "mean_stop_prob", "hard_stop_frequency"}, {}};
  for (const CascadeRow& r : rows) {
    t.rows.push_back(
        {num(r.expert_id), num(r.sensitivity), num(r.skip_kl), num(r.mean_stop_prob), num(r.hard_stop_frequency)});
  }
  return t;
}

namespace {

double required(const Table& t, std::size_t row, const std::string& column) {
  const std::optional<double> v = number_at(t, row, column);
  if (!v) schema_fail("CSV column " + column + " is empty in row " + std::to_string(row));
  return *v;
}

}  // namespace

std::vector<PerturbationRow> perturbation_rows(const Table& t) {
  std::vector<PerturbationRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.push_back(PerturbationRow{text_at(t, r, "kind"), required(t, r, "kl_sequence"),
                                  required(t, r, "kl_sequence_ci"), required(t, r, "kl_collab"),
                                  required(t, r, "delta_entropy"),
                                  static_cast<std::size_t>(required(t, r, "prompts")),
                                  static_cast<std::size_t>(required(t, r, "noops")),
                                  static_cast<std::size_t>(required(t, r, "skipped"))});
  }
  return out;
}

std::vector<MaskingRow> masking_rows(const Table& t) {
  std::vector<MaskingRow> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    MaskingRow m;
    m.label = text_at(t, r, "label");
    m.strategy = text_at(t, r, "strategy");
    std::stringstream ids(text_at(t, r, "experts"));
    for (std::string id; std::getline(ids, id, ';');) {
      if (!id.empty()) m.experts.push_back(std::stoi(id));
    }
    m.kl_sequence = required(t, r, "kl_sequence");
    m.kl_sequence_ci = required(t, r, "kl_sequence_ci");
    m.kl_sequence_surviving = required(t, r, "kl_sequence_surviving");
    m.kl_routing = required(t, r, "kl_routing");
    m.kl_routing_ci = required(t, r, "kl_routing_ci");
    m.kl_collab = required(t, r, "kl_collab");
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const MatrixExport& m) {
  return {{"format", "inform-matrix"}, {"name", m.name},         {"N", m.values.rows()},
          {"labels", m.labels},        {"data", m.values.values()}};
}

MatrixExport matrix_export_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "inform-matrix") schema_fail("not a matrix export");
    const std::size_t n = doc.at("N").get<std::size_t>();
    std::vector<double> data = doc.at("data").get<std::vector<double>>();
    std::vector<std::string> labels = doc.at("labels").get<std::vector<std::string>>();
    if (data.size() != n * n || labels.size() != n) schema_fail("matrix export has inconsistent sizes");
    return MatrixExport{doc.at("name").get<std::string>(), std::move(labels), Matrix(n, n, std::move(data))};
  } catch (const json::exception& e) {
    schema_fail(std::string("malformed matrix export: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::SchemaError, path.string() + " is not valid JSON");
  return j;
}

}  // namespace inform::cli
