// SPDX-License-Identifier: Apache-2.0
#include "inform/experts/ingest.hpp"

#include <fstream>
#include <string>

#include <json.hpp>

#include "inform/error.hpp"

namespace inform {

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::SchemaError, "line " + std::to_string(line) + ": " + what);
}

Vector read_embedding(const json& value, std::size_t dim, std::size_t line, const std::string& field) {
  if (!value.is_array()) schema_error(line, field + " must be an array of numbers");
  if (value.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line) + ": " + field + " has length " +
                                                  std::to_string(value.size()) + ", expected " + std::to_string(dim));
  }
  std::vector<double> v;
  v.reserve(dim);
  for (const json& x : value) {
    if (!x.is_number()) schema_error(line, field + " must contain numbers only");
    v.push_back(x.get<double>());
  }
  require_finite(v, field);
  if (norm(v) == 0.0) schema_error(line, field + " has zero norm");
  return normalized(v);
}

}  // namespace

std::vector<IngestedRecord> ingest_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open trace file " + path.string());

  std::vector<IngestedRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      schema_error(line, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) schema_error(line, "record must be an object");
    if (!rec.contains("prompt_id") || !rec["prompt_id"].is_string()) schema_error(line, "missing string prompt_id");
    if (!rec.contains("expert_embeddings") || !rec["expert_embeddings"].is_array()) {
      schema_error(line, "missing expert_embeddings");
    }
    if (!rec.contains("oracle_embedding")) schema_error(line, "missing oracle_embedding");

    IngestedRecord r;
    r.prompt.id = rec["prompt_id"].get<std::string>();
    r.prompt.text = rec.value("text", r.prompt.id);
    if (r.prompt.text.empty()) schema_error(line, "text must be non-empty");
    try {
      r.prompt.task = parse_task_tag(rec.value("task", std::string("knowledge")));
    } catch (const Error&) {
      schema_error(line, "unknown task tag");
    }
    r.oracle.embedding = read_embedding(rec["oracle_embedding"], dim, line, "oracle_embedding");
    r.prompt.target = rec.contains("target") ? read_embedding(rec["target"], dim, line, "target") : r.oracle.embedding;
    if (rec.contains("epoch")) {
      if (!rec["epoch"].is_number_integer()) schema_error(line, "epoch must be an integer");
      r.epoch = rec["epoch"].get<int>();
    }

    const json& experts = rec["expert_embeddings"];
    if (experts.size() < 2) schema_error(line, "need at least two expert embeddings");
    std::vector<double> token_entropy(experts.size(), 0.0);
    if (rec.contains("entropies") && rec["entropies"].is_object() && rec["entropies"].contains("token")) {
      const json& tok = rec["entropies"]["token"];
      if (!tok.is_array() || tok.size() != experts.size()) schema_error(line, "entropies.token length mismatch");
      for (std::size_t i = 0; i < tok.size(); ++i) {
        if (!tok[i].is_number()) schema_error(line, "entropies.token must be numeric");
        token_entropy[i] = tok[i].get<double>();
      }
    }
    for (std::size_t i = 0; i < experts.size(); ++i) {
      r.experts.push_back({static_cast<int>(i + 1),
                           read_embedding(experts[i], dim, line, "expert_embeddings[" + std::to_string(i) + "]"),
                           token_entropy[i]});
    }
    if (!records.empty() && records.front().experts.size() != r.experts.size()) {
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line) + ": expert count differs from line 1");
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace inform
