// SPDX-License-Identifier: Apache-2.0
#include "inform/cli/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "inform/experts/encoder.hpp"
#include "inform/experts/ingest.hpp"
#include "inform/probes/analysis.hpp"
#include "inform/probes/attribution.hpp"
#include "inform/probes/summary.hpp"

namespace inform::cli {

namespace fs = std::filesystem;
using nlohmann::json;

RunConfig resolve_config(const CommandOptions& opts, const std::vector<std::pair<std::string, std::string>>& env) {
  std::optional<fs::path> file = opts.config;
  if (!file && opts.out && fs::exists(*opts.out / "config.json")) file = *opts.out / "config.json";
  RunConfig cfg = load_run_config(file, env);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.out = opts.out->string();
  if (opts.epochs) cfg.train.epochs = *opts.epochs;
  cfg.validate();
  return cfg;
}

namespace {

std::string expert_label(const ExpertProfile& p) { return "E" + std::to_string(p.expert_id); }

std::vector<std::string> expert_labels(const Consortium& c) {
  std::vector<std::string> out;
  for (const ExpertProfile& p : c.profiles()) out.push_back(expert_label(p));
  return out;
}

std::string task_label(const RunConfig& cfg) {
  std::string out;
  for (const auto& [tag, w] : cfg.tasks.mix) {
    if (w > 0.0) out += (out.empty() ? "" : "+") + std::string(to_string(tag));
  }
  return out;
}

fs::path reports_dir(const RunConfig& cfg) { return fs::path(cfg.out) / "reports"; }

struct LoadedModel {
  TrainState state;
  std::size_t epoch = 0;
};

fs::path latest_checkpoint(const fs::path& out) {
  const fs::path dir = out / "checkpoints";
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "no checkpoints under " + dir.string());
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("epoch_", 0) == 0 && entry.path().extension() == ".json") found.push_back(entry.path());
  }
  if (found.empty()) throw Error(ErrorCode::IoError, "no checkpoints under " + dir.string());
  std::sort(found.begin(), found.end());
  return found.back();
}

LoadedModel load_model(const RunConfig& cfg, const CommandOptions& opts, const Consortium& consortium,
                       std::ostream& log) {
  if (opts.untrained) {
    log << "using the untrained orchestrator\n";
    return {initial_train_state(effective_train_config(cfg), cfg.model, consortium.size(), consortium.dim()), 0};
  }
  const fs::path path = opts.checkpoint ? *opts.checkpoint : latest_checkpoint(cfg.out);
  Checkpoint c = load_checkpoint(path, training_hash(cfg));
  if (c.state.params.layout().experts != consortium.size() || c.state.params.layout().dim != consortium.dim()) {
    throw Error(ErrorCode::ConfigError, "checkpoint " + path.string() + " does not match the consortium");
  }
  log << "loaded " << path.string() << " (epoch " << c.state.epoch << ")\n";
  const std::size_t epoch = c.state.epoch;
  return {std::move(c.state), epoch};
}

std::vector<PromptContext> probe_contexts(const RunConfig& cfg, const CommandOptions& opts,
                                          const Consortium& consortium) {
  if (!opts.trace) return build_contexts(consortium, make_prompt_sets(cfg).eval, cfg.seed);
  const PromptEncoder encoder(consortium.dim());
  std::vector<PromptContext> out;
  for (IngestedRecord& r : ingest_embeddings(*opts.trace, consortium.dim())) {
    if (r.experts.size() != consortium.size()) {
      throw Error(ErrorCode::DimensionMismatch, "trace record " + r.prompt.id + " has " +
                                                    std::to_string(r.experts.size()) + " experts, expected " +
                                                    std::to_string(consortium.size()));
    }
    Matrix base(r.experts.size(), consortium.dim());
    Vector entropies(r.experts.size());
    for (std::size_t i = 0; i < r.experts.size(); ++i) {
      std::copy(r.experts[i].embedding.begin(), r.experts[i].embedding.end(), base.row(i).begin());
      entropies[i] = r.experts[i].token_entropy;
    }
    out.emplace_back(r.prompt.id, encoder.encode(r.prompt.text), std::move(base), std::move(entropies));
  }
  if (out.empty()) throw Error(ErrorCode::SchemaError, "trace " + opts.trace->string() + " has no records");
  return out;
}

ProbeReport new_report(const RunConfig& cfg, std::optional<std::size_t> epoch) {
  ProbeReport r;
  r.config_hash = config_hash(cfg);
  r.epoch = epoch;
  return r;
}

void write_report(const fs::path& dir, const std::string& name, const ProbeReport& report) {
  write_file(dir / (name + ".json"), to_json(report).dump(2) + "\n");
}

void write_matrix(const fs::path& path, const MatrixExport& m) { write_file(path, to_json(m).dump() + "\n"); }

std::string fmt(double v) { return format_number(v); }

std::optional<AlignmentRow> alignment_row(const std::string& mode, const Vector& intrinsic, const Vector& relational,
                                          std::ostream& log) {
  try {
    const AlignmentReport a = alignment_report(intrinsic, relational);
    AlignmentRow row{mode, intrinsic.size(), a.spearman.statistic, a.spearman.p_value, std::nullopt,
                     a.kendall.statistic, a.kendall.p_value};
    if (a.spearman_exact) row.spearman_exact_p = a.spearman_exact->p_value;
    return row;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConstantInput) throw;
    log << "alignment (" << mode << ") skipped: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

RunArtifact cmd_train(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const fs::path out(cfg.out);
  const Consortium consortium = make_consortium(cfg);
  const PromptSets prompts = make_prompt_sets(cfg);
  RunArtifact art;
  art.config_hash = config_hash(cfg);
  art.training_hash = training_hash(cfg);
  art.out = out;
  write_file(out / "config.json", to_json(cfg).dump(2) + "\n");
  write_file(out / "run.json", json{{"config_hash", art.config_hash},
                                    {"training_hash", art.training_hash},
                                    {"experts", expert_labels(consortium)},
                                    {"train_prompts", prompts.train.size()},
                                    {"eval_prompts", prompts.eval.size()}}
                                   .dump(2) + "\n");

  TrainOptions options;
  options.out_dir = out;
  options.config_hash = art.training_hash;
  options.resume_from = opts.checkpoint;
  TrainResult result = train(effective_train_config(cfg), cfg.model, consortium, prompts.train, prompts.eval, options);
  for (const EpochMetrics& m : result.metrics) {
    log << "epoch " << m.epoch << "  loss " << fmt(m.loss.total) << "  collab_H " << fmt(m.collab_entropy)
        << "  order_H " << fmt(m.ordering_entropy) << "  gini " << fmt(m.gini) << "  k " << m.k << "  tau "
        << fmt(m.temperature) << "\n";
  }
  art.checkpoints = result.checkpoints;
  art.metrics = out / "metrics.jsonl";
  art.trace = out / "trace.jsonl";
  art.metrics_rows = std::move(result.metrics);
  log << "wrote " << art.checkpoints.size() << " checkpoint(s) to " << (out / "checkpoints").string() << "\n";
  return art;
}

ProbeReport cmd_probe(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const Consortium consortium = make_consortium(cfg);
  const LoadedModel model = load_model(cfg, opts, consortium, log);
  const OrchestratorView view(model.state.params, model.state.model);
  const std::vector<PromptContext> contexts = probe_contexts(cfg, opts, consortium);
  const ProbeSettings settings = probe_settings(cfg, model.state.temperature);
  const std::vector<std::string> labels = expert_labels(consortium);
  const std::vector<ExpertProfile> profiles = consortium.profiles();

  ProbeReport rep = new_report(cfg, model.epoch);
  const RoutingSummary summary = summarize_routing(view, contexts, settings.first_choice);
  rep.routing = RoutingRow{summary.collab_entropy, summary.ordering_entropy, summary.ordering_entropy_conditional,
                           summary.gini, summary.gini_mean};

  AttributionOptions ao{model.state.current_k(), model.state.temperature, cfg.seed, AttributionMode::self,
                        model.epoch};
  const AttributionReport self = attribute(view, contexts, ao);
  ao.mode = AttributionMode::selected;
  const AttributionReport selected = attribute(view, contexts, ao);
  for (std::size_t i = 0; i < consortium.size(); ++i) {
    rep.experts.push_back(ExpertRow{profiles[i].expert_id, self.intrinsic[i], selected.intrinsic[i],
                                    self.relational[i], summary.first_choice_marginal[i]});
  }
  if (consortium.size() >= 4) {
    // The configured mode goes first.
    std::vector<const AttributionReport*> order{&self, &selected};
    if (cfg.probe.attribution_mode == AttributionMode::selected) std::swap(order[0], order[1]);
    for (const AttributionReport* a : order) {
      if (auto row = alignment_row(std::string(to_string(a->mode)), a->intrinsic, a->relational, log)) {
        rep.alignment.push_back(*row);
      }
    }
  }

  Matrix kernel(consortium.size(), consortium.size());
  for (const PromptContext& ctx : contexts) {
    const Matrix k = routing_distribution(ctx, view, settings);
    for (std::size_t a = 0; a < kernel.values().size(); ++a) kernel.span()[a] += k.values()[a];
  }
  for (double& x : kernel.span()) x /= static_cast<double>(contexts.size());

  const fs::path dir = reports_dir(cfg);
  write_report(dir, "probe", rep);
  write_file(dir / "routing.csv", to_csv(routing_table(*rep.routing)));
  write_file(dir / "experts.csv", to_csv(experts_table(rep.experts)));
  if (!rep.alignment.empty()) write_file(dir / "alignment.csv", to_csv(alignment_table(rep.alignment)));
  write_matrix(dir / "heatmaps" / "collab_mean.json", MatrixExport{"collab_mean", labels, summary.mean_collab});
  write_matrix(dir / "heatmaps" / "routing_kernel_mean.json", MatrixExport{"routing_kernel_mean", labels, kernel});

  log << "collab_entropy " << fmt(summary.collab_entropy) << "  ordering_entropy " << fmt(summary.ordering_entropy)
      << "  gini " << fmt(summary.gini) << "\n";
  for (const AlignmentRow& a : rep.alignment) {
    log << "alignment[" << a.mode << "]  rho " << fmt(a.spearman_rho) << " (p " << fmt(a.spearman_p) << ")  tau "
        << fmt(a.kendall_tau) << " (p " << fmt(a.kendall_p) << ")\n";
  }
  return rep;
}

ProbeReport cmd_perturb(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  if (opts.trace) throw Error(ErrorCode::ConfigError, "perturb re-queries the consortium and cannot use --trace");
  std::vector<PerturbationKind> kinds;
  for (const std::string& k : opts.kinds) {
    try {
      kinds.push_back(parse_perturbation_kind(k));
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  }
  if (kinds.empty()) kinds = cfg.probe.kinds;
  const Consortium consortium = make_consortium(cfg);
  const LoadedModel model = load_model(cfg, opts, consortium, log);
  const OrchestratorView view(model.state.params, model.state.model);
  const PromptSets prompts = make_prompt_sets(cfg);
  const ProbeSettings settings = probe_settings(cfg, model.state.temperature);

  ProbeReport rep = new_report(cfg, model.epoch);
  for (PerturbationKind kind : kinds) {
    const PerturbationReport p = perturbation_sensitivity(view, consortium, cfg.seed, prompts.eval, kind, settings);
    rep.perturbations.push_back(PerturbationRow{std::string(to_string(kind)), p.kl_sequence, p.kl_sequence_ci,
                                                p.kl_collab, p.delta_entropy, p.prompts, p.noops, p.skipped});
    log << to_string(kind) << "  kl_sequence " << fmt(p.kl_sequence) << " +/- " << fmt(p.kl_sequence_ci)
        << "  kl_collab " << fmt(p.kl_collab) << "  delta_H " << fmt(p.delta_entropy) << "  noops " << p.noops
        << "/" << p.prompts << "\n";
  }
  const fs::path dir = reports_dir(cfg);
  write_report(dir, "perturbation", rep);
  write_file(dir / "perturbation.csv", to_csv(perturbation_table(rep.perturbations)));
  return rep;
}

ProbeReport cmd_mask(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  std::vector<MaskStrategy> strategies;
  for (const std::string& s : opts.strategies) strategies.push_back(parse_mask_strategy(s));
  if (strategies.empty()) {
    strategies = {MaskStrategy::top_intrinsic, MaskStrategy::top_frequent, MaskStrategy::random_nontop};
  }
  const Consortium consortium = make_consortium(cfg);
  if (consortium.size() < 3) throw Error(ErrorCode::TooFewExperts, "masking needs at least three experts");
  const LoadedModel model = load_model(cfg, opts, consortium, log);
  const OrchestratorView view(model.state.params, model.state.model);
  const std::vector<PromptContext> contexts = probe_contexts(cfg, opts, consortium);
  const ProbeSettings settings = probe_settings(cfg, model.state.temperature);
  const std::vector<ExpertProfile> profiles = consortium.profiles();

  const AttributionReport attribution = attribute(
      view, contexts,
      AttributionOptions{model.state.current_k(), model.state.temperature, cfg.seed, cfg.probe.attribution_mode,
                         model.epoch});
  ProbeReport rep = new_report(cfg, model.epoch);
  const std::string label = opts.trace ? opts.trace->stem().string() : task_label(cfg);
  for (MaskStrategy s : strategies) {
    const MaskingReport m = masking_analysis(view, contexts, s, attribution, settings);
    MaskingRow row{label, std::string(to_string(s)), {}, m.kl_sequence, m.kl_sequence_ci, m.kl_sequence_surviving,
                   m.kl_routing, m.kl_routing_ci, m.kl_collab};
    for (const MaskingOutcome& o : m.outcomes) row.experts.push_back(profiles[o.expert].expert_id);
    log << to_string(s) << "  kl_sequence " << fmt(m.kl_sequence) << "  kl_routing " << fmt(m.kl_routing)
        << "  kl_sequence_surviving " << fmt(m.kl_sequence_surviving) << "\n";
    rep.masking.push_back(std::move(row));
  }
  const fs::path dir = reports_dir(cfg);
  write_report(dir, "masking", rep);
  write_file(dir / "masking.csv", to_csv(masking_table(rep.masking)));
  return rep;
}

ProbeReport cmd_cascade(const RunConfig& cfg, const CommandOptions& opts, std::ostream& log) {
  const Consortium consortium = make_consortium(cfg);
  const std::vector<PromptContext> contexts = probe_contexts(cfg, opts, consortium);
  const CascadeReport c = cascade_sensitivity(contexts, cfg.cascade, cfg.probe.epsilon);
  const std::vector<ExpertProfile> profiles = consortium.profiles();
  ProbeReport rep = new_report(cfg, std::nullopt);
  for (std::size_t i = 0; i < consortium.size(); ++i) {
    rep.cascade.push_back(CascadeRow{profiles[i].expert_id, c.sensitivity[i], c.skip_kl[i], c.mean_stop_probs[i],
                                     c.hard_stop_frequency[i]});
    log << expert_label(profiles[i]) << "  sensitivity " << fmt(c.sensitivity[i]) << "  skip_kl "
        << fmt(c.skip_kl[i]) << "  p_stop " << fmt(c.mean_stop_probs[i]) << "\n";
  }
  const fs::path dir = reports_dir(cfg);
  write_report(dir, "cascade", rep);
  write_file(dir / "cascade.csv", to_csv(cascade_table(rep.cascade)));
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::istringstream in(read_file(path));
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorCode::SchemaError, path.string() + ":" + std::to_string(line_no) + " is not valid JSON");
    }
    out.push_back(std::move(j));
  }
  return out;
}

std::vector<TrainingRow> training_rows(const fs::path& metrics) {
  std::vector<TrainingRow> rows;
  try {
    for (const json& j : read_jsonl(metrics)) {
      rows.push_back(TrainingRow{j.at("epoch").get<std::size_t>(), j.at("loss").at("total").get<double>(),
                                 j.at("collab_entropy").get<double>(), j.at("ordering_entropy").get<double>(),
                                 j.at("gini").get<double>(), j.at("k").get<std::size_t>(),
                                 j.at("temperature").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, metrics.string() + ": " + e.what());
  }
  return rows;
}

/// Prompt-averaged C per epoch from a trace file.
std::vector<MatrixExport> trace_heatmaps(const fs::path& trace, const std::vector<std::string>& labels) {
  std::map<std::size_t, std::pair<Matrix, std::size_t>> by_epoch;
  try {
    for (const json& j : read_jsonl(trace)) {
      const std::size_t n = j.at("N").get<std::size_t>();
      const std::vector<double> c = j.at("C").get<std::vector<double>>();
      if (c.size() != n * n) throw Error(ErrorCode::SchemaError, "trace C has the wrong size");
      const std::size_t epoch = j.value("epoch", std::size_t{0});
      auto [it, fresh] = by_epoch.try_emplace(epoch, Matrix(n, n), 0);
      if (it->second.first.rows() != n) throw Error(ErrorCode::SchemaError, "trace mixes expert counts");
      for (std::size_t a = 0; a < c.size(); ++a) it->second.first.span()[a] += c[a];
      ++it->second.second;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, trace.string() + ": " + e.what());
  }
  std::vector<MatrixExport> out;
  for (auto& [epoch, acc] : by_epoch) {
    Matrix m = std::move(acc.first);
    for (double& x : m.span()) x /= static_cast<double>(acc.second);
    std::vector<std::string> names = labels;
    if (names.size() != m.rows()) {
      names.clear();
      for (std::size_t i = 0; i < m.rows(); ++i) names.push_back("E" + std::to_string(i + 1));
    }
    char name[32];
    std::snprintf(name, sizeof name, "collab_epoch_%03zu", epoch);
    out.push_back(MatrixExport{name, std::move(names), std::move(m)});
  }
  return out;
}

}  // namespace

ProbeReport cmd_report(const fs::path& dir, std::ostream& log) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "run directory " + dir.string() + " does not exist");
  ProbeReport rep;
  std::vector<std::string> labels;
  if (fs::exists(dir / "run.json")) {
    const json run = read_json(dir / "run.json");
    rep.config_hash = run.value("config_hash", "");
    if (run.contains("experts")) labels = run.at("experts").get<std::vector<std::string>>();
  }
  bool found = false;
  if (fs::exists(dir / "metrics.jsonl")) {
    rep.training = training_rows(dir / "metrics.jsonl");
    found = found || !rep.training.empty();
  }
  for (const char* part : {"probe", "perturbation", "masking", "cascade"}) {
    const fs::path path = dir / "reports" / (std::string(part) + ".json");
    if (!fs::exists(path)) continue;
    merge_into(rep, probe_report_from_json(read_json(path)));
    found = true;
  }
  std::vector<MatrixExport> heatmaps;
  if (fs::exists(dir / "trace.jsonl")) {
    heatmaps = trace_heatmaps(dir / "trace.jsonl", labels);
    found = found || !heatmaps.empty();
  }
  if (fs::is_directory(dir / "reports" / "heatmaps")) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir / "reports" / "heatmaps")) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) heatmaps.push_back(matrix_export_from_json(read_json(f)));
  }
  if (!found) throw Error(ErrorCode::IoError, "no run artifacts found in " + dir.string());

  const fs::path out = dir / "report";
  write_file(out / "summary.json", to_json(rep).dump(2) + "\n");
  if (!rep.training.empty()) write_file(out / "training.csv", to_csv(training_table(rep.training)));
  if (rep.routing) write_file(out / "routing.csv", to_csv(routing_table(*rep.routing)));
  if (!rep.experts.empty()) write_file(out / "experts.csv", to_csv(experts_table(rep.experts)));
  if (!rep.perturbations.empty()) write_file(out / "perturbation.csv", to_csv(perturbation_table(rep.perturbations)));
  if (!rep.masking.empty()) write_file(out / "masking.csv", to_csv(masking_table(rep.masking)));
  if (!rep.alignment.empty()) write_file(out / "alignment.csv", to_csv(alignment_table(rep.alignment)));
  if (!rep.cascade.empty()) write_file(out / "cascade.csv", to_csv(cascade_table(rep.cascade)));
  for (const MatrixExport& m : heatmaps) write_matrix(out / "heatmaps" / (m.name + ".json"), m);

  for (const MaskingRow& m : rep.masking) {
    const std::optional<double> ratio = routing_over_sequence(m);
    log << m.label << " " << m.strategy << "  kl_sequence " << fmt(m.kl_sequence) << "  kl_routing "
        << fmt(m.kl_routing) << "  routing/sequence " << (ratio ? fmt(*ratio) : std::string("n/a")) << "\n";
  }
  log << "wrote " << out.string() << "\n";
  return rep;
}

// ---------------------------------------------------------------------------

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IoError:
    case ErrorCode::SchemaError:
      return 4;
    case ErrorCode::NonFinite:
    case ErrorCode::ZeroVector:
    case ErrorCode::NonPositiveTemperature:
    case ErrorCode::AllMasked:
    case ErrorCode::ConstantInput:
    case ErrorCode::AllZero:
    case ErrorCode::ZeroVariance:
    case ErrorCode::TooFewSamples:
    case ErrorCode::ZeroMass:
      return 3;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::TooFewExperts:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::EmptyText:
      return 2;
  }
  return 2;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct RawFlags {
  std::string config, out, checkpoint, trace, kinds, strategy;
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  bool untrained = false;
};

void add_common(CLI::App* cmd, RawFlags& f) {
  cmd->add_option("--config", f.config, "run config (JSON)");
  cmd->add_option("--seed", f.seed, "override the run seed");
  cmd->add_option("--out", f.out, "run directory");
}

void add_model_source(CLI::App* cmd, RawFlags& f) {
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint file (default: latest in <out>/checkpoints)");
  cmd->add_flag("--untrained", f.untrained, "probe the freshly initialized orchestrator");
}

CommandOptions to_options(const CLI::App& cmd, const RawFlags& f) {
  CommandOptions o;
  auto given = [&](const char* name) { return cmd.get_option_no_throw(name) && cmd.count(name) > 0; };
  if (given("--config")) o.config = f.config;
  if (given("--seed")) o.seed = f.seed;
  if (given("--out")) o.out = f.out;
  if (given("--epochs")) o.epochs = f.epochs;
  if (given("--checkpoint")) o.checkpoint = f.checkpoint;
  if (given("--trace")) o.trace = f.trace;
  o.untrained = f.untrained;
  o.kinds = split_list(f.kinds);
  o.strategies = split_list(f.strategy);
  return o;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Orchestrator training and interpretability probes"};
  app.require_subcommand(1);
  RawFlags f;
  CLI::App* train_cmd = app.add_subcommand("train", "train an orchestrator and write checkpoints and metrics");
  add_common(train_cmd, f);
  train_cmd->add_option("--epochs", f.epochs, "override train.epochs");
  train_cmd->add_option("--checkpoint", f.checkpoint, "resume from this checkpoint");
  CLI::App* probe_cmd = app.add_subcommand("probe", "entropies, Gini, attribution and alignment");
  add_common(probe_cmd, f);
  add_model_source(probe_cmd, f);
  probe_cmd->add_option("--trace", f.trace, "probe prompts ingested from a trace file");
  CLI::App* perturb_cmd = app.add_subcommand("perturb", "perturbation sensitivity");
  add_common(perturb_cmd, f);
  add_model_source(perturb_cmd, f);
  perturb_cmd->add_option("--kinds", f.kinds, "comma-separated perturbation kinds");
  CLI::App* mask_cmd = app.add_subcommand("mask", "masking interventions");
  add_common(mask_cmd, f);
  add_model_source(mask_cmd, f);
  mask_cmd->add_option("--strategy", f.strategy, "comma-separated masking strategies");
  mask_cmd->add_option("--trace", f.trace, "mask over prompts ingested from a trace file");
  CLI::App* cascade_cmd = app.add_subcommand("cascade", "cascade stopping sensitivity");
  add_common(cascade_cmd, f);
  cascade_cmd->add_option("--trace", f.trace, "use token entropies from a trace file");
  CLI::App* report_cmd = app.add_subcommand("report", "consolidate a run directory into tables and heatmaps");
  std::string report_dir;
  report_cmd->add_option("dir", report_dir, "run directory");
  report_cmd->add_option("--out", f.out, "run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const auto env = inform_environment();
    if (report_cmd->parsed()) {
      std::string dir = report_dir.empty() ? f.out : report_dir;
      if (dir.empty()) dir = resolve_config(CommandOptions{}, env).out;
      cmd_report(dir, out);
    } else if (train_cmd->parsed()) {
      cmd_train(resolve_config(to_options(*train_cmd, f), env), to_options(*train_cmd, f), out);
    } else if (probe_cmd->parsed()) {
      cmd_probe(resolve_config(to_options(*probe_cmd, f), env), to_options(*probe_cmd, f), out);
    } else if (perturb_cmd->parsed()) {
      cmd_perturb(resolve_config(to_options(*perturb_cmd, f), env), to_options(*perturb_cmd, f), out);
    } else if (mask_cmd->parsed()) {
      cmd_mask(resolve_config(to_options(*mask_cmd, f), env), to_options(*mask_cmd, f), out);
    } else if (cascade_cmd->parsed()) {
      cmd_cascade(resolve_config(to_options(*cascade_cmd, f), env), to_options(*cascade_cmd, f), out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace inform::cli
