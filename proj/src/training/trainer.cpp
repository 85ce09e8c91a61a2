// SPDX-License-Identifier: Apache-2.0
#include "inform/training/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "inform/experts/encoder.hpp"
#include "inform/experts/oracle.hpp"
#include "inform/probes/metrics.hpp"
#include "inform/probes/summary.hpp"
#include "json.hpp"

namespace inform {

using nlohmann::json;

std::size_t TrainState::current_k() const {
  std::size_t active = params.layout().experts;
  return adaptive_k(confidence_ema, active);
}

namespace {

json model_to_json(const ModelConfig& m) {
  return {{"diagonal", m.diagonal == DiagonalPolicy::masked ? "masked" : "free"},
          {"gamma", m.gamma},
          {"chain_blend", m.chain_blend},
          {"recompute_collab_per_step", m.recompute_collab_per_step},
          {"with_replacement", m.with_replacement}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  const std::string diag = j.at("diagonal").get<std::string>();
  if (diag != "masked" && diag != "free") throw Error(ErrorCode::SchemaError, "unknown diagonal policy " + diag);
  m.diagonal = diag == "masked" ? DiagonalPolicy::masked : DiagonalPolicy::free;
  m.gamma = j.at("gamma").get<double>();
  m.chain_blend = j.at("chain_blend").get<double>();
  m.recompute_collab_per_step = j.at("recompute_collab_per_step").get<bool>();
  m.with_replacement = j.at("with_replacement").get<bool>();
  return m;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

void append_line(const std::filesystem::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for appending");
  out << line << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

json loss_to_json(const LossBreakdown& b) {
  return {{"utility", b.utility},
          {"distill", b.distill},
          {"symm", b.symm},
          {"spar", b.spar},
          {"oracle", b.oracle},
          {"diver", b.diver},
          {"sel", b.sel},
          {"len", b.len},
          {"total", b.total},
          {"diver_literal", b.diver_literal},
          {"diver_intent", b.diver_intent},
          {"sel_selected_mass", b.sel_selected_mass},
          {"sel_literal", b.sel_literal}};
}

json metrics_to_json(const EpochMetrics& m, const std::string& hash) {
  return {{"config_hash", hash},
          {"epoch", m.epoch},
          {"loss", loss_to_json(m.loss)},
          {"collab_entropy", m.collab_entropy},
          {"ordering_entropy", m.ordering_entropy},
          {"ordering_entropy_conditional", m.ordering_entropy_conditional},
          {"gini", m.gini},
          {"gini_mean", m.gini_mean},
          {"k", m.k},
          {"confidence_ema", m.confidence_ema},
          {"temperature", m.temperature},
          {"learning_rate", m.learning_rate},
          {"grad_norm", m.grad_norm},
          {"first_choice_marginal", m.first_choice_marginal.values()},
          {"incoming_mass", m.incoming_mass.values()}};
}

void accumulate(LossBreakdown& acc, const LossBreakdown& b) {
  acc.utility += b.utility;
  acc.distill += b.distill;
  acc.symm += b.symm;
  acc.spar += b.spar;
  acc.oracle += b.oracle;
  acc.diver += b.diver;
  acc.sel += b.sel;
  acc.len += b.len;
  acc.total += b.total;
  acc.diver_literal += b.diver_literal;
  acc.diver_intent += b.diver_intent;
  acc.sel_selected_mass += b.sel_selected_mass;
  acc.sel_literal += b.sel_literal;
}

LossBreakdown scaled(LossBreakdown b, double s) {
  for (double* x : {&b.utility, &b.distill, &b.symm, &b.spar, &b.oracle, &b.diver, &b.sel, &b.len, &b.total,
                    &b.diver_literal, &b.diver_intent, &b.sel_selected_mass, &b.sel_literal}) {
    *x *= s;
  }
  return b;
}

std::vector<std::size_t> epoch_order(std::size_t count, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = derive_stream(seed, {fnv1a("epoch-order"), epoch});
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

json trace_record(const PromptInstance& prompt, const PromptContext& ctx, const OrchestratorView& view,
                  const Consortium& consortium, const TrainState& state, const std::string& hash,
                  std::uint64_t seed) {
  const FirstChoiceOptions closed{true, 1, seed, state.temperature};
  const PromptRouting routing = route_prompt(ctx, view, closed);
  Rng rng = derive_stream(seed, {fnv1a("trace"), state.epoch, fnv1a(prompt.id)});
  const RolloutResult r = rollout(ctx, view, state.current_k(), state.temperature, rng);
  std::vector<int> sequence;
  for (std::size_t e : r.sequence) sequence.push_back(consortium.expert(e).profile().expert_id);
  return {{"config_hash", hash},
          {"prompt_id", prompt.id},
          {"epoch", state.epoch},
          {"task", std::string(to_string(prompt.task))},
          {"text", prompt.text},
          {"C", routing.collab.values.values()},
          {"N", view.experts()},
          {"s", routing.first_choice.values()},
          {"sequence", sequence},
          {"entropies",
           {{"collab", collab_entropy(routing.collab)},
            {"ordering", dist_entropy(routing.first_choice)},
            {"token", ctx.token_entropies().values()}}},
          {"expert_embeddings", matrix_rows(ctx.base_outputs())},
          {"oracle_embedding", oracle_respond(prompt).embedding.values()},
          {"target", prompt.target.values()}};
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const TrainState& s = c.state;
  const ParamLayout& L = s.params.layout();
  const json j = {{"format", "inform-checkpoint"},
                  {"version", kCheckpointVersion},
                  {"config_hash", c.config_hash},
                  {"epoch", s.epoch},
                  {"step", s.step},
                  {"confidence_ema", s.confidence_ema},
                  {"temperature", s.temperature},
                  {"k", s.current_k()},
                  {"layout", {{"experts", L.experts}, {"dim", L.dim}, {"routing_dim", L.routing_dim}}},
                  {"model", model_to_json(s.model)},
                  {"params", std::vector<double>(s.params.values().begin(), s.params.values().end())},
                  {"optimizer",
                   {{"m", s.optimizer.m},
                    {"v", s.optimizer.v},
                    {"step", s.optimizer.step},
                    {"learning_rate", s.optimizer.learning_rate}}}};
  write_text(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, "checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "inform-checkpoint") {
      throw Error(ErrorCode::SchemaError, "not a checkpoint file: " + path.string());
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::SchemaError, "unsupported checkpoint version in " + path.string());
    }
    Checkpoint c{j.at("config_hash").get<std::string>(),
                 TrainState{OrchestratorParams(ParamLayout{j.at("layout").at("experts").get<std::size_t>(),
                                                           j.at("layout").at("dim").get<std::size_t>(),
                                                           j.at("layout").at("routing_dim").get<std::size_t>()},
                                               j.at("params").get<std::vector<double>>()),
                            OptimizerState{}, model_from_json(j.at("model")), j.at("confidence_ema").get<double>(),
                            j.at("temperature").get<double>(), j.at("epoch").get<std::size_t>(),
                            j.at("step").get<std::size_t>()}};
    const json& o = j.at("optimizer");
    c.state.optimizer.m = o.at("m").get<std::vector<double>>();
    c.state.optimizer.v = o.at("v").get<std::vector<double>>();
    c.state.optimizer.step = o.at("step").get<std::size_t>();
    c.state.optimizer.learning_rate = o.at("learning_rate").get<double>();
    if (c.state.optimizer.m.size() != c.state.params.count() || c.state.optimizer.v.size() != c.state.params.count()) {
      throw Error(ErrorCode::SchemaError, "optimizer moments do not match the parameter count");
    }
    if (!expected_hash.empty() && c.config_hash != expected_hash) {
      throw Error(ErrorCode::ConfigError, "checkpoint " + path.string() + " was written under config " +
                                              c.config_hash + ", current config is " + expected_hash);
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, "malformed checkpoint " + path.string() + ": " + e.what());
  }
}

std::vector<PromptContext> build_contexts(const Consortium& consortium, std::span<const PromptInstance> prompts,
                                          std::uint64_t run_seed) {
  const PromptEncoder encoder(consortium.dim());
  std::vector<PromptContext> out;
  out.reserve(prompts.size());
  for (const PromptInstance& p : prompts) out.emplace_back(consortium, run_seed, p.id, encoder.encode(p.text));
  return out;
}

TrainState initial_train_state(const TrainConfig& cfg, const ModelConfig& model, std::size_t experts,
                               std::size_t dim) {
  const ParamLayout layout{experts, dim, dim};
  OrchestratorParams params = OrchestratorParams::initialize(layout, cfg.lambda_init, cfg.init_scale, cfg.seed);
  OptimizerState opt(params.count());
  return TrainState{std::move(params), std::move(opt), model, 0.0, cfg.gumbel_temp_init, 0, 0};
}

TrainResult train(const TrainConfig& cfg, const ModelConfig& model, const Consortium& consortium,
                  std::span<const PromptInstance> corpus, std::span<const PromptInstance> eval,
                  const TrainOptions& options) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "empty training corpus");
  if (eval.empty()) throw Error(ErrorCode::InvalidArgument, "empty evaluation set");

  TrainResult result{initial_train_state(cfg, model, consortium.size(), consortium.dim()), {}, {}};
  TrainState& state = result.state;
  if (options.resume_from) {
    Checkpoint c = load_checkpoint(*options.resume_from, options.config_hash);
    if (c.state.params.layout() != state.params.layout()) {
      throw Error(ErrorCode::ConfigError, "checkpoint layout does not match the consortium");
    }
    state = std::move(c.state);
  }

  std::filesystem::path ckpt_dir;
  if (options.out_dir) {
    ckpt_dir = *options.out_dir / "checkpoints";
    std::error_code ec;
    std::filesystem::create_directories(ckpt_dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + ckpt_dir.string() + ": " + ec.message());
    if (!options.resume_from) {
      std::filesystem::remove(*options.out_dir / "metrics.jsonl", ec);
      std::filesystem::remove(*options.out_dir / "trace.jsonl", ec);
    }
  }

  // Prompt-id order inside each batch keeps gradient accumulation order fixed.
  const std::vector<PromptContext> train_ctx = build_contexts(consortium, corpus, cfg.seed);
  const std::vector<PromptContext> eval_ctx = build_contexts(consortium, eval, cfg.seed);
  const std::size_t steps_per_epoch = (corpus.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = steps_per_epoch * cfg.epochs;
  const AdamConfig adam{cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};
  const std::size_t n = consortium.size();

  for (std::size_t epoch = state.epoch; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = epoch_order(corpus.size(), cfg.seed, epoch);
    LossBreakdown epoch_loss;
    double grad_norm_sum = 0.0;
    std::size_t samples = 0;

    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(lo + cfg.batch_size, corpus.size());
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                     order.begin() + static_cast<std::ptrdiff_t>(hi));
      std::sort(batch.begin(), batch.end(), [&](std::size_t a, std::size_t c) { return corpus[a].id < corpus[c].id; });

      const OrchestratorView view(state.params, state.model);
      const std::size_t k = adaptive_k(state.confidence_ema, n);
      std::vector<double> grad(state.params.count(), 0.0);
      double confidence = 0.0;
      for (std::size_t idx : batch) {
        const PromptInstance& prompt = corpus[idx];
        Rng rng = derive_stream(cfg.seed, {fnv1a("rollout"), epoch, fnv1a(prompt.id)});
        const RolloutResult r = rollout(train_ctx[idx], view, k, state.temperature, rng, cfg.gumbel_temp_min);
        const FrozenRollout fr = freeze(r, train_ctx[idx], view, prompt.target, oracle_respond(prompt),
                                        state.temperature);
        const LossGradient lg = loss_and_gradient(state.params, fr, cfg, state.model);
        for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += lg.gradient[i];
        accumulate(epoch_loss, lg.breakdown);
        confidence += *std::max_element(r.first_choice_dist.begin(), r.first_choice_dist.end());
        ++samples;
      }
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (double& g : grad) g *= inv;
      grad_norm_sum += clip_gradient(grad, cfg.grad_clip_norm);
      const double lr = scheduled_learning_rate(state.step, total_steps, cfg.learning_rate, cfg.warmup_ratio);
      adam_update(state.params.values(), grad, state.optimizer, lr, adam);
      require_finite(state.params.values(), "parameters after the optimizer step");
      ++state.step;

      state.confidence_ema =
          cfg.confidence_decay * state.confidence_ema + (1.0 - cfg.confidence_decay) * confidence * inv;
      if (cfg.temp_decay_per_step) {
        state.temperature = std::max(cfg.gumbel_temp_min, state.temperature * cfg.gumbel_temp_decay);
      }
    }
    if (!cfg.temp_decay_per_step) {
      state.temperature = std::max(cfg.gumbel_temp_min, state.temperature * cfg.gumbel_temp_decay);
    }
    state.epoch = epoch + 1;

    const OrchestratorView view(state.params, state.model);
    const RoutingSummary summary =
        summarize_routing(view, eval_ctx, FirstChoiceOptions{true, 1, cfg.seed, state.temperature});
    EpochMetrics m;
    m.epoch = state.epoch;
    m.loss = scaled(epoch_loss, 1.0 / static_cast<double>(samples));
    m.collab_entropy = summary.collab_entropy;
    m.ordering_entropy = summary.ordering_entropy;
    m.ordering_entropy_conditional = summary.ordering_entropy_conditional;
    m.gini = summary.gini;
    m.gini_mean = summary.gini_mean;
    m.k = state.current_k();
    m.confidence_ema = state.confidence_ema;
    m.temperature = state.temperature;
    m.learning_rate = state.optimizer.learning_rate;
    m.grad_norm = grad_norm_sum / static_cast<double>(steps_per_epoch);
    m.first_choice_marginal = summary.first_choice_marginal;
    m.incoming_mass = summary.incoming_mass;
    result.metrics.push_back(m);

    if (options.out_dir) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03zu.json", state.epoch);
      const std::filesystem::path path = ckpt_dir / name;
      save_checkpoint(path, Checkpoint{options.config_hash, state});
      result.checkpoints.push_back(path);
      append_line(*options.out_dir / "metrics.jsonl", metrics_to_json(m, options.config_hash).dump());
      if (options.write_trace) {
        for (std::size_t i = 0; i < eval.size(); ++i) {
          append_line(*options.out_dir / "trace.jsonl",
                      trace_record(eval[i], eval_ctx[i], view, consortium, state, options.config_hash, cfg.seed)
                          .dump());
        }
      }
    }
  }
  return result;
}

}  // namespace inform
