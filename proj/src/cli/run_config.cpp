// SPDX-License-Identifier: Apache-2.0
#include "inform/cli/run_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>

#include "inform/diffcore/rng.hpp"
#include "inform/error.hpp"

extern char** environ;

namespace inform::cli {

using nlohmann::json;

namespace {

json profile_to_json(const ExpertProfile& p) {
  return {{"expert_id", p.expert_id}, {"family_seed", p.family_seed}, {"temperature", p.temperature},
          {"capability", p.capability}, {"family", p.family},           {"size", p.size}};
}

const char* diagonal_name(DiagonalPolicy d) { return d == DiagonalPolicy::masked ? "masked" : "free"; }

[[noreturn]] void config_fail(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigError, key + ": " + what);
}

bool compatible(const json& def, const json& val) {
  if (def.is_number()) return val.is_number();
  return def.type() == val.type();
}

// Free-form members whose keys are data, not schema.
bool free_form(const std::string& path) { return path == "tasks.mix"; }

void overlay(json& base, const json& patch, const std::string& path) {
  if (!patch.is_object()) config_fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string here = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) config_fail(here, "unknown key");
    json& slot = base[key];
    if (slot.is_object() && !free_form(here)) {
      overlay(slot, value, here);
    } else if (!compatible(slot, value)) {
      config_fail(here, std::string("expected ") + slot.type_name() + ", got " + value.type_name());
    } else {
      slot = value;
    }
  }
}

// Typed readers that name the offending key.
double num(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_number()) config_fail(path + key, "expected a number");
  return v.get<double>();
}

std::uint64_t count(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    config_fail(path + key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool flag(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_boolean()) config_fail(path + key, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& j, const char* key, const std::string& path) {
  const json& v = j.at(key);
  if (!v.is_string()) config_fail(path + key, "expected a string");
  return v.get<std::string>();
}

template <class Parse>
auto parsed(const json& j, const char* key, const std::string& path, Parse parse) {
  const std::string value = text(j, key, path);
  try {
    return parse(value);
  } catch (const Error& e) {
    config_fail(path + key, e.what());
  }
}

ExpertProfile profile_from_json(const json& j, std::size_t index) {
  const std::string path = "consortium.profiles[" + std::to_string(index) + "].";
  if (!j.is_object()) config_fail(path, "expected an object");
  json merged = profile_to_json(ExpertProfile{});
  overlay(merged, j, path.substr(0, path.size() - 1));
  ExpertProfile p;
  const json& id = merged.at("expert_id");
  if (!id.is_number_integer()) config_fail(path + "expert_id", "expected an integer");
  p.expert_id = id.get<int>();
  p.family_seed = count(merged, "family_seed", path);
  p.temperature = num(merged, "temperature", path);
  p.capability = num(merged, "capability", path);
  p.family = text(merged, "family", path);
  p.size = text(merged, "size", path);
  return p;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

json to_json(const RunConfig& cfg) {
  json profiles = json::array();
  for (const ExpertProfile& p : cfg.consortium.profiles) profiles.push_back(profile_to_json(p));
  json mix = json::object();
  for (const auto& [tag, w] : cfg.tasks.mix) mix[std::string(to_string(tag))] = w;
  const TrainConfig& t = cfg.train;
  const LossWeights& w = t.weights;
  json kinds = json::array();
  for (PerturbationKind k : cfg.probe.kinds) kinds.push_back(std::string(to_string(k)));
  return {
      {"seed", cfg.seed},
      {"consortium", {{"kind", cfg.consortium.kind}, {"dim", cfg.consortium.dim}, {"profiles", profiles}}},
      {"tasks", {{"mix", mix}, {"prompts", cfg.tasks.prompts}, {"eval_prompts", cfg.tasks.eval_prompts}}},
      {"train",
       {{"learning_rate", t.learning_rate},
        {"batch_size", t.batch_size},
        {"epochs", t.epochs},
        {"warmup_ratio", t.warmup_ratio},
        {"grad_clip_norm", t.grad_clip_norm},
        {"gumbel_temp_init", t.gumbel_temp_init},
        {"gumbel_temp_min", t.gumbel_temp_min},
        {"gumbel_temp_decay", t.gumbel_temp_decay},
        {"temp_decay_per_step", t.temp_decay_per_step},
        {"weights",
         {{"utility", w.utility},
          {"distill", w.distill},
          {"symm", w.symm},
          {"spar", w.spar},
          {"oracle", w.oracle},
          {"diver", w.diver},
          {"sel", w.sel},
          {"len", w.len}}},
        {"alpha", t.alpha},
        {"sel_loss_mode", std::string(to_string(t.sel_loss_mode))},
        {"diversity_sign", t.diversity_sign},
        {"confidence_decay", t.confidence_decay},
        {"lambda_init", t.lambda_init},
        {"init_scale", t.init_scale},
        {"adam_beta1", t.adam_beta1},
        {"adam_beta2", t.adam_beta2},
        {"adam_epsilon", t.adam_epsilon}}},
      {"model",
       {{"diagonal", diagonal_name(cfg.model.diagonal)},
        {"gamma", cfg.model.gamma},
        {"chain_blend", cfg.model.chain_blend},
        {"recompute_collab_per_step", cfg.model.recompute_collab_per_step},
        {"with_replacement", cfg.model.with_replacement}}},
      {"probe",
       {{"draws", cfg.probe.draws},
        {"closed_form", cfg.probe.closed_form},
        {"epsilon", cfg.probe.epsilon},
        {"routing_depth", cfg.probe.routing_depth},
        {"mask_random_seeds", cfg.probe.mask_random_seeds},
        {"perturbation_seed", cfg.probe.perturbation_seed},
        {"attribution_mode", std::string(to_string(cfg.probe.attribution_mode))},
        {"cue_version", cfg.probe.cue_version},
        {"reasoning_cues", cfg.probe.reasoning_cues},
        {"kinds", kinds}}},
      {"cascade", {{"threshold", cfg.cascade.threshold}, {"beta", cfg.cascade.beta}}},
      {"out", cfg.out},
  };
}

RunConfig run_config_from_json(const json& doc) {
  json m = to_json(RunConfig{});
  overlay(m, doc, "");
  RunConfig cfg;
  cfg.seed = count(m, "seed", "");

  const json& c = m.at("consortium");
  cfg.consortium.kind = text(c, "kind", "consortium.");
  cfg.consortium.dim = count(c, "dim", "consortium.");
  const json& profiles = c.at("profiles");
  for (std::size_t i = 0; i < profiles.size(); ++i) cfg.consortium.profiles.push_back(profile_from_json(profiles[i], i));

  const json& tk = m.at("tasks");
  cfg.tasks.mix.clear();
  for (const auto& [key, value] : tk.at("mix").items()) {
    TaskTag tag;
    try {
      tag = parse_task_tag(key);
    } catch (const Error& e) {
      config_fail("tasks.mix." + key, e.what());
    }
    if (!value.is_number()) config_fail("tasks.mix." + key, "expected a number");
    cfg.tasks.mix[tag] = value.get<double>();
  }
  cfg.tasks.prompts = count(tk, "prompts", "tasks.");
  cfg.tasks.eval_prompts = count(tk, "eval_prompts", "tasks.");

  const json& t = m.at("train");
  const std::string tp = "train.";
  TrainConfig& tr = cfg.train;
  tr.learning_rate = num(t, "learning_rate", tp);
  tr.batch_size = count(t, "batch_size", tp);
  tr.epochs = count(t, "epochs", tp);
  tr.warmup_ratio = num(t, "warmup_ratio", tp);
  tr.grad_clip_norm = num(t, "grad_clip_norm", tp);
  tr.gumbel_temp_init = num(t, "gumbel_temp_init", tp);
  tr.gumbel_temp_min = num(t, "gumbel_temp_min", tp);
  tr.gumbel_temp_decay = num(t, "gumbel_temp_decay", tp);
  tr.temp_decay_per_step = flag(t, "temp_decay_per_step", tp);
  const json& w = t.at("weights");
  const std::string wp = "train.weights.";
  tr.weights = LossWeights{num(w, "utility", wp), num(w, "distill", wp), num(w, "symm", wp), num(w, "spar", wp),
                           num(w, "oracle", wp),  num(w, "diver", wp),   num(w, "sel", wp),  num(w, "len", wp)};
  tr.alpha = num(t, "alpha", tp);
  tr.sel_loss_mode = parsed(t, "sel_loss_mode", tp, parse_sel_loss_mode);
  tr.diversity_sign = num(t, "diversity_sign", tp);
  tr.confidence_decay = num(t, "confidence_decay", tp);
  tr.lambda_init = num(t, "lambda_init", tp);
  tr.init_scale = num(t, "init_scale", tp);
  tr.adam_beta1 = num(t, "adam_beta1", tp);
  tr.adam_beta2 = num(t, "adam_beta2", tp);
  tr.adam_epsilon = num(t, "adam_epsilon", tp);

  const json& md = m.at("model");
  const std::string mp = "model.";
  const std::string diag = text(md, "diagonal", mp);
  if (diag != "masked" && diag != "free") config_fail("model.diagonal", "expected masked or free");
  cfg.model.diagonal = diag == "masked" ? DiagonalPolicy::masked : DiagonalPolicy::free;
  cfg.model.gamma = num(md, "gamma", mp);
  cfg.model.chain_blend = num(md, "chain_blend", mp);
  cfg.model.recompute_collab_per_step = flag(md, "recompute_collab_per_step", mp);
  cfg.model.with_replacement = flag(md, "with_replacement", mp);

  const json& p = m.at("probe");
  const std::string pp = "probe.";
  cfg.probe.draws = count(p, "draws", pp);
  cfg.probe.closed_form = flag(p, "closed_form", pp);
  cfg.probe.epsilon = num(p, "epsilon", pp);
  cfg.probe.routing_depth = count(p, "routing_depth", pp);
  cfg.probe.mask_random_seeds = count(p, "mask_random_seeds", pp);
  cfg.probe.perturbation_seed = count(p, "perturbation_seed", pp);
  cfg.probe.attribution_mode = parsed(p, "attribution_mode", pp, parse_attribution_mode);
  cfg.probe.cue_version = static_cast<int>(count(p, "cue_version", pp));
  cfg.probe.reasoning_cues.clear();
  for (const json& cue : p.at("reasoning_cues")) {
    if (!cue.is_string()) config_fail("probe.reasoning_cues", "expected strings");
    cfg.probe.reasoning_cues.push_back(cue.get<std::string>());
  }
  cfg.probe.kinds.clear();
  for (const json& k : p.at("kinds")) {
    if (!k.is_string()) config_fail("probe.kinds", "expected strings");
    try {
      cfg.probe.kinds.push_back(parse_perturbation_kind(k.get<std::string>()));
    } catch (const Error& e) {
      config_fail("probe.kinds", e.what());
    }
  }

  const json& cs = m.at("cascade");
  cfg.cascade.threshold = num(cs, "threshold", "cascade.");
  cfg.cascade.beta = num(cs, "beta", "cascade.");
  cfg.out = text(m, "out", "");
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  if (consortium.kind != "homogeneous" && consortium.kind != "heterogeneous" && consortium.kind != "custom") {
    config_fail("consortium.kind", "expected homogeneous, heterogeneous or custom");
  }
  if (consortium.kind == "custom" && consortium.profiles.size() < 3) {
    config_fail("consortium.profiles", "a custom consortium needs at least three profiles");
  }
  if (consortium.kind != "custom" && !consortium.profiles.empty()) {
    config_fail("consortium.profiles", "profiles are only accepted with kind = custom");
  }
  if (consortium.dim < 2) config_fail("consortium.dim", "must be at least 2");
  if (tasks.mix.empty()) config_fail("tasks.mix", "must name at least one task");
  if (tasks.prompts == 0) config_fail("tasks.prompts", "must be positive");
  if (tasks.eval_prompts == 0) config_fail("tasks.eval_prompts", "must be positive");
  if (probe.draws == 0) config_fail("probe.draws", "must be positive");
  if (!(probe.epsilon > 0.0)) config_fail("probe.epsilon", "must be positive");
  if (probe.routing_depth < 2) config_fail("probe.routing_depth", "must be at least 2");
  if (probe.mask_random_seeds == 0) config_fail("probe.mask_random_seeds", "must be positive");
  if (probe.kinds.empty()) config_fail("probe.kinds", "must name at least one perturbation");
  if (!(cascade.beta > 0.0)) config_fail("cascade.beta", "must be positive");
  if (out.empty()) config_fail("out", "must not be empty");
  try {
    effective_train_config(*this).validate();
  } catch (const Error& e) {
    config_fail("train", e.what());
  }
}

void apply_env_overrides(json& doc, const std::vector<std::pair<std::string, std::string>>& env) {
  const std::string prefix = "INFORM_";
  const json schema = to_json(RunConfig{});
  for (const auto& [name, raw] : env) {
    if (name.rfind(prefix, 0) != 0) continue;
    std::vector<std::string> parts;
    const std::string rest = lower(name.substr(prefix.size()));
    for (std::size_t pos = 0;;) {
      const std::size_t next = rest.find("__", pos);
      parts.push_back(rest.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
      if (next == std::string::npos) break;
      pos = next + 2;
    }
    const json* def = &schema;
    std::string dotted;
    for (const std::string& p : parts) {
      dotted += (dotted.empty() ? "" : ".") + p;
      if (!def->is_object() || !def->contains(p)) config_fail(name, "no config key '" + dotted + "'");
      def = &(*def)[p];
    }
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    // Anything that is not a number, bool, array or object is the literal string.
    if (def->is_string()) value = raw;
    json* slot = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!slot->contains(parts[i]) || !(*slot)[parts[i]].is_object()) (*slot)[parts[i]] = json::object();
      slot = &(*slot)[parts[i]];
    }
    (*slot)[parts.back()] = value;
  }
}

std::vector<std::pair<std::string, std::string>> inform_environment() {
  std::vector<std::pair<std::string, std::string>> out;
  for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
    const std::string entry(*e);
    if (entry.rfind("INFORM_", 0) != 0) continue;
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    out.emplace_back(entry.substr(0, eq), entry.substr(eq + 1));
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path,
                          const std::vector<std::pair<std::string, std::string>>& env) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::IoError, "cannot read config " + path->string());
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::ConfigError, "config " + path->string() + " is not valid JSON");
  }
  apply_env_overrides(doc, env);
  return run_config_from_json(doc);
}

namespace {

std::string digest(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

}  // namespace

std::string config_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  j.erase("out");
  return digest(j);
}

std::string training_hash(const RunConfig& cfg) {
  json j = to_json(cfg);
  for (const char* key : {"out", "probe", "cascade"}) j.erase(key);
  return digest(j);
}

TrainConfig effective_train_config(const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = cfg.seed;
  return t;
}

Consortium make_consortium(const RunConfig& cfg) {
  if (cfg.consortium.kind == "homogeneous") return Consortium(homogeneous_profiles(), cfg.consortium.dim);
  if (cfg.consortium.kind == "heterogeneous") return Consortium(heterogeneous_profiles(), cfg.consortium.dim);
  return Consortium(cfg.consortium.profiles, cfg.consortium.dim);
}

PromptSets make_prompt_sets(const RunConfig& cfg) {
  const PromptEncoder encoder(cfg.consortium.dim);
  PromptSets sets;
  sets.train = generate_corpus(cfg.tasks.mix, cfg.tasks.prompts, cfg.seed, encoder);
  const std::uint64_t eval_seed = hash_combine(cfg.seed, fnv1a("eval"));
  sets.eval = generate_corpus(cfg.tasks.mix, cfg.tasks.eval_prompts, eval_seed, encoder);
  for (PromptInstance& p : sets.eval) p.id = "eval-" + p.id;
  return sets;
}

ProbeSettings probe_settings(const RunConfig& cfg, double temperature) {
  ProbeSettings s;
  s.first_choice = FirstChoiceOptions{cfg.probe.closed_form, cfg.probe.draws, cfg.seed, temperature};
  s.epsilon = cfg.probe.epsilon;
  s.routing_depth = cfg.probe.routing_depth;
  s.mask_random_seeds = cfg.probe.mask_random_seeds;
  s.perturbation_seed = cfg.probe.perturbation_seed;
  s.reasoning_cues = cfg.probe.reasoning_cues;
  return s;
}

}  // namespace inform::cli
