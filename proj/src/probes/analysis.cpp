// SPDX-License-Identifier: Apache-2.0
#include "inform/probes/analysis.hpp"

#include <algorithm>
#include <map>

#include "inform/diffcore/ops.hpp"
#include "inform/experts/encoder.hpp"
#include "inform/probes/metrics.hpp"

namespace inform {

double routing_kl(const Matrix& base, const Matrix& variant, const std::vector<bool>& variant_active,
                  double epsilon) {
  const std::size_t n = base.rows();
  if (variant.rows() != n || variant_active.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "routing matrices differ in shape");
  }
  double total = 0.0;
  std::size_t rows = 0;
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!variant_active[i]) continue;
    for (std::size_t j = 0; j < n; ++j) p[j] = variant_active[j] ? base(i, j) : 0.0;
    total += kl_divergence(p, variant.row(i), epsilon);
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::AllMasked, "no surviving rows");
  return total / static_cast<double>(rows);
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double ci_of(const std::vector<double>& v) { return v.size() >= 2 ? stats::mean_ci95(v).halfwidth : 0.0; }

std::size_t argmax_lowest(const Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------

PerturbationReport perturbation_sensitivity(const OrchestratorView& view, const Consortium& consortium,
                                            std::uint64_t run_seed, std::span<const PromptInstance> prompts,
                                            PerturbationKind kind, const ProbeSettings& settings) {
  const PromptEncoder encoder(consortium.dim());
  PerturbationReport rep;
  rep.kind = kind;
  const PerturbationSpec spec{kind, settings.perturbation_seed, settings.reasoning_cues};
  std::vector<double> kl_c;
  std::vector<double> dh;
  for (const PromptInstance& prompt : prompts) {
    const PerturbedText perturbed = perturb_prompt(prompt.text, spec);
    Vector embedding;
    try {
      embedding = encoder.encode(perturbed.text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyText) throw;
      ++rep.skipped;
      continue;
    }
    if (perturbed.noop) ++rep.noops;
    const PromptContext base_ctx(consortium, run_seed, prompt.id, encoder.encode(prompt.text));
    const PromptContext pert_ctx(consortium, run_seed, prompt.id, std::move(embedding));
    const PromptRouting base = route_prompt(base_ctx, view, settings.first_choice);
    const PromptRouting pert = route_prompt(pert_ctx, view, settings.first_choice);
    rep.per_prompt_kl.push_back(kl_divergence(base.first_choice, pert.first_choice, settings.epsilon));
    dh.push_back(dist_entropy(pert.first_choice) - dist_entropy(base.first_choice));
    kl_c.push_back(routing_kl(base.collab.values, pert.collab.values, pert.collab.active, settings.epsilon));
  }
  rep.prompts = rep.per_prompt_kl.size();
  rep.kl_sequence = mean_of(rep.per_prompt_kl);
  rep.kl_sequence_ci = ci_of(rep.per_prompt_kl);
  rep.kl_collab = mean_of(kl_c);
  rep.delta_entropy = mean_of(dh);
  return rep;
}

// ---------------------------------------------------------------------------

std::string_view to_string(MaskStrategy strategy) noexcept {
  switch (strategy) {
    case MaskStrategy::top_intrinsic: return "top_intrinsic";
    case MaskStrategy::top_frequent: return "top_frequent";
    case MaskStrategy::random_nontop: return "random_nontop";
  }
  return "unknown";
}

MaskStrategy parse_mask_strategy(std::string_view text) {
  for (MaskStrategy s : {MaskStrategy::top_intrinsic, MaskStrategy::top_frequent, MaskStrategy::random_nontop}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::ConfigError, "unknown masking strategy '" + std::string(text) + "'");
}

namespace {

struct KernelAccumulator {
  Matrix mass;
  std::vector<double> reach;
};

void accumulate_transitions(const PromptContext& ctx, const OrchestratorView& view, const ChainState& state,
                            const CollabMatrix& first, double weight, std::size_t previous, std::size_t depth,
                            KernelAccumulator& acc) {
  const StepView v = evaluate_step(ctx, view, state, first);
  const std::size_t n = view.experts();
  if (previous < n) {
    for (std::size_t j = 0; j < n; ++j) acc.mass(previous, j) += weight * v.pi[j];
    acc.reach[previous] += weight;
  }
  if (state.step + 1 >= depth) return;
  for (std::size_t i = 0; i < n; ++i) {
    if (!state.available[i] || v.pi[i] == 0.0) continue;
    accumulate_transitions(ctx, view, advance(ctx, view, state, v, i), first, weight * v.pi[i], i, depth, acc);
  }
}

}  // namespace

Matrix routing_distribution(const PromptContext& ctx, const OrchestratorView& view, const ProbeSettings& settings) {
  const std::size_t n = view.experts();
  const std::size_t reachable = view.config().with_replacement ? n : view.active_count();
  if (settings.routing_depth < 2) throw Error(ErrorCode::InvalidArgument, "routing_depth must be at least 2");
  const std::size_t depth = std::min(settings.routing_depth, reachable);
  KernelAccumulator acc{Matrix(n, n), std::vector<double>(n, 0.0)};
  const CollabMatrix first = interaction_matrix(ctx.base_outputs(), view);
  accumulate_transitions(ctx, view, initial_state(ctx, view), first, 1.0, n, depth, acc);
  for (std::size_t i = 0; i < n; ++i) {
    if (acc.reach[i] <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j) acc.mass(i, j) /= acc.reach[i];
  }
  return acc.mass;
}

namespace {

struct MaskingBaseline {
  std::vector<Vector> first_choice;
  std::vector<Matrix> collab;
  std::vector<Matrix> routing;
};

MaskingBaseline masking_baseline(const OrchestratorView& view, std::span<const PromptContext> prompts,
                                 const ProbeSettings& settings) {
  MaskingBaseline b;
  for (const PromptContext& ctx : prompts) {
    PromptRouting r = route_prompt(ctx, view, settings.first_choice);
    b.first_choice.push_back(std::move(r.first_choice));
    b.collab.push_back(std::move(r.collab.values));
    b.routing.push_back(routing_distribution(ctx, view, settings));
  }
  return b;
}

MaskingOutcome measure(const OrchestratorView& view, std::span<const PromptContext> prompts, std::size_t expert,
                       const ProbeSettings& settings, const MaskingBaseline& baseline) {
  const OrchestratorView masked = mask_expert(view, expert);
  std::vector<bool> active(view.experts());
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = !masked.is_masked(i);
  MaskingOutcome out;
  out.expert = expert;
  std::vector<double> surviving;
  std::vector<double> collab;
  for (std::size_t p = 0; p < prompts.size(); ++p) {
    const PromptRouting routed = route_prompt(prompts[p], masked, settings.first_choice);
    const Vector& s = routed.first_choice;
    collab.push_back(routing_kl(baseline.collab[p], routed.collab.values, active, settings.epsilon));
    const Vector& s0 = baseline.first_choice[p];
    out.per_prompt_sequence.push_back(kl_divergence(s0, s, settings.epsilon));
    Vector restricted = s0;
    for (std::size_t i = 0; i < restricted.size(); ++i) {
      if (!active[i]) restricted[i] = 0.0;
    }
    surviving.push_back(kl_divergence(restricted, s, settings.epsilon));
    const Matrix R = routing_distribution(prompts[p], masked, settings);
    out.per_prompt_routing.push_back(routing_kl(baseline.routing[p], R, active, settings.epsilon));
  }
  out.kl_sequence = mean_of(out.per_prompt_sequence);
  out.kl_sequence_surviving = mean_of(surviving);
  out.kl_routing = mean_of(out.per_prompt_routing);
  out.kl_collab = mean_of(collab);
  return out;
}

}  // namespace

MaskingOutcome mask_and_measure(const OrchestratorView& view, std::span<const PromptContext> prompts,
                                std::size_t expert, const ProbeSettings& settings) {
  if (prompts.empty()) throw Error(ErrorCode::InvalidArgument, "masking over an empty prompt set");
  return measure(view, prompts, expert, settings, masking_baseline(view, prompts, settings));
}

std::vector<std::size_t> mask_targets(MaskStrategy strategy, const Vector& intrinsic, const Vector& relational,
                                      std::size_t draws, std::uint64_t seed) {
  if (intrinsic.size() != relational.size()) throw Error(ErrorCode::DimensionMismatch, "importance vectors differ");
  const std::size_t n = intrinsic.size();
  if (n < 3) throw Error(ErrorCode::TooFewExperts, "masking needs at least three experts");
  const std::size_t top_i = argmax_lowest(intrinsic);
  const std::size_t top_u = argmax_lowest(relational);
  if (strategy == MaskStrategy::top_intrinsic) return {top_i};
  if (strategy == MaskStrategy::top_frequent) return {top_u};
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != top_i && i != top_u) pool.push_back(i);
  }
  if (pool.empty()) throw Error(ErrorCode::TooFewExperts, "no expert outside the top sets");
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < draws; ++s) {
    Rng rng = derive_stream(seed, {fnv1a("mask-random"), s});
    out.push_back(pool[rng() % pool.size()]);
  }
  return out;
}

MaskingReport masking_analysis(const OrchestratorView& view, std::span<const PromptContext> prompts,
                               MaskStrategy strategy, const AttributionReport& attribution,
                               const ProbeSettings& settings) {
  if (prompts.empty()) throw Error(ErrorCode::InvalidArgument, "masking over an empty prompt set");
  if (view.active_count() < 3) throw Error(ErrorCode::TooFewExperts, "masking needs at least three experts");
  const std::size_t draws = strategy == MaskStrategy::random_nontop ? settings.mask_random_seeds : 1;
  const std::vector<std::size_t> targets =
      mask_targets(strategy, attribution.intrinsic, attribution.relational, draws, settings.first_choice.seed);
  const MaskingBaseline baseline = masking_baseline(view, prompts, settings);
  std::map<std::size_t, MaskingOutcome> cache;
  MaskingReport rep;
  rep.strategy = strategy;
  for (std::size_t e : targets) {
    auto it = cache.find(e);
    if (it == cache.end()) it = cache.emplace(e, measure(view, prompts, e, settings, baseline)).first;
    rep.outcomes.push_back(it->second);
  }
  std::vector<double> seq, seq_s, rout, coll;
  for (const MaskingOutcome& o : rep.outcomes) {
    seq.push_back(o.kl_sequence);
    seq_s.push_back(o.kl_sequence_surviving);
    rout.push_back(o.kl_routing);
    coll.push_back(o.kl_collab);
  }
  rep.kl_sequence = mean_of(seq);
  rep.kl_sequence_surviving = mean_of(seq_s);
  rep.kl_routing = mean_of(rout);
  rep.kl_collab = mean_of(coll);
  if (rep.outcomes.size() == 1) {
    rep.kl_sequence_ci = ci_of(rep.outcomes.front().per_prompt_sequence);
    rep.kl_routing_ci = ci_of(rep.outcomes.front().per_prompt_routing);
  } else {
    rep.kl_sequence_ci = ci_of(seq);
    rep.kl_routing_ci = ci_of(rout);
  }
  return rep;
}

// ---------------------------------------------------------------------------

AlignmentReport alignment_report(const Vector& intrinsic, const Vector& relational) {
  if (intrinsic.size() != relational.size()) throw Error(ErrorCode::DimensionMismatch, "importance vectors differ");
  if (intrinsic.size() < 4) throw Error(ErrorCode::InvalidArgument, "alignment needs at least four experts");
  AlignmentReport r;
  r.spearman = stats::spearman(intrinsic.span(), relational.span());
  if (intrinsic.size() <= 10) r.spearman_exact = stats::spearman_permutation(intrinsic.span(), relational.span());
  r.kendall = stats::kendall(intrinsic.span(), relational.span());
  return r;
}

// ---------------------------------------------------------------------------

CascadeReport cascade_sensitivity(std::span<const PromptContext> prompts, const CascadeSettings& settings,
                                  double epsilon) {
  if (prompts.empty()) throw Error(ErrorCode::InvalidArgument, "cascade over an empty prompt set");
  const std::size_t n = prompts.front().experts();
  CascadeReport rep;
  rep.sensitivity = Vector(n);
  rep.skip_kl = Vector(n);
  rep.mean_stop_probs = Vector(n);
  rep.hard_stop_frequency = Vector(n);
  for (const PromptContext& ctx : prompts) {
    const std::span<const double> H = ctx.token_entropies().span();
    CascadeRecord rec = cascade_run(ctx.prompt_id(), H, settings.threshold, settings.beta);
    const Vector sens = stop_sensitivity(H, settings.threshold, settings.beta);
    for (std::size_t i = 0; i < n; ++i) {
      rep.sensitivity[i] += sens[i];
      rep.mean_stop_probs[i] += rec.stop_probs[i];
      std::vector<double> reduced;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) reduced.push_back(H[j]);
      }
      const std::vector<double> q = cascade::stop_probabilities(std::span<const double>(reduced), settings.threshold,
                                                                settings.beta);
      std::vector<double> skipped(n, 0.0);
      for (std::size_t j = 0, r = 0; j < n; ++j) {
        if (j != i) skipped[j] = q[r++];
      }
      rep.skip_kl[i] += kl_divergence(rec.stop_probs.span(), skipped, epsilon);
    }
    rep.hard_stop_frequency[rec.stopping_index] += 1.0;
    rep.records.push_back(std::move(rec));
  }
  const double m = static_cast<double>(prompts.size());
  for (Vector* v : {&rep.sensitivity, &rep.skip_kl, &rep.mean_stop_probs, &rep.hard_stop_frequency}) {
    for (double& x : *v) x /= m;
  }
  return rep;
}

}  // namespace inform
