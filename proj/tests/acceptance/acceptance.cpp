// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "enumeration.hpp"
#include "inform/cli/commands.hpp"
#include "inform/cli/reports.hpp"
#include "inform/cli/run_config.hpp"
#include "inform/diffcore/grad_check.hpp"
#include "inform/orchestrator/cascade.hpp"
#include "inform/probes/analysis.hpp"
#include "inform/probes/metrics.hpp"
#include "inform/probes/summary.hpp"
#include "inform/stats/tests.hpp"
#include "inform/training/loss.hpp"
#include "toy.hpp"

using namespace inform;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double x, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome spearman_reproduction() {
  const auto start = Clock::now();
  const double p1 = stats::spearman_from_rho(0.648, 10).p_value;
  const double p2 = stats::spearman_from_rho(0.467, 10).p_value;
  const double t = seconds_since(start);
  const bool ok = std::abs(p1 - 0.043) <= 0.001 && std::abs(p2 - 0.174) <= 0.001 && t < 1.0;
  return {ok, "p(0.648,10)=" + fmt(p1) + " p(0.467,10)=" + fmt(p2) + " in " + fmt(t, 2) + "s"};
}

Outcome wilcoxon_floor() {
  const auto start = Clock::now();
  const std::vector<double> up{0.8, 1.9, 0.3, 2.6, 1.1};
  const std::vector<double> down{-0.4, -0.2, -3.0, -1.5, -0.9};
  const double p_up = stats::wilcoxon_signed_rank(up).p_value;
  const double p_down = stats::wilcoxon_signed_rank(down).p_value;
  const double t = seconds_since(start);
  const bool ok = p_up == 0.0625 && p_down == 0.0625 && t < 1.0;
  return {ok, "p=" + fmt(p_up, 6) + "/" + fmt(p_down, 6) + " in " + fmt(t, 2) + "s"};
}

Outcome masking_ratio(const fs::path& root) {
  const fs::path dir = root / "masking_fixture";
  fs::remove_all(dir);
  cli::ProbeReport fixture;
  fixture.config_hash = "fixture";
  fixture.masking.push_back(cli::MaskingRow{"mmlu", "top_intrinsic", {1}, 0.428, 0.0, 0.0, 2.366, 0.0, 0.0});
  cli::write_file(dir / "reports" / "masking.json", cli::to_json(fixture).dump());
  std::ostringstream log;
  (void)cli::cmd_report(dir, log);
  const cli::Table table = cli::parse_csv(cli::read_file(dir / "report" / "masking.csv"));
  const std::optional<double> ratio = cli::number_at(table, 0, "routing_over_sequence");
  const bool ok = ratio && std::abs(*ratio - 5.53) <= 0.01;
  return {ok, "routing_over_sequence=" + (ratio ? fmt(*ratio, 6) : std::string("missing"))};
}

// ---------------------------------------------------------------------------

// Central-difference step used by every gradient check below.
constexpr double kStep = 1e-5;

Outcome gradient_integrity() {
  const auto start = Clock::now();
  const ModelConfig model;
  const TrainConfig cfg;
  Rng rng(2024);
  double worst = 0.0;
  std::string worst_label;
  std::size_t checks = 0;
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t n = 3 + instance % 4;
    const std::size_t d = 4 + instance % 5;
    const OrchestratorParams params = toy::random_params(n, d, 500 + instance);
    const OrchestratorView view(params, model);
    const PromptContext ctx = toy::fixed_context("g" + std::to_string(instance), n, d, rng);
    FrozenRollout fr = toy::frozen_instance(view, ctx, std::min<std::size_t>(n, 1 + instance % 3), rng);
    anchor_relaxation(fr, params, model);

    const ParamLayout L = params.layout();
    const std::size_t P = L.total();
    std::vector<double> point(params.values().begin(), params.values().end());
    point.insert(point.end(), fr.base.span().begin(), fr.base.span().end());

    auto record = [&](const GradCheckResult& r, const std::string& label) {
      ++checks;
      if (r.max_relative_error > worst) {
        worst = r.max_relative_error;
        worst_label = label + " (instance " + std::to_string(instance) + ")";
      }
    };

    // Every loss term and the total, as functions of (theta, H).
    for (int term = 0; term < 9; ++term) {
      auto f = [&](auto z) {
        using T = typename decltype(z)::value_type;
        const LossTerms<T> t = composite_loss<T>(L, z.subspan(0, P), z.subspan(P), fr, cfg, model);
        const T* terms[] = {&t.utility, &t.diver, &t.distill, &t.symm, &t.spar,
                            &t.oracle,  &t.sel,   &t.len,     &t.total};
        return *terms[term];
      };
      static const char* names[] = {"utility", "diver", "distill", "symm", "spar", "oracle", "sel", "len", "total"};
      record(grad_check(f, point, kStep), names[term]);
    }
    // log P(E_i | x) at the first chain position.
    for (std::size_t i = 0; i < n; ++i) {
      auto f = [&](auto z) {
        using T = typename decltype(z)::value_type;
        const std::vector<bool> none(n, false);
        const std::vector<T> C = routing::collab(L, z.subspan(0, P), z.subspan(P), model.diagonal, none);
        const std::vector<T> x = detail::lift<T>(ctx.prompt_embedding().span());
        const std::vector<T> logits = routing::selection_logits(L, z.subspan(0, P), std::span<const T>(x),
                                                                std::span<const T>(C), 0, model.gamma,
                                                                std::vector<bool>(n, true));
        return log_softmax_at(std::span<const T>(logits), none, i);
      };
      record(grad_check(f, point, kStep), "log P(E_" + std::to_string(i) + "|x)");
    }
  }
  const double t = seconds_since(start);
  const bool ok = worst < 1e-4 && t < 30.0;
  return {ok, std::to_string(checks) + " checks, max relative error " + fmt(worst, 3) + " at " + worst_label + ", " +
                  fmt(t, 2) + "s"};
}

// ---------------------------------------------------------------------------

Outcome structural_invariants() {
  const auto start = Clock::now();
  const std::size_t cases = 1000;
  std::vector<std::string> failures;
  Rng rng(77);

  std::size_t stochastic_bad = 0;
  std::size_t sequence_bad = 0;
  std::size_t idempotence_bad = 0;
  std::size_t gini_bad = 0;
  std::size_t kl_bad = 0;
  std::size_t entropy_bad = 0;

  for (std::size_t c = 0; c < cases; ++c) {
    const std::size_t n = 3 + c % 6;
    const std::size_t d = 4 + c % 5;
    const OrchestratorParams params = toy::random_params(n, d, 9000 + c, 0.8);
    ModelConfig model;
    model.diagonal = c % 2 ? DiagonalPolicy::free : DiagonalPolicy::masked;
    OrchestratorView view(params, model);
    if (c % 3 == 0) view = mask_expert(view, c % n);
    const Matrix H = toy::random_unit_rows(n, d, rng);

    // Row-stochastic C.
    const CollabMatrix C = interaction_matrix(H, view);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = C.values.row(i);
      const double s = std::accumulate(row.begin(), row.end(), 0.0);
      const bool negative = std::any_of(row.begin(), row.end(), [](double x) { return x < 0.0; });
      if (view.is_masked(i) ? s != 0.0 : (std::abs(s - 1.0) > 1e-9 || negative)) ++stochastic_bad;
    }

    // Without-replacement sequences.
    const PromptContext ctx = toy::fixed_context("s" + std::to_string(c), n, d, rng);
    const std::size_t k = view.active_count();
    const RolloutResult r = rollout(ctx, view, k, 0.5 + uniform_open(rng), rng);
    std::vector<std::size_t> seq = r.sequence;
    std::sort(seq.begin(), seq.end());
    bool seq_ok = seq.size() == k && std::adjacent_find(seq.begin(), seq.end()) == seq.end();
    for (std::size_t e : seq) seq_ok = seq_ok && !view.is_masked(e);
    if (!seq_ok) ++sequence_bad;

    // Masking idempotence, on the view and on a computed matrix.
    const std::size_t target = (c * 7 + 1) % n;
    if (view.active_count() - (view.is_masked(target) ? 0 : 1) >= 2) {
      const OrchestratorView once = mask_expert(view, target);
      const OrchestratorView twice = mask_expert(once, target);
      const CollabMatrix a = interaction_matrix(H, once);
      const CollabMatrix b = interaction_matrix(H, twice);
      const CollabMatrix m1 = mask_collab(C, target);
      const CollabMatrix m2 = mask_collab(m1, target);
      if (once.masked() != twice.masked() || a.values.values() != b.values.values() ||
          m1.values.values() != m2.values.values()) {
        ++idempotence_bad;
      }
    }

    // Gini scale invariance.
    Vector u(n);
    for (double& x : u) x = uniform_open(rng) * (c % 5 == 0 ? 0.0 : 1.0) + (c % 7 == 0 ? 0.0 : 1e-3);
    if (std::accumulate(u.begin(), u.end(), 0.0) > 0.0) {
      Vector scaled(n);
      const double factor = std::exp(8.0 * uniform_open(rng) - 4.0);
      for (std::size_t i = 0; i < n; ++i) scaled[i] = factor * u[i];
      if (std::abs(gini(u) - gini(scaled)) > 1e-12) ++gini_bad;
    }

    // KL(p, p) = 0 and entropy bounds.
    Vector p(n);
    for (double& x : p) x = c % 4 == 0 ? std::floor(2.0 * uniform_open(rng)) : uniform_open(rng);
    p[c % n] += 1e-3;
    const double mass = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& x : p) x /= mass;
    if (std::abs(kl_divergence(p, p)) > 1e-12) ++kl_bad;
    const double h = dist_entropy(p);
    const double ln_n = std::log(static_cast<double>(n));
    const double hc = collab_entropy(C);
    if (h < -1e-12 || h > ln_n + 1e-12 || hc < -1e-12 || hc > ln_n + 1e-12) ++entropy_bad;
  }
  const double t = seconds_since(start);
  const std::size_t bad = stochastic_bad + sequence_bad + idempotence_bad + gini_bad + kl_bad + entropy_bad;
  const bool ok = bad == 0 && t < 60.0;
  return {ok, std::to_string(cases) + " cases per property; violations: stochastic " + std::to_string(stochastic_bad) +
                  ", sequences " + std::to_string(sequence_bad) + ", idempotence " + std::to_string(idempotence_bad) +
                  ", gini " + std::to_string(gini_bad) + ", kl " + std::to_string(kl_bad) + ", entropy " +
                  std::to_string(entropy_bad) + "; " + fmt(t, 2) + "s"};
}

// ---------------------------------------------------------------------------

Outcome brute_force_equivalence() {
  const auto start = Clock::now();
  const ModelConfig model;
  ProbeSettings settings;
  settings.first_choice.closed_form = true;
  settings.routing_depth = 3;
  Rng rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const OrchestratorParams params = toy::random_params(3, 5, 700 + trial, 0.8);
    const OrchestratorView view(params, model);
    std::vector<PromptContext> contexts;
    for (int p = 0; p < 3; ++p) contexts.push_back(toy::fixed_context("b" + std::to_string(p), 3, 5, rng));

    // Selection distributions: s(x) and the probability of every full sequence.
    for (const PromptContext& ctx : contexts) {
      const PromptRouting routed = route_prompt(ctx, view, settings.first_choice);
      const Vector want = oracle::first_choice(params, model, ctx, {});
      for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(routed.first_choice[i] - want[i]));

      const oracle::Reduced red = oracle::reduce(params, model, ctx.base_outputs(), {});
      std::vector<std::size_t> order{0, 1, 2};
      double total = 0.0;
      do {
        ChainState state = initial_state(ctx, view);
        const StepView first = evaluate_step(ctx, view, state, interaction_matrix(ctx.base_outputs(), view));
        double p_engine = 1.0;
        double p_oracle = 1.0;
        std::vector<bool> available(3, true);
        std::vector<double> x(ctx.prompt_embedding().begin(), ctx.prompt_embedding().end());
        for (std::size_t t = 0; t < 3; ++t) {
          const StepView step = t == 0 ? first : evaluate_step(ctx, view, state, first.collab);
          p_engine *= step.pi[order[t]];
          p_oracle *= oracle::step_pi(red, model, x, t, available)[order[t]];
          state = advance(ctx, view, state, step, order[t]);
          available[order[t]] = false;
          for (std::size_t a = 0; a < x.size(); ++a) {
            x[a] = (1.0 - model.chain_blend) * ctx.prompt_embedding()[a] + model.chain_blend * red.H(order[t], a);
          }
        }
        worst = std::max(worst, std::abs(p_engine - p_oracle));
        total += p_engine;
      } while (std::next_permutation(order.begin(), order.end()));
      worst = std::max(worst, std::abs(total - 1.0));
    }

    // Masking analysis.
    for (std::size_t expert = 0; expert < 3; ++expert) {
      const MaskingOutcome out = mask_and_measure(view, contexts, expert, settings);
      const std::vector<std::size_t> keep = oracle::survivors(3, {expert});
      double seq = 0.0;
      double route = 0.0;
      for (const PromptContext& ctx : contexts) {
        const Vector s0 = oracle::first_choice(params, model, ctx, {});
        const Vector s1 = oracle::first_choice(params, model, ctx, {expert});
        seq += oracle::kl(s0.span(), s1.span(), settings.epsilon);
        route += oracle::kernel_kl(oracle::kernel(params, model, ctx, {}, 3),
                                   oracle::kernel(params, model, ctx, {expert}, 3), keep, settings.epsilon);
      }
      worst = std::max(worst, std::abs(out.kl_sequence - seq / 3.0));
      worst = std::max(worst, std::abs(out.kl_routing - route / 3.0));
    }
  }
  const double t = seconds_since(start);
  const bool ok = worst <= 1e-6 && t < 10.0;
  return {ok, "max deviation " + fmt(worst, 3) + " over 20 systems, " + fmt(t, 2) + "s"};
}

// ---------------------------------------------------------------------------
// Synthetic training runs shared by the dynamics, perturbation and masking
// criteria.

struct SeedRun {
  std::uint64_t seed = 0;
  double seconds = 0.0;
  std::vector<EpochMetrics> metrics;
  double kl_remove_numbers = 0.0;
  double kl_shuffle = 0.0;
  double kl_routing_top = 0.0;
  double kl_routing_random = 0.0;
  fs::path out;
};

cli::RunConfig synthetic_config(TaskTag task, std::uint64_t seed, const fs::path& out) {
  cli::RunConfig cfg;
  cfg.seed = seed;
  cfg.consortium.kind = "homogeneous";
  cfg.consortium.dim = 32;
  cfg.tasks.mix = {{task, 1.0}};
  cfg.tasks.prompts = 200;
  cfg.train.epochs = 5;
  cfg.probe.mask_random_seeds = 20;
  cfg.out = out.string();
  cfg.validate();
  return cfg;
}

SeedRun run_seed(TaskTag task, std::uint64_t seed, const fs::path& root, bool masking) {
  SeedRun run;
  run.seed = seed;
  run.out = root / (std::string(to_string(task)) + "_seed" + std::to_string(seed));
  fs::remove_all(run.out);
  const cli::RunConfig cfg = synthetic_config(task, seed, run.out);
  std::ostringstream log;
  const auto start = Clock::now();
  cli::RunArtifact art = cli::cmd_train(cfg, cli::CommandOptions{}, log);
  run.seconds = seconds_since(start);
  run.metrics = std::move(art.metrics_rows);

  cli::CommandOptions perturb;
  perturb.kinds = {"remove_numbers", "shuffle_sentences"};
  const cli::ProbeReport p = cli::cmd_perturb(cfg, perturb, log);
  for (const cli::PerturbationRow& row : p.perturbations) {
    if (row.kind == "remove_numbers") run.kl_remove_numbers = row.kl_sequence;
    if (row.kind == "shuffle_sentences") run.kl_shuffle = row.kl_sequence;
  }
  if (masking) {
    cli::CommandOptions mask;
    mask.strategies = {"top_intrinsic", "random_nontop"};
    const cli::ProbeReport m = cli::cmd_mask(cfg, mask, log);
    for (const cli::MaskingRow& row : m.masking) {
      if (row.strategy == "top_intrinsic") run.kl_routing_top = row.kl_routing;
      if (row.strategy == "random_nontop") run.kl_routing_random = row.kl_routing;
    }
  }
  return run;
}

Outcome training_dynamics(const std::vector<SeedRun>& runs) {
  std::size_t entropy_down = 0;
  std::size_t gini_up = 0;
  std::size_t order_down = 0;
  bool order_floor = true;
  bool fast = true;
  std::ostringstream s;
  for (const SeedRun& r : runs) {
    const EpochMetrics& first = r.metrics.front();
    const EpochMetrics& last = r.metrics.back();
    entropy_down += last.collab_entropy < first.collab_entropy ? 1 : 0;
    gini_up += last.gini > first.gini ? 1 : 0;
    order_down += last.ordering_entropy < first.ordering_entropy ? 1 : 0;
    order_floor = order_floor && last.ordering_entropy > 0.1;
    fast = fast && r.seconds < 60.0;
    s << " [seed " << r.seed << ": H_C " << fmt(first.collab_entropy) << "->" << fmt(last.collab_entropy) << ", gini "
      << fmt(first.gini) << "->" << fmt(last.gini) << ", H_s " << fmt(first.ordering_entropy) << "->"
      << fmt(last.ordering_entropy) << ", " << fmt(r.seconds, 3) << "s]";
  }
  const bool ok = runs.size() == 5 && entropy_down >= 4 && gini_up >= 4 && order_down >= 4 && order_floor && fast;
  return {ok, "collab entropy down " + std::to_string(entropy_down) + "/5, gini up " + std::to_string(gini_up) +
                  "/5, ordering entropy down " + std::to_string(order_down) + "/5" + s.str()};
}

Outcome perturbation_selectivity(const std::vector<SeedRun>& arith, const std::vector<SeedRun>& knowledge) {
  std::size_t numbers_win = 0;
  std::size_t shuffle_win = 0;
  std::ostringstream s;
  for (const SeedRun& r : arith) {
    numbers_win += r.kl_remove_numbers >= r.kl_shuffle ? 1 : 0;
    s << " [arith " << r.seed << ": " << fmt(r.kl_remove_numbers) << " vs " << fmt(r.kl_shuffle) << "]";
  }
  for (const SeedRun& r : knowledge) {
    shuffle_win += r.kl_shuffle > r.kl_remove_numbers ? 1 : 0;
    s << " [knowledge " << r.seed << ": " << fmt(r.kl_remove_numbers) << " vs " << fmt(r.kl_shuffle) << "]";
  }
  const bool ok = numbers_win >= 4 && shuffle_win >= 3;
  return {ok, "arith remove_numbers>=shuffle " + std::to_string(numbers_win) + "/5, knowledge shuffle>remove_numbers " +
                  std::to_string(shuffle_win) + "/5" + s.str()};
}

Outcome masking_asymmetry(const std::vector<SeedRun>& runs) {
  std::size_t wins = 0;
  std::ostringstream s;
  for (const SeedRun& r : runs) {
    wins += r.kl_routing_top > r.kl_routing_random ? 1 : 0;
    s << " [seed " << r.seed << ": " << fmt(r.kl_routing_top) << " vs " << fmt(r.kl_routing_random) << "]";
  }
  return {wins >= 4, "top_intrinsic > random_nontop on " + std::to_string(wins) + "/5" + s.str()};
}

// ---------------------------------------------------------------------------

Outcome cascade_sensitivity_check() {
  const auto start = Clock::now();
  Rng rng(5);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 3 + c % 3;
    std::vector<double> H(n);
    for (double& h : H) h = 3.0 * uniform_open(rng);
    const double threshold = 0.5 + uniform_open(rng);
    const double beta = 0.5 + 4.0 * uniform_open(rng);
    const Vector analytic = stop_sensitivity(H, threshold, beta);
    for (std::size_t i = 0; i < n; ++i) {
      const double step = 1e-6;
      std::vector<double> up = H;
      std::vector<double> down = H;
      up[i] += step;
      down[i] -= step;
      const double fd = (cascade::stop_probabilities<double>(up, threshold, beta)[i] -
                         cascade::stop_probabilities<double>(down, threshold, beta)[i]) /
                        (2.0 * step);
      worst = std::max(worst, std::abs(analytic[i] - std::abs(fd)));
    }
  }
  // Saturated gates: every entropy far from the threshold.
  double saturated = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = 3 + c % 3;
    std::vector<double> H(n);
    for (std::size_t i = 0; i < n; ++i) H[i] = (c + i) % 2 ? 40.0 + uniform_open(rng) : -40.0 - uniform_open(rng);
    const Vector s = stop_sensitivity(H, 1.0, 2.0);
    for (double x : s) saturated = std::max(saturated, x);
  }
  const double t = seconds_since(start);
  const bool ok = worst <= 1e-6 && saturated < 1e-6 && t < 5.0;
  return {ok, "max |analytic - fd| " + fmt(worst, 3) + ", saturated max " + fmt(saturated, 3) + ", " + fmt(t, 2) + "s"};
}

Outcome determinism(const fs::path& root, const SeedRun& reference) {
  const fs::path again = root / "determinism_rerun";
  fs::remove_all(again);
  const cli::RunConfig cfg = synthetic_config(TaskTag::arith, reference.seed, again);
  std::ostringstream log;
  (void)cli::cmd_train(cfg, cli::CommandOptions{}, log);
  const std::string a = cli::read_file(reference.out / "metrics.jsonl");
  const std::string b = cli::read_file(again / "metrics.jsonl");
  return {!a.empty() && a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "different")};
}

}  // namespace

int main() {
  const fs::path root = fs::temp_directory_path() / "inform_acceptance";
  fs::create_directories(root);
  int failed = 0;
  auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << std::endl;
  };

  report(1, "spearman p-values", spearman_reproduction);
  report(2, "wilcoxon exact floor", wilcoxon_floor);
  report(3, "masking ratio", [&] { return masking_ratio(root); });
  report(4, "gradient integrity", gradient_integrity);
  report(5, "structural invariants", structural_invariants);
  report(6, "brute-force equivalence", brute_force_equivalence);

  std::vector<SeedRun> arith;
  std::vector<SeedRun> knowledge;
  std::string training_error;
  try {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      arith.push_back(run_seed(TaskTag::arith, seed, root, true));
      knowledge.push_back(run_seed(TaskTag::knowledge, seed, root, false));
    }
  } catch (const std::exception& e) {
    training_error = e.what();
  }
  auto needs_runs = [&](auto fn) {
    return [&, fn]() -> Outcome {
      if (!training_error.empty()) return {false, "training runs failed: " + training_error};
      return fn();
    };
  };
  report(7, "training dynamics", needs_runs([&] { return training_dynamics(arith); }));
  report(8, "perturbation selectivity", needs_runs([&] { return perturbation_selectivity(arith, knowledge); }));
  report(9, "masking asymmetry", needs_runs([&] { return masking_asymmetry(arith); }));
  report(10, "cascade sensitivity", cascade_sensitivity_check);
  report(11, "determinism", needs_runs([&] { return determinism(root, arith.front()); }));

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
