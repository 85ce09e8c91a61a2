// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "inform/diffcore/grad_check.hpp"
#include "inform/experts/consortium.hpp"
#include "inform/experts/encoder.hpp"
#include "inform/experts/tasks.hpp"
#include "inform/training/loss.hpp"
#include "inform/training/optimizer.hpp"
#include "inform/training/trainer.hpp"
#include "toy.hpp"

using namespace inform;

namespace {

Matrix random_stochastic(std::size_t n, Rng& rng) {
  Matrix C(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += C(i, j) = uniform_open(rng);
    for (std::size_t j = 0; j < n; ++j) C(i, j) /= total;
  }
  return C;
}

double cos_ref(const std::vector<double>& a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Loss, SymmetryExamples) {
  Matrix sym(3, 3, std::vector<double>{0, 0.5, 0.5, 0.5, 0, 0.5, 0.5, 0.5, 0});
  EXPECT_EQ(symmetry_loss(sym), 0.0);
  EXPECT_DOUBLE_EQ(symmetry_loss(Matrix(2, 2, std::vector<double>{0, 1, 0, 0})), 2.0);
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix C = random_stochastic(5, rng);
    double want = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) want += (C(i, j) - C(j, i)) * (C(i, j) - C(j, i));
    }
    EXPECT_NEAR(symmetry_loss(C), want, 1e-12);
  }
}

TEST(Loss, SparsityExamples) {
  Matrix one_hot(3, 3, std::vector<double>{0, 1, 0, 0, 0, 1, 1, 0, 0});
  EXPECT_EQ(sparsity_loss(one_hot), 0.0);
  EXPECT_NEAR(sparsity_loss(Matrix(10, 10, 0.1)), std::log(10.0), 1e-12);
  Matrix halves(4, 4, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    halves(i, (i + 1) % 4) = 0.5;
    halves(i, (i + 2) % 4) = 0.5;
  }
  EXPECT_NEAR(sparsity_loss(halves), std::log(2.0), 1e-12);
}

TEST(Loss, OracleAlignmentExamples) {
  Rng rng(2);
  const std::size_t n = 3;
  const std::size_t d = 4;
  const Vector o = toy::random_unit(d, rng);
  const Matrix O = toy::random_unit_rows(n, d, rng);

  // Hand-rolled double loop.
  const Matrix C = random_stochastic(n, rng);
  Vector pi{0.2, 0.5, 0.3};
  double pairs = 0.0;
  double single = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    single += std::pow(pi[i] - cos_ref(std::vector<double>(O.row(i).begin(), O.row(i).end()), o.span()), 2);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> mid(d);
      for (std::size_t a = 0; a < d; ++a) mid[a] = 0.5 * (O(i, a) + O(j, a));
      pairs += std::pow(C(i, j) - cos_ref(mid, o.span()), 2);
    }
  }
  EXPECT_NEAR(oracle_alignment_loss(C, pi, O, o), pairs / 6.0 + single / 3.0, 1e-12);

  // C and pi equal to their oracle targets.
  Matrix Co(n, n);
  Vector po(n);
  for (std::size_t i = 0; i < n; ++i) {
    po[i] = cos_ref(std::vector<double>(O.row(i).begin(), O.row(i).end()), o.span());
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<double> mid(d);
      for (std::size_t a = 0; a < d; ++a) mid[a] = 0.5 * (O(i, a) + O(j, a));
      Co(i, j) = cos_ref(mid, o.span());
    }
  }
  EXPECT_NEAR(oracle_alignment_loss(Co, po, O, o), 0.0, 1e-15);

  // Every expert equal to the oracle: all targets are 1.
  Matrix same(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) same(i, a) = o[a];
  }
  const Matrix ones(n, n, std::vector<double>{0, 1, 1, 1, 0, 1, 1, 1, 0});
  EXPECT_NEAR(oracle_alignment_loss(ones, Vector{1.0, 1.0, 1.0}, same, o), 0.0, 1e-15);
}

TEST(Loss, DiversityExamples) {
  const std::vector<std::size_t> all{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_NEAR(diversity_loss(Vector(10, 0.1), all), 0.0, 1e-18);
  Vector one_hot(10, 0.0);
  one_hot[4] = 1.0;
  const std::vector<std::size_t> top{4};
  EXPECT_NEAR(diversity_loss(one_hot, top), -0.009, 1e-15);
  EXPECT_NEAR(diversity_loss(one_hot, top, +1.0), 0.009, 1e-15);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Vector pi(7);
    double total = 0.0;
    for (double& p : pi) total += p = uniform_open(rng);
    for (double& p : pi) p /= total;
    const std::vector<std::size_t> k3 = top_k_indices(pi.span(), 3, std::vector<bool>(7, true));
    std::vector<double> s(7, 0.0);
    for (std::size_t i : k3) s[i] = pi[i];
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / 7.0;
    double var = 0.0;
    for (double x : s) var += (x - mean) * (x - mean);
    var /= 7.0;
    EXPECT_NEAR(diversity_loss(pi, k3), -var / 7.0, 1e-12);
  }
}

TEST(Loss, TopKBreaksTiesLow) {
  const std::vector<double> v{0.3, 0.3, 0.1, 0.3};
  EXPECT_EQ(top_k_indices(v, 2, std::vector<bool>(4, true)), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(top_k_indices(v, 2, std::vector<bool>{false, true, true, true}), (std::vector<std::size_t>{1, 3}));
}

TEST(Loss, PerfectChainZeroesUtilityAndDistill) {
  const auto params = toy::random_params(3, 4, 4);
  const ModelConfig model;
  const OrchestratorView view(params, model);
  Rng rng(5);
  const PromptContext ctx = toy::fixed_context("perfect", 3, 4, rng);
  FrozenRollout fr = toy::frozen_instance(view, ctx, 2, rng);
  fr.target = Vector(fr.final_candidates.row(fr.last_chosen));
  fr.oracle = Vector(fr.base.row(fr.last_chosen));
  const LossBreakdown b = evaluate_loss(params, fr, TrainConfig{}, model);
  EXPECT_NEAR(b.utility, 0.0, 1e-24);
  EXPECT_NEAR(b.distill, 0.0, 1e-24);
}

TEST(Loss, LengthTermAndWeightedTotal) {
  const auto params = toy::random_params(4, 4, 6);
  const ModelConfig model;
  const OrchestratorView view(params, model);
  Rng rng(7);
  const PromptContext ctx = toy::fixed_context("len", 4, 4, rng);
  const FrozenRollout fr = toy::frozen_instance(view, ctx, 3, rng);
  TrainConfig cfg;
  const LossBreakdown b = evaluate_loss(params, fr, cfg, model);
  EXPECT_DOUBLE_EQ(b.len, 3.0);
  EXPECT_DOUBLE_EQ(cfg.weights.len * b.len, 1.5);
  const LossWeights& w = cfg.weights;
  const double sum = w.utility * b.utility + w.distill * b.distill + w.symm * b.symm + w.spar * b.spar +
                     w.oracle * b.oracle + w.diver * b.diver + w.sel * b.sel + w.len * b.len;
  EXPECT_NEAR(b.total, sum, 1e-9);
  EXPECT_GE(b.symm, 0.0);
  EXPECT_GE(b.spar, 0.0);
  EXPECT_GE(b.oracle, 0.0);
  EXPECT_LE(b.diver, 0.0);
  EXPECT_NEAR(b.sel_literal, -0.25, 1e-12);
}

TEST(Loss, AnchoringKeepsValueAndGradient) {
  const auto params = toy::random_params(3, 4, 8);
  const ModelConfig model;
  const OrchestratorView view(params, model);
  Rng rng(9);
  const PromptContext ctx = toy::fixed_context("anchor", 3, 4, rng);
  FrozenRollout fr = toy::frozen_instance(view, ctx, 2, rng);
  const LossGradient plain = loss_and_gradient(params, fr, TrainConfig{}, model);
  anchor_relaxation(fr, params, model);
  const LossGradient anchored = loss_and_gradient(params, fr, TrainConfig{}, model);
  EXPECT_NEAR(plain.breakdown.total, anchored.breakdown.total, 1e-12);
  for (std::size_t i = 0; i < plain.gradient.size(); ++i) EXPECT_NEAR(plain.gradient[i], anchored.gradient[i], 1e-12);
}

TEST(Loss, TotalGradientOnAThreeExpertToy) {
  const ModelConfig model;
  TrainConfig cfg;
  Rng rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const auto params = toy::random_params(3, 4, 20 + trial);
    const OrchestratorView view(params, model);
    const PromptContext ctx = toy::fixed_context("gc", 3, 4, rng);
    FrozenRollout fr = toy::frozen_instance(view, ctx, 2, rng);
    anchor_relaxation(fr, params, model);
    const ParamLayout L = params.layout();
    auto f = [&](auto theta) {
      using T = typename decltype(theta)::value_type;
      const std::vector<T> H = detail::lift<T>(fr.base.span());
      return composite_loss<T>(L, theta, std::span<const T>(H), fr, cfg, model).total;
    };
    const GradCheckResult r = grad_check(f, params.values(), 1e-5);
    EXPECT_LT(r.max_relative_error, 1e-4) << "trial " << trial << " index " << r.worst_index;
    const LossGradient lg = loss_and_gradient(params, fr, cfg, model);
    for (std::size_t i = 0; i < r.analytic.size(); ++i) EXPECT_NEAR(lg.gradient[i], r.analytic[i], 1e-10);
  }
}

TEST(Loss, NonFiniteNamesTheTerm) {
  const auto params = toy::random_params(3, 4, 11);
  const ModelConfig model;
  const OrchestratorView view(params, model);
  Rng rng(12);
  const PromptContext ctx = toy::fixed_context("nan", 3, 4, rng);
  FrozenRollout fr = toy::frozen_instance(view, ctx, 2, rng);
  fr.target[0] = std::nan("");
  try {
    (void)evaluate_loss(params, fr, TrainConfig{}, model);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    EXPECT_NE(std::string(e.what()).find("utility"), std::string::npos) << e.what();
  }
}

TEST(Schedule, WarmupThenCosine) {
  const std::size_t total = 500;
  EXPECT_EQ(scheduled_learning_rate(0, total, 1e-3, 0.1), 0.0);
  EXPECT_DOUBLE_EQ(scheduled_learning_rate(50, total, 1e-3, 0.1), 1e-3);
  EXPECT_NEAR(scheduled_learning_rate(25, total, 1e-3, 0.1), 5e-4, 1e-15);
  EXPECT_NEAR(scheduled_learning_rate(total - 1, total, 1e-3, 0.1), 0.0, 1e-9);
  double previous = 1.0;
  for (std::size_t s = 50; s < total; ++s) {
    const double lr = scheduled_learning_rate(s, total, 1e-3, 0.1);
    EXPECT_LE(lr, previous + 1e-18);
    previous = lr;
  }
}

TEST(Optimizer, ClipKeepsDirection) {
  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> g(9);
    for (double& x : g) x = 20.0 * standard_normal(rng);
    const std::vector<double> original = g;
    const double before = clip_gradient(g, 15.0);
    double after = 0.0;
    for (double x : g) after += x * x;
    after = std::sqrt(after);
    EXPECT_LE(after, 15.0 + 1e-9);
    const double scale = before > 15.0 ? 15.0 / before : 1.0;
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], original[i] * scale, 1e-12);
  }
}

TEST(Optimizer, AdamFirstStepMovesByTheLearningRate) {
  std::vector<double> params{1.0, -2.0, 0.5};
  const std::vector<double> grad{0.3, -4.0, 0.0};
  OptimizerState state(3);
  adam_update(params, grad, state, 0.01, AdamConfig{});
  // Bias-corrected first step is lr * g / (|g| + eps').
  EXPECT_NEAR(params[0], 1.0 - 0.01, 1e-7);
  EXPECT_NEAR(params[1], -2.0 + 0.01, 1e-7);
  EXPECT_EQ(params[2], 0.5);
  EXPECT_EQ(state.step, 1u);
}

TEST(Optimizer, AdamMatchesReferenceRecursion) {
  Rng rng(14);
  std::vector<double> p(4);
  for (double& x : p) x = standard_normal(rng);
  std::vector<double> ref = p;
  std::vector<double> m(4, 0.0), v(4, 0.0);
  OptimizerState state(4);
  for (int step = 1; step <= 30; ++step) {
    std::vector<double> g(4);
    for (double& x : g) x = standard_normal(rng);
    adam_update(p, g, state, 1e-2, AdamConfig{});
    for (std::size_t i = 0; i < 4; ++i) {
      m[i] = 0.9 * m[i] + 0.1 * g[i];
      v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
      const double mh = m[i] / (1.0 - std::pow(0.9, step));
      const double vh = v[i] / (1.0 - std::pow(0.999, step));
      ref[i] -= 1e-2 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(p[i], ref[i], 1e-12);
}

TEST(Config, Validation) {
  TrainConfig ok;
  EXPECT_NO_THROW(ok.validate());
  TrainConfig bad = ok;
  bad.weights.spar = -1.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.gumbel_temp_min = 2.0;
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.gumbel_temp_decay = 0.0;
  EXPECT_THROW(bad.validate(), Error);
  EXPECT_EQ(parse_sel_loss_mode("literal"), SelLossMode::literal);
  EXPECT_THROW((void)parse_sel_loss_mode("nope"), Error);
}

namespace {

std::vector<ExpertProfile> first_profiles(std::size_t count) {
  std::vector<ExpertProfile> all = homogeneous_profiles();
  all.resize(count);
  return all;
}

struct SmallRun {
  Consortium consortium;
  std::vector<PromptInstance> corpus;
  std::vector<PromptInstance> eval;
  TrainConfig cfg;
  ModelConfig model;

  SmallRun()
      : consortium(first_profiles(4), 8) {
    const PromptEncoder encoder(8);
    corpus = generate_corpus({{TaskTag::arith, 1.0}}, 12, 3, encoder);
    eval = generate_corpus({{TaskTag::arith, 1.0}}, 6, 4, encoder);
    cfg.epochs = 2;
    cfg.seed = 7;
  }
};

}  // namespace

TEST(Trainer, OneCheckpointPerEpochAndRoundTrip) {
  SmallRun run;
  const auto dir = fresh_dir("inform_train_ckpt");
  TrainOptions opts;
  opts.out_dir = dir;
  opts.config_hash = "abc123";
  const TrainResult result = train(run.cfg, run.model, run.consortium, run.corpus, run.eval, opts);
  ASSERT_EQ(result.metrics.size(), 2u);
  ASSERT_EQ(result.checkpoints.size(), 2u);
  EXPECT_EQ(result.metrics[0].epoch, 1u);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.jsonl"));

  const Checkpoint ck = load_checkpoint(result.checkpoints.back(), "abc123");
  EXPECT_EQ(ck.config_hash, "abc123");
  EXPECT_EQ(std::vector<double>(ck.state.params.values().begin(), ck.state.params.values().end()),
            std::vector<double>(result.state.params.values().begin(), result.state.params.values().end()));
  EXPECT_EQ(ck.state.optimizer.m, result.state.optimizer.m);
  EXPECT_EQ(ck.state.optimizer.v, result.state.optimizer.v);
  EXPECT_EQ(ck.state.optimizer.step, result.state.optimizer.step);
  EXPECT_EQ(ck.state.confidence_ema, result.state.confidence_ema);
  EXPECT_EQ(ck.state.temperature, result.state.temperature);
  EXPECT_EQ(ck.state.epoch, 2u);

  try {
    (void)load_checkpoint(result.checkpoints.back(), "different");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  std::filesystem::remove_all(dir);
}

TEST(Trainer, CheckpointErrors) {
  const auto dir = fresh_dir("inform_ckpt_errors");
  std::filesystem::create_directories(dir);
  try {
    (void)load_checkpoint(dir / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
  std::ofstream(dir / "bad.json") << "{\"format\": 3}";
  try {
    (void)load_checkpoint(dir / "bad.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
  }
  std::filesystem::remove_all(dir);
}

TEST(Trainer, DeterministicAndTemperatureAnneals) {
  SmallRun run;
  const TrainResult a = train(run.cfg, run.model, run.consortium, run.corpus, run.eval);
  const TrainResult b = train(run.cfg, run.model, run.consortium, run.corpus, run.eval);
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t e = 0; e < a.metrics.size(); ++e) {
    EXPECT_EQ(a.metrics[e].loss.total, b.metrics[e].loss.total);
    EXPECT_EQ(a.metrics[e].collab_entropy, b.metrics[e].collab_entropy);
    EXPECT_EQ(a.metrics[e].gini, b.metrics[e].gini);
  }
  // 12 prompts at batch 2 for 2 epochs: 12 decays of 0.999.
  EXPECT_EQ(a.state.step, 12u);
  EXPECT_NEAR(a.state.temperature, std::pow(0.999, 12), 1e-12);
  for (const EpochMetrics& m : a.metrics) {
    EXPECT_GE(m.k, 1u);
    EXPECT_LE(m.k, 4u);
    EXPECT_GE(m.collab_entropy, 0.0);
    EXPECT_LE(m.collab_entropy, std::log(3.0) + 1e-9);
  }
}

TEST(Trainer, ResumeContinuesFromTheCheckpoint) {
  SmallRun run;
  const auto dir = fresh_dir("inform_train_resume");
  TrainOptions first;
  first.out_dir = dir;
  first.config_hash = "h";
  const TrainResult straight = train(run.cfg, run.model, run.consortium, run.corpus, run.eval, first);

  TrainOptions resume;
  resume.config_hash = "h";
  resume.resume_from = straight.checkpoints.front();
  const TrainResult resumed = train(run.cfg, run.model, run.consortium, run.corpus, run.eval, resume);
  ASSERT_EQ(resumed.metrics.size(), 1u);
  EXPECT_EQ(resumed.metrics[0].epoch, 2u);
  EXPECT_EQ(resumed.metrics[0].loss.total, straight.metrics[1].loss.total);
  EXPECT_EQ(resumed.metrics[0].collab_entropy, straight.metrics[1].collab_entropy);
  std::filesystem::remove_all(dir);
}
