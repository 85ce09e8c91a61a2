// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "inform/diffcore/ops.hpp"
#include "inform/experts/consortium.hpp"
#include "inform/experts/encoder.hpp"
#include "inform/orchestrator/cascade.hpp"
#include "inform/orchestrator/rollout.hpp"
#include "inform/orchestrator/routing.hpp"
#include "toy.hpp"

using namespace inform;

namespace {

double row_sum(const Matrix& m, std::size_t r) {
  const auto row = m.row(r);
  return std::accumulate(row.begin(), row.end(), 0.0);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Interaction, IdenticalExpertsFreeDiagonalIsUniform) {
  const auto params = toy::random_params(5, 6, 1);
  const OrchestratorView view(params, ModelConfig{DiagonalPolicy::free});
  Rng rng(2);
  const Vector h = toy::random_unit(6, rng);
  Matrix H(5, 6);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t a = 0; a < 6; ++a) H(i, a) = h[a];
  }
  const CollabMatrix C = interaction_matrix(H, view);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(C(i, j), 0.2, 1e-12);
  }
}

TEST(Interaction, TwoExpertsMaskedDiagonalIsAPermutation) {
  const auto params = toy::random_params(2, 4, 3);
  const OrchestratorView view(params, ModelConfig{});
  Rng rng(4);
  const CollabMatrix C = interaction_matrix(toy::random_unit_rows(2, 4, rng), view);
  EXPECT_EQ(C(0, 0), 0.0);
  EXPECT_EQ(C(0, 1), 1.0);
  EXPECT_EQ(C(1, 0), 1.0);
  EXPECT_EQ(C(1, 1), 0.0);
}

TEST(Interaction, SemanticPriorGroupsClusters) {
  // Q and K zeroed, lambda large: two clusters of near-identical experts.
  const ParamLayout L = toy::layout(4, 4);
  std::vector<double> theta(L.total(), 0.0);
  theta[L.lambda()] = 20.0;
  const OrchestratorParams params(L, theta);
  const OrchestratorView view(params, ModelConfig{});
  const Matrix H(4, 4, std::vector<double>{1.0, 0.1, 0.0, 0.0,  //
                                           1.0, -0.1, 0.0, 0.0,  //
                                           0.0, 0.0, 1.0, 0.1,   //
                                           0.0, 0.0, 1.0, -0.1});
  const CollabMatrix C = interaction_matrix(H, view);
  const int cluster[4] = {0, 0, 1, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    double within = 0.0;
    double across = 0.0;
    for (std::size_t j = 0; j < 4; ++j) (cluster[i] == cluster[j] ? within : across) += C(i, j);
    EXPECT_GT(within, across) << "row " << i;
  }
}

TEST(Interaction, ScaledRepresentationsKeepThePrior) {
  // With Q and K zeroed only the cosine term is left, so scaling every h_i
  // must leave C unchanged.
  const ParamLayout L = toy::layout(5, 4);
  std::vector<double> theta(L.total(), 0.0);
  theta[L.lambda()] = 1.7;
  const OrchestratorParams params(L, theta);
  const OrchestratorView view(params, ModelConfig{});
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix H = toy::random_unit_rows(5, 4, rng);
    Matrix scaled = H;
    const double c = 0.1 + 10.0 * uniform_open(rng);
    for (double& x : scaled.span()) x *= c;
    const CollabMatrix a = interaction_matrix(H, view);
    const CollabMatrix b = interaction_matrix(scaled, view);
    for (std::size_t k = 0; k < 25; ++k) EXPECT_NEAR(a.values.span()[k], b.values.span()[k], 1e-12);
  }
}

TEST(Interaction, RowsAreStochasticUnderBothPolicies) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto params = toy::random_params(n, 5, 100 + trial, 1.0);
    for (DiagonalPolicy policy : {DiagonalPolicy::masked, DiagonalPolicy::free}) {
      const OrchestratorView view(params, ModelConfig{policy});
      const CollabMatrix C = interaction_matrix(toy::random_unit_rows(n, 5, rng), view);
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_NEAR(row_sum(C.values, i), 1.0, 1e-9);
        for (std::size_t j = 0; j < n; ++j) {
          EXPECT_GE(C(i, j), 0.0);
          EXPECT_LE(C(i, j), 1.0);
        }
        if (policy == DiagonalPolicy::masked) EXPECT_EQ(C(i, i), 0.0);
      }
    }
  }
}

TEST(Interaction, ZeroRepresentationPropagates) {
  const auto params = toy::random_params(3, 4, 7);
  const OrchestratorView view(params, ModelConfig{});
  Matrix H(3, 4, 0.0);
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;
  EXPECT_EQ(code_of([&] { (void)interaction_matrix(H, view); }), ErrorCode::ZeroVector);
}

TEST(Selection, PositionPenaltyIsAdditive) {
  const auto params = toy::random_params(4, 5, 8);
  Rng rng(9);
  const Matrix H = toy::random_unit_rows(4, 5, rng);
  const Vector x = toy::random_unit(5, rng);
  const std::vector<bool> all(4, true);

  ModelConfig flat;
  flat.gamma = 0.0;
  const OrchestratorView v0(params, flat);
  const CollabMatrix C = interaction_matrix(H, v0);
  EXPECT_EQ(selection_logits(v0, x, C, 0, all), selection_logits(v0, x, C, 3, all));

  ModelConfig unit;
  unit.gamma = 1.0;
  const OrchestratorView v1(params, unit);
  const Vector a = selection_logits(v1, x, C, 0, all);
  const Vector b = selection_logits(v1, x, C, 1, all);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i] - b[i], 1.0, 1e-12);
}

TEST(Selection, SymmetricInputsGiveEqualLogits) {
  const ParamLayout L = toy::layout(4, 3);
  std::vector<double> theta(L.total(), 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t a = 0; a < 3; ++a) theta[L.input_heads() + i * 3 + a] = 0.25 * (a + 1);
    theta[L.quality() + i] = -0.4;
  }
  const OrchestratorParams params(L, theta);
  const OrchestratorView view(params, ModelConfig{});
  CollabMatrix C{Matrix(4, 4, 0.25), DiagonalPolicy::free, std::vector<bool>(4, true)};
  std::vector<bool> available{true, false, true, true};
  const Vector logits = selection_logits(view, Vector{0.3, -0.2, 0.9}, C, 2, available);
  EXPECT_DOUBLE_EQ(logits[0], logits[2]);
  EXPECT_DOUBLE_EQ(logits[0], logits[3]);
  EXPECT_TRUE(is_masked_logit(logits[1]));
}

TEST(Selection, ConnectivityIsHalfRowPlusColumnMass) {
  const ParamLayout L = toy::layout(3, 2);
  const OrchestratorParams params(L, std::vector<double>(L.total(), 0.0));
  ModelConfig cfg;
  cfg.gamma = 0.0;
  const OrchestratorView view(params, cfg);
  const Matrix values(3, 3, std::vector<double>{0, 0.7, 0.3, 0.1, 0, 0.9, 0.5, 0.5, 0});
  const CollabMatrix C{values, DiagonalPolicy::masked, std::vector<bool>(3, true)};
  const Vector logits = selection_logits(view, Vector{1.0, 0.0}, C, 0, std::vector<bool>(3, true));
  EXPECT_NEAR(logits[0], 0.5 * (1.0 + 0.6), 1e-15);
  EXPECT_NEAR(logits[1], 0.5 * (1.0 + 1.2), 1e-15);
  EXPECT_NEAR(logits[2], 0.5 * (1.0 + 1.2), 1e-15);
}

TEST(Selection, NothingAvailable) {
  const auto params = toy::random_params(3, 4, 10);
  const OrchestratorView view(params, ModelConfig{});
  Rng rng(11);
  const CollabMatrix C = interaction_matrix(toy::random_unit_rows(3, 4, rng), view);
  EXPECT_EQ(code_of([&] { (void)selection_logits(view, toy::random_unit(4, rng), C, 0, std::vector<bool>(3, false)); }),
            ErrorCode::AllMasked);
}

TEST(AdaptiveK, BoundariesAndArithmetic) {
  EXPECT_EQ(adaptive_k(0.0, 10), 10u);
  EXPECT_EQ(adaptive_k(1.0, 10), 1u);
  EXPECT_EQ(adaptive_k(0.55, 10), 5u);
  std::size_t previous = 10;
  for (int i = 0; i <= 100; ++i) {
    const std::size_t k = adaptive_k(i / 100.0, 10);
    EXPECT_LE(k, previous);
    previous = k;
  }
  EXPECT_THROW((void)adaptive_k(1.5, 10), Error);
}

TEST(Rollout, FullLengthIsAPermutation) {
  const auto params = toy::random_params(6, 5, 12);
  const OrchestratorView view(params, ModelConfig{});
  Rng data(13);
  for (int trial = 0; trial < 100; ++trial) {
    const PromptContext ctx = toy::fixed_context("p" + std::to_string(trial), 6, 5, data);
    Rng rng(trial);
    const RolloutResult r = rollout(ctx, view, 6, 1.0, rng);
    std::vector<std::size_t> sorted = r.sequence;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(sorted[i], i);
    for (std::size_t t = 0; t < r.steps.size(); ++t) EXPECT_TRUE(r.steps[t].available[r.steps[t].chosen]);
  }
}

TEST(Rollout, SingleStep) {
  const auto params = toy::random_params(4, 5, 14);
  const OrchestratorView view(params, ModelConfig{});
  Rng data(15);
  const PromptContext ctx = toy::fixed_context("single", 4, 5, data);
  Rng rng(1);
  const RolloutResult r = rollout(ctx, view, 1, 1.0, rng);
  ASSERT_EQ(r.sequence.size(), 1u);
  EXPECT_EQ(r.first_choice_dist, r.steps[0].pi);
  EXPECT_EQ(r.chain_output, Vector(ctx.base_outputs().row(r.sequence[0])));
}

TEST(Rollout, DeterministicForAFixedSeed) {
  const Consortium consortium(homogeneous_profiles(), 16);
  const auto params = toy::random_params(10, 16, 16);
  const OrchestratorView view(params, ModelConfig{});
  const PromptContext ctx(consortium, 77, "arith-1", encode_prompt("Add 3 and 4 then double it.", 16));
  Rng a(5);
  Rng b(5);
  const RolloutResult x = rollout(ctx, view, 4, 0.8, a);
  const RolloutResult y = rollout(ctx, view, 4, 0.8, b);
  EXPECT_EQ(x.sequence, y.sequence);
  EXPECT_EQ(x.chain_output, y.chain_output);
  ASSERT_EQ(x.steps.size(), y.steps.size());
  for (std::size_t t = 0; t < x.steps.size(); ++t) {
    EXPECT_EQ(x.steps[t].logits, y.steps[t].logits);
    EXPECT_EQ(x.steps[t].soft, y.steps[t].soft);
  }
}

TEST(Rollout, ChainInputBlendsPromptAndPreviousOutput) {
  const auto params = toy::random_params(3, 4, 17);
  const OrchestratorView view(params, ModelConfig{});
  Rng data(18);
  const PromptContext ctx = toy::fixed_context("blend", 3, 4, data);
  Rng rng(2);
  const RolloutResult r = rollout(ctx, view, 2, 1.0, rng);
  const auto out = ctx.base_outputs().row(r.sequence[0]);
  for (std::size_t a = 0; a < 4; ++a) {
    EXPECT_NEAR(r.steps[1].input[a], 0.5 * ctx.prompt_embedding()[a] + 0.5 * out[a], 1e-15);
  }
}

TEST(Rollout, RejectsBadLength) {
  const auto params = toy::random_params(3, 4, 19);
  const OrchestratorView view(params, ModelConfig{});
  Rng data(20);
  const PromptContext ctx = toy::fixed_context("bad", 3, 4, data);
  Rng rng(1);
  EXPECT_THROW((void)rollout(ctx, view, 0, 1.0, rng), Error);
  EXPECT_THROW((void)rollout(ctx, view, 4, 1.0, rng), Error);
}

TEST(Masking, MaskedExpertIsNeverChosen) {
  const auto params = toy::random_params(5, 4, 21);
  const OrchestratorView base(params, ModelConfig{});
  const OrchestratorView view = mask_expert(base, 2);
  Rng data(22);
  for (int trial = 0; trial < 50; ++trial) {
    const PromptContext ctx = toy::fixed_context("m" + std::to_string(trial), 5, 4, data);
    Rng rng(trial);
    const RolloutResult r = rollout(ctx, view, 4, 1.0, rng);
    EXPECT_EQ(r.first_choice_dist[2], 0.0);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(r.collab(j, 2), 0.0);
    EXPECT_EQ(std::count(r.sequence.begin(), r.sequence.end(), 2u), 0);
  }
  EXPECT_FALSE(base.is_masked(2));
}

TEST(Masking, UniformRowsRenormalizeOverTheSurvivors) {
  Matrix values(10, 10, 1.0 / 9.0);
  for (std::size_t i = 0; i < 10; ++i) values(i, i) = 0.0;
  const CollabMatrix C{values, DiagonalPolicy::masked, std::vector<bool>(10, true)};
  const CollabMatrix M = mask_collab(C, 4);
  for (std::size_t i = 0; i < 10; ++i) {
    for (std::size_t j = 0; j < 10; ++j) {
      if (i == 4 || j == 4 || i == j) {
        EXPECT_EQ(M(i, j), 0.0);
      } else {
        EXPECT_NEAR(M(i, j), 1.0 / 8.0, 1e-15);
      }
    }
  }
  Matrix free_values(10, 10, 0.1);
  const CollabMatrix F{free_values, DiagonalPolicy::free, std::vector<bool>(10, true)};
  const CollabMatrix G = mask_collab(F, 0);
  for (std::size_t j = 1; j < 10; ++j) EXPECT_NEAR(G(3, j), 1.0 / 9.0, 1e-15);
}

TEST(Masking, IdempotentAndGuarded) {
  const auto params = toy::random_params(3, 4, 23);
  const OrchestratorView base(params, ModelConfig{});
  const OrchestratorView once = mask_expert(base, 1);
  const OrchestratorView twice = mask_expert(once, 1);
  EXPECT_EQ(once.masked(), twice.masked());
  EXPECT_EQ(once.active_count(), 2u);
  EXPECT_EQ(code_of([&] { (void)mask_expert(once, 0); }), ErrorCode::TooFewExperts);
}

TEST(Masking, ViewMatchesTheReducedModel) {
  // Masking expert 1 of 4 must give the same C and logits as a 3-expert
  // model built from the surviving parameter blocks.
  const std::size_t n = 4;
  const std::size_t d = 5;
  const auto params = toy::random_params(n, d, 24);
  const OrchestratorView masked = mask_expert(OrchestratorView(params, ModelConfig{}), 1);
  const std::vector<std::size_t> keep{0, 2, 3};

  const ParamLayout L = params.layout();
  const ParamLayout R = toy::layout(3, d);
  std::vector<double> reduced(R.total());
  std::copy_n(params.values().begin(), R.input_heads(), reduced.begin());
  for (std::size_t r = 0; r < 3; ++r) {
    std::copy_n(params.values().begin() + L.input_heads() + keep[r] * d, d, reduced.begin() + R.input_heads() + r * d);
    reduced[R.quality() + r] = params.values()[L.quality() + keep[r]];
  }
  const OrchestratorParams small_params(R, reduced);
  const OrchestratorView small(small_params, ModelConfig{});

  Rng rng(25);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix H = toy::random_unit_rows(n, d, rng);
    Matrix Hs(3, d);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t a = 0; a < d; ++a) Hs(r, a) = H(keep[r], a);
    }
    const Vector x = toy::random_unit(d, rng);
    const CollabMatrix C = interaction_matrix(H, masked);
    const CollabMatrix Cs = interaction_matrix(Hs, small);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(C(keep[r], keep[c]), Cs(r, c), 1e-12);
    }
    std::vector<bool> avail(n, true);
    avail[1] = false;
    const Vector pi = softmax_row(selection_logits(masked, x, C, 0, avail), std::vector<std::size_t>{1});
    const Vector ps = softmax_row(selection_logits(small, x, Cs, 0, std::vector<bool>(3, true)));
    for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(pi[keep[r]], ps[r], 1e-12);
  }
}

TEST(Cascade, HandComposedProduct) {
  const std::vector<double> H{1.5, 0.8, 0.5};
  const CascadeRecord r = cascade_run("c", H, 1.0, 2.0);
  const auto g = [](double h) { return 1.0 / (1.0 + std::exp(-2.0 * (1.0 - h))); };
  const double p1 = g(1.5);
  const double p2 = g(0.8) * (1.0 - g(1.5));
  const double p3 = (1.0 - g(1.5)) * (1.0 - g(0.8));
  EXPECT_NEAR(r.stop_probs[0], p1, 1e-12);
  EXPECT_NEAR(r.stop_probs[1], p2, 1e-12);
  EXPECT_NEAR(r.stop_probs[2], p3, 1e-12);
  EXPECT_EQ(r.stopping_index, 1u);
}

TEST(Cascade, Limits) {
  const std::vector<double> high{5.0, 6.0, 7.0};
  const CascadeRecord a = cascade_run("a", high, 1.0, 2.0);
  EXPECT_EQ(a.stopping_index, 2u);
  const CascadeRecord a50 = cascade_run("a", high, 1.0, 50.0);
  EXPECT_GT(a50.stop_probs[2], a.stop_probs[2]);
  EXPECT_GT(a50.stop_probs[2], 0.999);

  const std::vector<double> low{0.01, 2.0, 2.0};
  const CascadeRecord b = cascade_run("b", low, 1.0, 50.0);
  EXPECT_EQ(b.stopping_index, 0u);
  EXPECT_GT(b.stop_probs[0], 0.999);
  EXPECT_THROW((void)cascade_run("z", low, 1.0, 0.0), Error);
}

TEST(Cascade, SoftAgreesWithHardAtHighSharpness) {
  Rng rng(26);
  int agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 3 + trial % 3;
    std::vector<double> H(n);
    for (double& h : H) h = 2.0 * uniform_open(rng);
    const CascadeRecord r = cascade_run("s", H, 1.0, 50.0);
    EXPECT_NEAR(std::accumulate(r.stop_probs.begin(), r.stop_probs.end(), 0.0), 1.0, 1e-12);
    const auto best = std::max_element(r.stop_probs.begin(), r.stop_probs.end()) - r.stop_probs.begin();
    agree += static_cast<std::size_t>(best) == r.stopping_index ? 1 : 0;
  }
  EXPECT_GE(agree, 990);
}
