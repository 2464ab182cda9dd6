// Copyright 2026 The nonuniform-opt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nonuniform/bandit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace nu = nonuniform;

namespace {

const nu::BanditInstance& fig_instance() {
  static const nu::BanditInstance inst(nu::make_vec({1.0, 0.8, 0.1}));
  return inst;
}

nu::Vec random_logits(std::mt19937_64& rng, nu::Index k, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  return nu::Vec::NullaryExpr(k, [&] { return normal(rng); });
}

}  // namespace

TEST(BanditInstance, RejectsTiesAndOutOfRangeRewards) {
  EXPECT_THROW(nu::BanditInstance(nu::make_vec({0.5, 0.5})), nu::ConfigError);
  EXPECT_THROW(nu::BanditInstance(nu::make_vec({1.2, 0.5})), nu::ConfigError);
  EXPECT_THROW(nu::BanditInstance(nu::Vec()), nu::ConfigError);
  const nu::BanditInstance inst(nu::make_vec({0.2, 0.9, 0.4}));
  EXPECT_EQ(inst.best_arm(), 1);
  EXPECT_NEAR(inst.gap(), 0.5, 1e-15);
}

TEST(ExpectedReward, UniformPolicyAveragesRewards) {
  EXPECT_NEAR(nu::expected_reward(fig_instance(), nu::Vec::Zero(3)), 1.9 / 3.0, 1e-15);
}

TEST(ExpectedReward, ConcentratedPolicyAndSingleArm) {
  EXPECT_NEAR(nu::expected_reward(fig_instance(), nu::make_vec({60.0, 0.0, 0.0})), 1.0, 1e-15);
  const nu::BanditInstance one(nu::make_vec({0.37}));
  EXPECT_DOUBLE_EQ(nu::expected_reward(one, nu::make_vec({-4.0})), 0.37);
  EXPECT_THROW(nu::expected_reward(fig_instance(), nu::Vec::Zero(2)), nu::ArgumentError);
}

TEST(BanditPolicyGradient, UniformPolicyValues) {
  const nu::Vec g = nu::bandit_policy_gradient(fig_instance(), nu::Vec::Zero(3));
  const double mean = 1.9 / 3.0;
  EXPECT_NEAR(g(0), (1.0 - mean) / 3.0, 1e-15);
  EXPECT_NEAR(g(1), (0.8 - mean) / 3.0, 1e-15);
  EXPECT_NEAR(g(2), (0.1 - mean) / 3.0, 1e-15);
  EXPECT_NEAR(g(0), 0.122222, 1e-6);
  EXPECT_NEAR(g(1), 0.055556, 1e-6);
  EXPECT_NEAR(g(2), -0.177778, 1e-6);
  const double oracle = std::sqrt(std::pow(1.0 - mean, 2) + std::pow(0.8 - mean, 2) +
                                  std::pow(0.1 - mean, 2)) / 3.0;
  EXPECT_NEAR(g.norm(), oracle, 1e-15);
  // Six-figure value as usually quoted.
  EXPECT_NEAR(g.norm(), 0.222777, 1e-6);
}

TEST(BanditPolicyGradient, SumsToZeroAndMatchesFiniteDifferences) {
  std::mt19937_64 rng(51);
  const nu::BanditObjective obj(fig_instance());
  for (int i = 0; i < 200; ++i) {
    const nu::Vec theta = random_logits(rng, 3, 2.0);
    const nu::Vec g = nu::bandit_policy_gradient(fig_instance(), theta);
    EXPECT_NEAR(g.sum(), 0.0, 1e-12);
    EXPECT_LT((g - nu::finite_diff_gradient(obj, theta)).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(BanditPolicyGradient, VanishesAtVertices) {
  const nu::Vec g = nu::bandit_policy_gradient(fig_instance(), nu::make_vec({800.0, 0.0, 0.0}));
  EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(NlLowerBound, UniformPolicy) {
  const double bound = nu::nl_lower_bound(fig_instance(), nu::Vec::Zero(3));
  EXPECT_NEAR(bound, (1.0 / 3.0) * (1.0 - 1.9 / 3.0), 1e-15);
  EXPECT_NEAR(bound, 0.122222, 1e-6);
  EXPECT_GE(nu::bandit_policy_gradient(fig_instance(), nu::Vec::Zero(3)).norm(), bound);
  EXPECT_EQ(nu::nl_lower_bound(fig_instance(), nu::make_vec({800.0, 0.0, 0.0})), 0.0);
}

TEST(NlLowerBound, HoldsAtSampledLogits) {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    nu::Vec r = nu::Vec::NullaryExpr(5, [&] { return unif(rng); });
    const nu::BanditInstance inst(r);
    const nu::Vec theta = random_logits(rng, 5, 3.0);
    const double lhs = nu::bandit_policy_gradient(inst, theta).norm();
    EXPECT_GE(lhs, nu::nl_lower_bound(inst, theta) * (1.0 - 1e-9));
  }
}

TEST(BanditNs, CoefficientAtUniform) {
  const double beta = nu::bandit_ns_coefficient(fig_instance(), nu::Vec::Zero(3));
  EXPECT_NEAR(beta, 3.0 * nu::bandit_policy_gradient(fig_instance(), nu::Vec::Zero(3)).norm(), 1e-15);
  EXPECT_NEAR(beta, 0.668331, 1e-6);
  EXPECT_EQ(nu::bandit_ns_coefficient(fig_instance(), nu::make_vec({0.0, 900.0, 0.0})), 0.0);
}

TEST(BanditNs, BoundsHessianSpectralRadius) {
  std::mt19937_64 rng(57);
  const nu::BanditObjective obj(fig_instance());
  for (int i = 0; i < 200; ++i) {
    const nu::Vec theta = random_logits(rng, 3, 2.0);
    const double rho = nu::spectral_radius(obj, theta);
    EXPECT_LE(rho, nu::bandit_ns_coefficient(fig_instance(), theta) * (1.0 + 1e-6) + 1e-10);
  }
}

TEST(BanditGnpg, OneStepProgressFromUniform) {
  const auto run = nu::bandit_gnpg_run(fig_instance(), nu::Vec::Zero(3), 1.0 / 6.0, 2);
  ASSERT_EQ(run.records.size(), 2u);
  const double gain = run.records[1].value - run.records[0].value;
  EXPECT_GE(gain, 0.222776 / 12.0);
}

TEST(BanditGnpg, RateBoundAndMonotonicity) {
  const nu::Vec theta1 = nu::bandit_plateau_init(fig_instance());
  const nu::Vec pi1 = nu::softmax(theta1);
  EXPECT_NEAR(pi1(0), 0.02, 1e-15);
  EXPECT_NEAR(pi1(1), 0.96, 1e-15);
  const auto run = nu::bandit_gnpg_run(fig_instance(), theta1, 1.0 / 6.0, 400);
  const double c = run.min_pi_star();
  EXPECT_GT(c, 0.0);
  const double delta1 = run.records.front().delta;
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    const auto& rec = run.records[i];
    EXPECT_LE(rec.delta, nu::bandit_rate_bound(delta1, c, rec.t) * (1.0 + 1e-12)) << rec.t;
    if (i > 0) {
      EXPECT_GE(rec.value - run.records[i - 1].value, run.records[i - 1].grad_norm / 12.0 - 1e-12);
    }
  }
}

TEST(BanditGnpg, OptimalArmProbabilityNonDecreasingFromFavourableStart) {
  // pi_1(a*) is the largest entry.
  const auto run = nu::bandit_gnpg_run(fig_instance(), nu::make_vec({1.0, 0.5, 0.0}), 1.0 / 6.0, 300);
  for (std::size_t i = 1; i < run.records.size(); ++i)
    EXPECT_GE(run.records[i].min_pi_star, run.records[i - 1].min_pi_star);
}

TEST(BanditGnpg, SegmentGradientBound) {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> zeta(0.0, 1.0);
  const auto run = nu::bandit_gnpg_run(fig_instance(), nu::bandit_plateau_init(fig_instance()),
                                       1.0 / 6.0, 200);
  for (std::size_t i = 0; i + 1 < run.thetas.size(); ++i) {
    const double g = nu::bandit_policy_gradient(fig_instance(), run.thetas[i]).norm();
    for (int k = 0; k < 20; ++k) {
      const double z = zeta(rng);
      const nu::Vec mid = run.thetas[i] + z * (run.thetas[i + 1] - run.thetas[i]);
      EXPECT_LE(nu::bandit_policy_gradient(fig_instance(), mid).norm(), 2.0 * g * (1.0 + 1e-9));
    }
  }
}

TEST(BanditGnpg, RejectsStepOutsideRange) {
  EXPECT_THROW(nu::bandit_gnpg_run(fig_instance(), nu::Vec::Zero(3), 0.34, 10), nu::ConfigError);
  EXPECT_THROW(nu::bandit_gnpg_run(fig_instance(), nu::Vec::Zero(3), 0.0, 10), nu::ConfigError);
}

TEST(BanditGnpg, StopsCleanlyAtStationaryPoint) {
  const auto run = nu::bandit_gnpg_run(fig_instance(), nu::make_vec({900.0, 0.0, 0.0}), 0.1, 50);
  EXPECT_EQ(run.stop, nu::PolicyStop::converged);
  EXPECT_EQ(run.records.size(), 1u);
}

TEST(BanditPg, PlateauSlowsStandardPolicyGradient) {
  const nu::Vec theta1 = nu::bandit_plateau_init(fig_instance());
  nu::PolicyRunOptions gn;
  gn.iters = 100000;
  gn.stop_delta = 1e-6;
  const auto fast = nu::bandit_policy_run(fig_instance(), theta1, gn);
  nu::PolicyRunOptions pg = gn;
  pg.normalized = false;
  pg.eta = 0.4;
  pg.record_stride = 1000;
  const auto slow = nu::bandit_policy_run(fig_instance(), theta1, pg);
  ASSERT_TRUE(fast.first_below(1e-6).has_value());
  EXPECT_LT(*fast.first_below(1e-6), 200);
  EXPECT_FALSE(slow.first_below(1e-6).has_value());
}
