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

#include "nonuniform/mdp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace nu = nonuniform;

namespace {

nu::Vec random_logits(std::mt19937_64& rng, nu::Index n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  return nu::Vec::NullaryExpr(n, [&] { return normal(rng); });
}

// P_pi and r_pi assembled directly from the definitions.
struct Induced {
  nu::Mat p;
  nu::Vec r;
};

Induced induced(const nu::TabularMdp& m, const nu::Vec& pi) {
  const nu::Index ns = m.states(), na = m.actions();
  Induced out{nu::Mat::Zero(ns, ns), nu::Vec::Zero(ns)};
  for (nu::Index s = 0; s < ns; ++s)
    for (nu::Index a = 0; a < na; ++a) {
      const double w = pi(s * na + a);
      out.r(s) += w * m.rewards()(s * na + a);
      for (nu::Index t = 0; t < ns; ++t) out.p(s, t) += w * m.transitions()(s * na + a, t);
    }
  return out;
}

// Fixed-policy value iteration.
nu::Vec iterate_values(const nu::TabularMdp& m, const nu::Vec& pi) {
  const auto ind = induced(m, pi);
  nu::Vec v = nu::Vec::Zero(m.states());
  for (int k = 0; k < 100000; ++k) {
    const nu::Vec next = ind.r + m.gamma() * ind.p * v;
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < 1e-14) break;
  }
  return v;
}

// (1 - gamma) sum_{t <= T} gamma^t start^T P_pi^t.
nu::Vec series_visitation(const nu::TabularMdp& m, const nu::Vec& pi, const nu::Vec& start) {
  const auto ind = induced(m, pi);
  const long horizon = static_cast<long>(std::ceil(std::log(1e-12) / std::log(m.gamma())));
  Eigen::RowVectorXd row = start.transpose();
  nu::Vec acc = nu::Vec::Zero(m.states());
  double weight = 1.0;
  for (long t = 0; t <= horizon; ++t) {
    acc += weight * row.transpose();
    row = row * ind.p;
    weight *= m.gamma();
  }
  return (1.0 - m.gamma()) * acc;
}

}  // namespace

TEST(TabularMdp, ValidatesInputs) {
  nu::Mat p = nu::Mat::Ones(2, 1);
  EXPECT_NO_THROW(nu::TabularMdp(1, 2, p, nu::make_vec({0.1, 0.2}), 0.5, nu::Vec::Ones(1),
                                 nu::Vec::Ones(1)));
  EXPECT_THROW(nu::TabularMdp(1, 2, p, nu::make_vec({0.1, 0.2}), 1.0, nu::Vec::Ones(1),
                              nu::Vec::Ones(1)),
               nu::ConfigError);
  EXPECT_THROW(nu::TabularMdp(1, 2, 0.5 * p, nu::make_vec({0.1, 0.2}), 0.5, nu::Vec::Ones(1),
                              nu::Vec::Ones(1)),
               nu::ConfigError);
  EXPECT_THROW(nu::TabularMdp(1, 2, p, nu::make_vec({0.1, 2.0}), 0.5, nu::Vec::Ones(1),
                              nu::Vec::Ones(1)),
               nu::ConfigError);
  EXPECT_THROW(nu::TabularMdp(1, 2, p, nu::make_vec({0.1, 0.2}), 0.5, 0.5 * nu::Vec::Ones(1),
                              nu::Vec::Ones(1)),
               nu::ConfigError);
}

TEST(StateValues, MyopicDiscount) {
  const auto m = nu::random_mdp(4, 3, 0.0, 1);
  std::mt19937_64 rng(2);
  const nu::Vec theta = random_logits(rng, 12, 1.0);
  const nu::Vec pi = nu::policy_probs(m, theta);
  const nu::Vec v = nu::state_values(m, theta);
  for (nu::Index s = 0; s < 4; ++s)
    EXPECT_NEAR(v(s), pi.segment(s * 3, 3).dot(m.rewards().segment(s * 3, 3)), 1e-15);
}

TEST(StateValues, GeometricSeries) {
  const nu::TabularMdp m(1, 1, nu::Mat::Ones(1, 1), nu::Vec::Ones(1), 0.9, nu::Vec::Ones(1),
                         nu::Vec::Ones(1));
  EXPECT_NEAR(nu::state_values(m, nu::Vec::Zero(1))(0), 10.0, 1e-12);
}

TEST(StateValues, MatchValueIterationOnRandomMdps) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const auto m = nu::random_mdp(5, 3, 0.9, seed);
    const nu::Vec theta = random_logits(rng, 15, 2.0);
    const nu::Vec v = nu::state_values(m, theta);
    EXPECT_LT((v - iterate_values(m, nu::policy_probs(m, theta))).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(v.minCoeff(), 0.0);
    EXPECT_LE(v.maxCoeff(), 1.0 / (1.0 - 0.9));
  }
}

TEST(QAndAdvantage, MyopicQIsReward) {
  const auto m = nu::random_mdp(3, 4, 0.0, 4);
  const auto qa = nu::q_and_advantage(m, nu::Vec::Zero(12));
  EXPECT_LT((qa.q - m.rewards()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(QAndAdvantage, AdvantageHasZeroPolicyMean) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = nu::random_mdp(6, 3, 0.95, seed);
    const nu::Vec theta = random_logits(rng, 18, 2.0);
    const nu::Vec pi = nu::policy_probs(m, theta);
    const auto qa = nu::q_and_advantage(m, theta);
    for (nu::Index s = 0; s < 6; ++s)
      EXPECT_NEAR(pi.segment(s * 3, 3).dot(qa.advantage.segment(s * 3, 3)), 0.0, 1e-10);
  }
}

TEST(OptimalPolicy, AgreesWithValueIterationAndHasNoPositiveAdvantage) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = nu::random_mdp(6, 3, 0.9, 100 + seed);
    const auto opt = nu::optimal_policy(m);
    EXPECT_LT((opt.v - nu::value_iteration(m)).cwiseAbs().maxCoeff(), 1e-9);
    const nu::Vec pi_star = nu::deterministic_policy(m, opt.actions);
    const nu::Vec adv = nu::PolicyEvaluation(m, pi_star).advantage();
    EXPECT_LE(adv.maxCoeff(), 1e-10);
  }
}

TEST(DiscountedVisitation, MyopicEqualsStart) {
  const auto m = nu::random_mdp(4, 2, 0.0, 6);
  std::mt19937_64 rng(7);
  const nu::Vec d = nu::discounted_visitation(m, random_logits(rng, 8, 1.0), m.rho());
  EXPECT_LT((d - m.rho()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DiscountedVisitation, AbsorbingSingleState) {
  const nu::TabularMdp m(1, 2, nu::Mat::Ones(2, 1), nu::make_vec({0.3, 0.6}), 0.99,
                         nu::Vec::Ones(1), nu::Vec::Ones(1));
  EXPECT_NEAR(nu::discounted_visitation(m, nu::Vec::Zero(2), m.mu())(0), 1.0, 1e-12);
}

TEST(DiscountedVisitation, MatchesTruncatedSeries) {
  std::mt19937_64 rng(8);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = nu::random_mdp(5, 3, 0.9, 200 + seed);
    const nu::Vec theta = random_logits(rng, 15, 2.0);
    const nu::Vec d = nu::discounted_visitation(m, theta, m.mu());
    EXPECT_NEAR(d.sum(), 1.0, 1e-10);
    EXPECT_LT((d - series_visitation(m, nu::policy_probs(m, theta), m.mu())).cwiseAbs().maxCoeff(),
              1e-8);
    for (nu::Index s = 0; s < 5; ++s) EXPECT_GE(d(s), (1.0 - 0.9) * m.mu()(s) * (1.0 - 1e-12));
  }
}

TEST(PolicyGradient, RowsSumToZeroAndMatchFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = nu::random_mdp(4, 3, 0.9, 300 + seed);
    const nu::MdpObjective obj(m);
    const nu::Vec theta = random_logits(rng, 12, 1.5);
    const nu::Vec g = nu::policy_gradient(m, theta, m.mu());
    for (nu::Index s = 0; s < 4; ++s) EXPECT_NEAR(g.segment(s * 3, 3).sum(), 0.0, 1e-10);
    const nu::Vec fd = nu::finite_diff_gradient(obj, theta);
    EXPECT_LT((g - fd).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + nu::inf_norm(g)));
  }
}

TEST(PolicyGradient, VanishesNearDeterministicOptimum) {
  const auto m = nu::random_mdp(4, 3, 0.9, 42);
  const auto opt = nu::optimal_policy(m);
  nu::Vec theta = nu::Vec::Zero(12);
  for (nu::Index s = 0; s < 4; ++s) theta(s * 3 + opt.actions[s]) = 40.0;
  EXPECT_LT(nu::policy_gradient(m, theta, m.mu()).norm(), 1e-12);
}

TEST(PolicyGradient, OneStateReducesToBandit) {
  const nu::BanditInstance inst(nu::make_vec({1.0, 0.8, 0.1}));
  const auto m = nu::bandit_as_mdp(inst);
  std::mt19937_64 rng(10);
  for (int i = 0; i < 100; ++i) {
    const nu::Vec theta = random_logits(rng, 3, 2.0);
    const nu::Vec a = nu::policy_gradient(m, theta, m.mu());
    const nu::Vec b = nu::bandit_policy_gradient(inst, theta);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(a(k), b(k));
  }
}

TEST(GnpgRun, OneStateTrajectoryIsBitIdenticalToBandit) {
  const nu::BanditInstance inst(nu::make_vec({1.0, 0.8, 0.1}));
  const auto m = nu::bandit_as_mdp(inst);
  const auto opt = nu::optimal_policy(m);
  nu::PolicyRunOptions opts;
  opts.iters = 300;
  opts.keep_thetas = true;
  const nu::Vec theta1 = nu::bandit_plateau_init(inst);
  const auto a = nu::bandit_policy_run(inst, theta1, opts);
  const auto b = nu::mdp_policy_run(m, opt, theta1, opts);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].value, b.records[i].value);
    EXPECT_EQ(a.records[i].delta, b.records[i].delta);
    EXPECT_EQ(a.records[i].grad_norm, b.records[i].grad_norm);
    for (int k = 0; k < 3; ++k) EXPECT_EQ(a.thetas[i](k), b.thetas[i](k));
  }
}

TEST(GnpgRun, AscentAndTheoryBoundOnRandomMdp) {
  const auto m = nu::random_mdp(4, 3, 0.8, 77);
  const auto opt = nu::optimal_policy(m);
  const double eta = nu::gnpg_default_step(m);
  nu::PolicyRunOptions opts;
  opts.eta = eta;
  opts.iters = 3000;
  opts.keep_thetas = true;
  const auto run = nu::mdp_policy_run(m, opt, nu::Vec::Zero(12), opts);
  double prev = -1.0;
  for (const auto& th : run.thetas) {
    const double v = nu::evaluate(m, th).value(m.mu());
    EXPECT_GE(v, prev - 1e-13);
    prev = v;
  }
  const auto rc = nu::rate_constants(m, opt);
  const double c = run.min_pi_star();
  const double rate = nu::gnpg_rate(m.gamma(), c, rc.c_inf, m.states(), rc.d_star_ratio);
  const double gap1 = m.mu().dot(opt.v) - nu::evaluate(m, run.thetas.front()).value(m.mu());
  for (const auto& rec : run.records)
    EXPECT_LE(rec.delta, nu::gnpg_bound(gap1, rc.c_inf_prime, m.gamma(), rate, rec.t) + 1e-12);
}

TEST(PerformanceDifference, IdenticalPoliciesGiveZero) {
  const auto m = nu::random_mdp(5, 2, 0.9, 11);
  const nu::Vec theta = nu::Vec::LinSpaced(10, -1.0, 1.0);
  const auto sides = nu::performance_difference(m, theta, theta, m.rho());
  EXPECT_NEAR(sides.lhs, 0.0, 1e-15);
  EXPECT_NEAR(sides.rhs, 0.0, 1e-12);
}

TEST(PerformanceDifference, RandomPairsAndOptimalComparator) {
  std::mt19937_64 rng(12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = nu::random_mdp(5, 3, 0.9, 400 + seed);
    const nu::Vec t1 = random_logits(rng, 15, 2.0);
    const nu::Vec t2 = random_logits(rng, 15, 2.0);
    const auto pd = nu::performance_difference(m, t1, t2, m.rho());
    EXPECT_NEAR(pd.lhs, pd.rhs, 1e-8);
    const auto opt = nu::optimal_policy(m);
    const auto vs = nu::value_suboptimality(m, opt, t1, m.rho());
    EXPECT_NEAR(vs.lhs, vs.rhs, 1e-8);
    EXPECT_GE(vs.lhs, -1e-12);
  }
}

TEST(CInfinity, ExactSitsBetweenSampleAndBound) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = nu::random_mdp(4, 2, 0.9, 500 + seed);
    const double exact = nu::c_infinity_exact(m, m.mu());
    const double sampled = nu::c_infinity_sampled(m, 50, seed);
    EXPECT_GE(exact, sampled * (1.0 - 1e-10));
    // All 2^4 deterministic policies were enumerated, so the maximum is attained.
    EXPECT_NEAR(exact, sampled, 1e-10 * exact);
    EXPECT_LE(exact, nu::c_infinity_bound(m) * (1.0 + 1e-12));
  }
}

TEST(TreeMdp, StateCounts) {
  EXPECT_EQ(nu::tree_mdp(4, 4, 0.99, nu::TreeRewards::uniform, 1).states(), 85);
  EXPECT_EQ(nu::tree_mdp(5, 4, 0.99, nu::TreeRewards::uniform, 1).states(), 341);
  EXPECT_EQ(nu::tree_mdp(1, 3, 0.99, nu::TreeRewards::uniform, 1).states(), 1);
  EXPECT_THROW(nu::tree_state_count(0, 2), nu::ConfigError);
  EXPECT_THROW(nu::tree_state_count(30, 4), nu::ConfigError);
}

TEST(TreeMdp, StructureAndUniqueOptimalActions) {
  nu::TreeMdpInfo info;
  const auto m = nu::tree_mdp(3, 2, 0.9, nu::TreeRewards::leaf_only, 9, &info);
  ASSERT_EQ(m.states(), 7);
  // Root moves to nodes 1 and 2; nodes 3..6 are leaves.
  EXPECT_EQ(m.transitions()(m.index(0, 0), 1), 1.0);
  EXPECT_EQ(m.transitions()(m.index(0, 1), 2), 1.0);
  EXPECT_EQ(m.transitions()(m.index(2, 1), 6), 1.0);
  EXPECT_EQ(m.transitions()(m.index(5, 0), 5), 1.0);
  for (nu::Index s = 0; s < 3; ++s) EXPECT_EQ(m.rewards().segment(s * 2, 2).sum(), 0.0);
  EXPECT_GE(nu::optimal_policy(m).min_gap, 1e-9);
  EXPECT_EQ(m.mu()(0), 1.0);
}

TEST(TreeMdp, SeededAndDeterministic) {
  const auto a = nu::tree_mdp(3, 3, 0.99, nu::TreeRewards::uniform, 5);
  const auto b = nu::tree_mdp(3, 3, 0.99, nu::TreeRewards::uniform, 5);
  EXPECT_EQ(a.rewards(), b.rewards());
}

TEST(Lemmas, GeneralLojasiewiczSampled) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const auto m = nu::random_mdp(4, 3, 0.9, 600 + i);
    const auto opt = nu::optimal_policy(m);
    const nu::Vec theta = random_logits(rng, 12, 2.0);
    const auto ev = nu::evaluate(m, theta);
    const double lhs = nu::plain_norm(ev.gradient(m.mu()));
    const double gap = m.rho().dot(opt.v) - ev.value(m.rho());
    const double coef = nu::mdp_nl_coefficient(m, opt, ev, m.mu(), m.rho());
    EXPECT_GE(lhs, coef * gap * (1.0 - 1e-9));
  }
}

TEST(Lemmas, GeneralSmoothnessSampled) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 30; ++i) {
    const auto m = nu::random_mdp(3, 2, 0.8, 700 + i);
    const nu::MdpObjective obj(m);
    const double factor = nu::mdp_ns_factor(m.gamma(), nu::c_infinity_exact(m, m.mu()), 3);
    const nu::Vec theta = random_logits(rng, 6, 1.0);
    const double g = obj.gradient(theta).norm();
    for (int k = 0; k < 5; ++k) {
      nu::Vec y = random_logits(rng, 6, 1.0);
      y /= y.norm();
      const double quad = std::abs(y.dot(nu::hessian_vector_product(obj, theta, y)));
      EXPECT_LE(quad, factor * g * (1.0 + 1e-6) + 1e-8);
    }
  }
}
