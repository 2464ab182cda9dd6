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

#ifndef NONUNIFORM_VERIFY_HPP
#define NONUNIFORM_VERIFY_HPP

#include "nonuniform/analysis.hpp"
#include "nonuniform/bandit.hpp"
#include "nonuniform/core.hpp"
#include "nonuniform/glm.hpp"
#include "nonuniform/mdp.hpp"
#include "nonuniform/objectives.hpp"
#include "nonuniform/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace nonuniform {

/// Sampled checks of the gradient, smoothness and Lojasiewicz inequalities.
/// Every suite is deterministic in `seed`.
namespace verify {

using Reports = std::vector<CheckReport>;

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"all", "core", "objectives", "bandit", "mdp", "glm", "lemmas"};
  return names;
}

namespace detail {

inline Vec gaussian(std::mt19937_64& rng, Index n, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  return Vec::NullaryExpr(n, [&] { return normal(rng); });
}

inline BanditInstance random_bandit(std::mt19937_64& rng, Index k) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (;;) {
    Vec r = Vec::NullaryExpr(k, [&] { return unif(rng); });
    std::vector<double> sorted = to_std(r);
    std::sort(sorted.begin(), sorted.end());
    if (k == 1 || sorted[k - 1] - sorted[k - 2] > 1e-6) return BanditInstance(r);
  }
}

inline std::uint64_t draw_seed(std::mt19937_64& rng) { return rng(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// core
// ---------------------------------------------------------------------------

inline Reports core_suite(std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  Reports out;
  CheckReport grad;
  grad.name = "gradient_oracle";
  const char* ids[] = {"power:p=4", "power:p=1.5", "power:p=3", "huber", "sigmoid-quartic", "softmax-kl",
                       "softmax-mse"};
  for (const char* id : ids) {
    const auto f = make_objective(id);
    for (int i = 0; i < 50; ++i) {
      Vec theta = detail::gaussian(rng, f->dim(), 2.0);
      if (f->dim() == 1 && std::abs(theta(0)) < 1e-3) theta(0) = 0.5;
      const Vec g = f->gradient(theta);
      const double err = (g - finite_diff_gradient(*f, theta)).cwiseAbs().maxCoeff();
      grad.expect_le(err, 1e-5 * (1.0 + inf_norm(g)), theta, id);
    }
  }
  {
    const auto ds = GlmDataset::generate(10, 2, detail::draw_seed(rng), true);
    const GlmObjective glm(ds);
    const BanditObjective bandit(BanditInstance(make_vec({1.0, 0.8, 0.1})));
    const MdpObjective mdp(random_mdp(4, 3, 0.9, detail::draw_seed(rng)));
    const Objective* objs[] = {&glm, &bandit, &mdp};
    for (const Objective* f : objs) {
      for (int i = 0; i < 50; ++i) {
        const Vec theta = detail::gaussian(rng, f->dim(), 1.5);
        const Vec g = f->gradient(theta);
        const double err = (g - finite_diff_gradient(*f, theta)).cwiseAbs().maxCoeff();
        grad.expect_le(err, 1e-5 * (1.0 + inf_norm(g)), theta, f->name());
      }
    }
  }
  out.push_back(grad);

  CheckReport seeds;
  seeds.name = "spectral_radius_seed_invariance";
  for (const char* id : {"softmax-mse", "softmax-kl", "power:p=4"}) {
    const auto f = make_objective(id);
    for (int i = 0; i < 20; ++i) {
      const Vec theta = detail::gaussian(rng, f->dim(), 1.0);
      PowerIterationOptions a, b;
      a.iters = b.iters = 2000;
      a.seed = detail::draw_seed(rng);
      b.seed = detail::draw_seed(rng);
      const double ra = spectral_radius(*f, theta, a);
      const double rb = spectral_radius(*f, theta, b);
      seeds.expect_le(std::abs(ra - rb), 1e-6 * (1.0 + ra), theta, id);
    }
  }
  out.push_back(seeds);

  CheckReport sym;
  sym.name = "hvp_symmetry";
  for (const char* id : {"softmax-mse", "softmax-kl"}) {
    const auto f = make_objective(id);
    for (int i = 0; i < 50; ++i) {
      const Vec theta = detail::gaussian(rng, 3, 1.5);
      const Vec v = detail::gaussian(rng, 3, 1.0);
      const Vec w = detail::gaussian(rng, 3, 1.0);
      const double vhw = v.dot(hessian_vector_product(*f, theta, w));
      const double whv = w.dot(hessian_vector_product(*f, theta, v));
      sym.expect_le(std::abs(vhw - whv), 1e-6 * (1.0 + std::abs(vhw)), theta, id);
    }
  }
  out.push_back(sym);
  return out;
}

// ---------------------------------------------------------------------------
// objectives
// ---------------------------------------------------------------------------

inline Reports objectives_suite(std::uint64_t seed = 2) {
  std::mt19937_64 rng(seed);
  Reports out;

  CheckReport power;
  power.name = "power_nl_equality";
  std::uniform_real_distribution<double> wide(-10.0, 10.0);
  for (double p : {1.5, 2.0, 3.0, 4.0}) {
    const PowerObjective f(p);
    for (int i = 0; i < 250; ++i) {
      const Vec x = make_vec({wide(rng)});
      const double lhs = std::abs(f.gradient(x)(0));
      const double rhs = p * std::pow(f.value(x), 1.0 - 1.0 / p);
      power.expect_le(std::abs(lhs - rhs), 1e-12 * lhs, x, f.name());
    }
  }
  out.push_back(power);

  CheckReport softmax_nl;
  softmax_nl.name = "softmax_nl";
  for (const char* id : {"softmax-kl", "softmax-mse"}) {
    const auto f = make_objective(id);
    for (int i = 0; i < 1000; ++i) {
      const Vec theta = detail::gaussian(rng, 3, 3.0);
      const auto nl = *f->nl_data(theta);
      softmax_nl.expect_ge(f->gradient(theta).norm(),
                           nl.coefficient * std::pow(f->value(theta), 1.0 - nl.degree) * (1.0 - kInequalitySlack),
                           theta, id);
    }
  }
  out.push_back(softmax_nl);

  CheckReport sq;
  sq.name = "sigmoid_quartic_nl";
  const SigmoidQuarticObjective sqo;
  std::uniform_real_distribution<double> tail(0.85, 9.0);
  for (int i = 0; i < 1000; ++i) {
    const double theta = (i % 2 ? -1.0 : 1.0) * tail(rng);
    const double pi = sigmoid(theta);
    if (std::abs(pi - 0.5) <= 0.2) continue;
    const Vec x = make_vec({theta});
    const double g = std::abs(sqo.gradient(x)(0));
    sq.expect_ge(g, 100.0 * pi * (1.0 - pi) / std::pow(50.0, 0.75) * std::pow(sqo.value(x), 0.75) *
                        (1.0 - kInequalitySlack),
                 x, "quartic branch");
  }
  out.push_back(sq);

  CheckReport mse;
  mse.name = "softmax_mse_hessian";
  const Vec y = make_vec({0.5, 0.25, 0.25});
  const Vec eig = symmetric_eigenvalues(softmax_mse_hessian(y, y.array().log().matrix()));
  const Vec expected = make_vec({0.0, 1.0 / 16.0, 9.0 / 64.0});
  for (Index k = 0; k < 3; ++k) mse.expect_le(std::abs(eig(k) - expected(k)), 1e-10, eig, "eigenvalue");
  const SoftmaxMSEObjective msef(make_vec({0.2, 0.3, 0.5}));
  for (int i = 0; i < 50; ++i) {
    const Vec theta = detail::gaussian(rng, 3, 1.5);
    const double err = (softmax_mse_hessian(msef.target(), theta) - 0.5 * finite_diff_hessian(msef, theta))
                           .cwiseAbs()
                           .maxCoeff();
    mse.expect_le(err, 1e-5, theta, "finite-difference agreement");
  }
  out.push_back(mse);
  return out;
}

// ---------------------------------------------------------------------------
// bandit
// ---------------------------------------------------------------------------

inline Reports bandit_suite(std::uint64_t seed = 3) {
  std::mt19937_64 rng(seed);
  Reports out;

  CheckReport nl;
  nl.name = "lemma3_bandit_nl";
  CheckReport ns;
  ns.name = "lemma4_bandit_ns";
  for (int i = 0; i < 1000; ++i) {
    const auto inst = detail::random_bandit(rng, 2 + i % 5);
    const Vec theta = detail::gaussian(rng, inst.arms(), 2.5);
    nl.expect_ge(plain_norm(bandit_policy_gradient(inst, theta)),
                 nl_lower_bound(inst, theta) * (1.0 - kInequalitySlack), theta);
    const BanditObjective obj(inst);
    const Vec v = random_unit_vector(inst.arms(), rng);
    const double quad = std::abs(v.dot(hessian_vector_product(obj, theta, v)));
    ns.expect_le(quad, bandit_ns_coefficient(inst, theta) * (1.0 + 1e-6) + 1e-10, theta);
  }
  out.push_back(nl);
  out.push_back(ns);

  CheckReport seg;
  seg.name = "lemma5_segment_bound";
  CheckReport mono;
  mono.name = "gnpg_bandit_monotone_progress";
  CheckReport rate;
  rate.name = "gnpg_bandit_rate_bound";
  CheckReport inf;
  inf.name = "lemma6_pi_star_non_vanishing";
  std::uniform_real_distribution<double> zeta(0.0, 1.0);
  for (int run_id = 0; run_id < 10; ++run_id) {
    const auto inst = run_id == 0 ? BanditInstance(make_vec({1.0, 0.8, 0.1})) : detail::random_bandit(rng, 3 + run_id % 3);
    const Vec theta1 = run_id == 0 ? bandit_plateau_init(inst) : detail::gaussian(rng, inst.arms(), 2.0);
    const auto run = bandit_gnpg_run(inst, theta1, 1.0 / 6.0, 1000);
    const double c = run.min_pi_star();
    const double delta1 = run.records.front().delta;
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const auto& rec = run.records[i];
      rate.expect_le(rec.delta, bandit_rate_bound(delta1, c, rec.t) * (1.0 + 1e-12) + 1e-15, run.thetas[i]);
      if (i + 1 < run.records.size()) {
        mono.expect_ge(run.records[i + 1].value - rec.value, rec.grad_norm / 12.0 - 1e-12, run.thetas[i]);
        const double g = plain_norm(bandit_policy_gradient(inst, run.thetas[i]));
        for (int k = 0; k < 20; ++k) {
          const Vec mid = run.thetas[i] + zeta(rng) * (run.thetas[i + 1] - run.thetas[i]);
          seg.expect_le(plain_norm(bandit_policy_gradient(inst, mid)), 2.0 * g * (1.0 + kInequalitySlack), mid);
        }
      }
    }
    inf.expect_ge(c, std::numeric_limits<double>::min(), run.final_theta, "positive");
  }
  out.push_back(seg);
  out.push_back(mono);
  out.push_back(rate);
  out.push_back(inf);
  return out;
}

// ---------------------------------------------------------------------------
// mdp
// ---------------------------------------------------------------------------

inline Reports mdp_suite(std::uint64_t seed = 4) {
  std::mt19937_64 rng(seed);
  Reports out;

  CheckReport nl;
  nl.name = "lemma8_general_nl";
  CheckReport pdl;
  pdl.name = "performance_difference";
  CheckReport vsub;
  vsub.name = "value_suboptimality";
  CheckReport vis;
  vis.name = "visitation_lower_bound";
  for (int i = 0; i < 1000; ++i) {
    const Index ns = 2 + i % 4;
    const Index na = 2 + i % 3;
    const double gamma = i % 2 ? 0.9 : 0.7;
    const auto mdp = random_mdp(ns, na, gamma, detail::draw_seed(rng));
    const auto opt = optimal_policy(mdp);
    const Vec theta = detail::gaussian(rng, ns * na, 2.0);
    const auto ev = evaluate(mdp, theta);
    const double gap = plain_dot(mdp.rho(), opt.v) - ev.value(mdp.rho());
    nl.expect_ge(plain_norm(ev.gradient(mdp.mu())),
                 mdp_nl_coefficient(mdp, opt, ev, mdp.mu(), mdp.rho()) * gap * (1.0 - kInequalitySlack), theta);
    const Vec theta2 = detail::gaussian(rng, ns * na, 2.0);
    const auto pd = performance_difference(mdp, theta, theta2, mdp.rho());
    pdl.expect_le(std::abs(pd.lhs - pd.rhs), 1e-8, theta);
    const auto vs = value_suboptimality(mdp, opt, theta, mdp.rho());
    vsub.expect_le(std::abs(vs.lhs - vs.rhs), 1e-8, theta);
    const Vec d = ev.visitation(mdp.mu());
    for (Index s = 0; s < ns; ++s)
      vis.expect_ge(d(s), (1.0 - gamma) * mdp.mu()(s) * (1.0 - 1e-12), theta);
  }
  out.push_back(nl);
  out.push_back(pdl);
  out.push_back(vsub);
  out.push_back(vis);

  CheckReport ns_rep;
  ns_rep.name = "lemma9_general_ns";
  for (int i = 0; i < 200; ++i) {
    const Index ns = 2 + i % 3;
    const auto mdp = random_mdp(ns, 2, 0.8, detail::draw_seed(rng));
    const MdpObjective obj(mdp);
    const double factor = mdp_ns_factor(mdp.gamma(), c_infinity_exact(mdp, mdp.mu()), ns);
    const Vec theta = detail::gaussian(rng, ns * 2, 1.0);
    const double g = plain_norm(obj.gradient(theta));
    for (int k = 0; k < 5; ++k) {
      const Vec y = random_unit_vector(ns * 2, rng);
      const double quad = std::abs(y.dot(hessian_vector_product(obj, theta, y)));
      ns_rep.expect_le(quad, factor * g * (1.0 + 1e-6) + 1e-7, theta);
    }
  }
  out.push_back(ns_rep);

  CheckReport seg;
  seg.name = "lemma10_segment_bound";
  CheckReport ascent;
  ascent.name = "gnpg_ascent";
  CheckReport low;
  low.name = "lemma11_non_vanishing";
  CheckReport rate;
  rate.name = "theorem_rate_bound";
  std::uniform_real_distribution<double> zeta(0.0, 1.0);
  for (int r = 0; r < 6; ++r) {
    const auto mdp = random_mdp(3 + r % 2, 2, 0.8, detail::draw_seed(rng));
    const auto opt = optimal_policy(mdp);
    PolicyRunOptions po;
    po.eta = gnpg_default_step(mdp);
    po.iters = 200;
    po.keep_thetas = true;
    const auto run = mdp_policy_run(mdp, opt, detail::gaussian(rng, mdp.states() * 2, 1.0), po);
    const auto rc = rate_constants(mdp, opt);
    const double c = run.min_pi_star();
    const double crate = gnpg_rate(mdp.gamma(), c, rc.c_inf, mdp.states(), rc.d_star_ratio);
    const double gap1_mu = plain_dot(mdp.mu(), opt.v) - evaluate(mdp, run.thetas.front()).value(mdp.mu());
    double prev_mu = -kInf;
    for (std::size_t i = 0; i < run.thetas.size(); ++i) {
      const auto& th = run.thetas[i];
      const auto ev = evaluate(mdp, th);
      const double v_mu = ev.value(mdp.mu());
      ascent.expect_ge(v_mu, prev_mu - 1e-13, th);
      prev_mu = v_mu;
      rate.expect_le(run.records[i].delta,
                     gnpg_bound(gap1_mu, rc.c_inf_prime, mdp.gamma(), crate, run.records[i].t) + 1e-12, th);
      if (i + 1 < run.thetas.size()) {
        const double g = plain_norm(ev.gradient(mdp.mu()));
        for (int k = 0; k < 20; ++k) {
          const Vec mid = th + zeta(rng) * (run.thetas[i + 1] - th);
          seg.expect_le(plain_norm(policy_gradient(mdp, mid, mdp.mu())), 2.0 * g * (1.0 + kInequalitySlack), mid);
        }
      }
    }
    low.expect_ge(c, std::numeric_limits<double>::min(), run.final_theta, "positive");
  }
  out.push_back(seg);
  out.push_back(ascent);
  out.push_back(low);
  out.push_back(rate);
  return out;
}

// ---------------------------------------------------------------------------
// glm
// ---------------------------------------------------------------------------

inline Reports glm_suite(std::uint64_t seed = 5) {
  std::mt19937_64 rng(seed);
  Reports out;
  CheckReport nl;
  nl.name = "lemma12_glm_nl";
  CheckReport ns;
  ns.name = "lemma13_glm_ns";
  CheckReport unif;
  unif.name = "glm_uniform_smoothness";
  for (int i = 0; i < 1000; ++i) {
    const auto ds = GlmDataset::generate(5 + i % 8, 1 + i % 3, detail::draw_seed(rng), i % 2 == 0);
    const Vec theta = detail::gaussian(rng, ds.dim(), 2.0);
    const auto lg = glm_loss_grad(ds, theta);
    nl.expect_ge(lg.grad.norm(), glm_nl_coefficient(ds, theta) * std::sqrt(lg.loss) * (1.0 - kInequalitySlack),
                 theta);
    const double rho = symmetric_spectral_radius(glm_hessian(ds, theta));
    const auto sm = glm_smoothness(ds, theta);
    if (std::isfinite(sm.beta_ns)) ns.expect_le(rho, sm.beta_ns * (1.0 + kInequalitySlack), theta, "ns form");
    ns.expect_le(rho, sm.beta * (1.0 + kInequalitySlack), theta, "capped");
    unif.expect_le(rho, ds.beta_uniform() * (1.0 + kInequalitySlack), theta);
  }
  out.push_back(nl);
  out.push_back(ns);
  out.push_back(unif);
  return out;
}

// ---------------------------------------------------------------------------
// lemmas: scalar auxiliary inequalities and descent lemmas
// ---------------------------------------------------------------------------

inline Reports scalar_lemmas_suite(std::uint64_t seed = 6) {
  std::mt19937_64 rng(seed);
  Reports out;
  CheckReport aux1;
  aux1.name = "auxiliary_lemma1";
  CheckReport aux2;
  aux2.name = "auxiliary_lemma2";
  for (int ai = 1; ai <= 50; ++ai) {
    const double alpha = 0.1 * ai;
    for (int k = 0; k <= 1000; ++k) {
      const double x = k / 1000.0;
      const double lhs = (1.0 - std::pow(x, alpha)) / alpha;
      const double rhs = std::pow(x, alpha) * (1.0 - x);
      aux1.expect_ge(lhs, rhs - 1e-12, make_vec({alpha, x}));
    }
    const double lo = (2.0 * alpha + 1.0) / (2.0 * alpha + 2.0);
    for (int k = 0; k <= 1000; ++k) {
      const double x = lo + (1.0 - lo) * k / 1000.0;
      const double lhs = (1.0 - std::pow(x, alpha)) / (2.0 * alpha);
      const double rhs = std::pow(x, alpha) * (1.0 - x);
      aux2.expect_le(lhs, rhs + 1e-12, make_vec({alpha, x}));
    }
  }
  out.push_back(aux1);
  out.push_back(aux2);

  CheckReport uni;
  uni.name = "descent_lemma_uniform";
  {
    const auto ds = GlmDataset::generate(10, 2, detail::draw_seed(rng), true);
    const GlmObjective glm(ds);
    const HuberObjective huber;
    const SoftmaxKLObjective kl(make_vec({0.5, 0.25, 0.25}));
    for (int i = 0; i < 400; ++i) {
      const Vec t1 = detail::gaussian(rng, 2, 3.0);
      uni.expect_ge(descent_check(glm, t1, ds.beta_uniform()).holds ? 1.0 : 0.0, 1.0, t1, "glm");
      const Vec t2 = detail::gaussian(rng, 1, 3.0);
      uni.expect_ge(descent_check(huber, t2, 2.0).holds ? 1.0 : 0.0, 1.0, t2, "huber");
      const Vec t3 = detail::gaussian(rng, 3, 3.0);
      uni.expect_ge(descent_check(kl, t3, 0.5).holds ? 1.0 : 0.0, 1.0, t3, "softmax-kl");
    }
  }
  out.push_back(uni);

  CheckReport nsd;
  nsd.name = "descent_lemma_non_uniform";
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (double p : {3.0, 4.0, 6.0}) {
    const PowerObjective f(p);
    for (int i = 0; i < 400; ++i) {
      const Vec x = make_vec({unif(rng)});
      if (x(0) == 0.0) continue;
      nsd.expect_ge(descent_check(f, x).holds ? 1.0 : 0.0, 1.0, x, f.name());
    }
  }
  out.push_back(nsd);
  return out;
}

inline Reports lemmas_suite(std::uint64_t seed = 7) {
  Reports out;
  auto keep = [&](const Reports& rs, std::initializer_list<const char*> names) {
    for (const auto& r : rs)
      for (const char* n : names)
        if (r.name == n) out.push_back(r);
  };
  keep(bandit_suite(seed + 1), {"lemma3_bandit_nl", "lemma4_bandit_ns", "lemma5_segment_bound"});
  keep(mdp_suite(seed + 2), {"lemma8_general_nl", "lemma9_general_ns", "lemma10_segment_bound",
                             "performance_difference", "value_suboptimality"});
  keep(glm_suite(seed + 3), {"lemma12_glm_nl", "lemma13_glm_ns"});
  for (const auto& r : scalar_lemmas_suite(seed + 4)) out.push_back(r);
  return out;
}

/// Runs a named suite; throws ConfigError for unknown names.
inline Reports run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "core") return core_suite(seed);
  if (name == "objectives") return objectives_suite(seed);
  if (name == "bandit") return bandit_suite(seed);
  if (name == "mdp") return mdp_suite(seed);
  if (name == "glm") return glm_suite(seed);
  if (name == "lemmas") return lemmas_suite(seed);
  if (name == "all") {
    Reports out;
    for (const char* n : {"core", "objectives", "bandit", "mdp", "glm"})
      for (auto& r : run_suite(n, seed)) out.push_back(std::move(r));
    for (auto& r : scalar_lemmas_suite(seed)) out.push_back(std::move(r));
    return out;
  }
  throw ConfigError("unknown verification suite '" + name +
                    "' (expected all, core, objectives, bandit, mdp, glm, lemmas)");
}

}  // namespace verify
}  // namespace nonuniform

#endif  // NONUNIFORM_VERIFY_HPP
