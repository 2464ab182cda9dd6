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

#ifndef NONUNIFORM_MDP_HPP
#define NONUNIFORM_MDP_HPP

#include "nonuniform/bandit.hpp"
#include "nonuniform/core.hpp"
#include "nonuniform/objectives.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace nonuniform {

/// Finite discounted MDP. Transitions are stored as an (S*A) x S matrix whose
/// row s*A + a is P(.|s, a); rewards as a flat vector of length S*A.
class TabularMdp {
 public:
  static constexpr Index kMaxStates = 100000;

  TabularMdp(Index states, Index actions, Mat transitions, Vec rewards, double gamma, Vec mu,
             Vec rho)
      : s_(states),
        a_(actions),
        p_(std::move(transitions)),
        r_(std::move(rewards)),
        gamma_(gamma),
        mu_(std::move(mu)),
        rho_(std::move(rho)) {
    if (s_ < 1 || a_ < 1) throw ConfigError("MDP needs at least one state and one action");
    if (s_ > kMaxStates) throw ConfigError("MDP exceeds the dense state cap");
    if (p_.rows() != s_ * a_ || p_.cols() != s_)
      throw ConfigError("transition matrix must be (S*A) x S");
    if (r_.size() != s_ * a_) throw ConfigError("reward vector must have S*A entries");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0)) throw ConfigError("discount must lie in [0, 1)");
    if (!p_.allFinite() || (p_.array() < 0.0).any())
      throw ConfigError("transition probabilities must be finite and non-negative");
    for (Index i = 0; i < p_.rows(); ++i)
      if (std::abs(p_.row(i).sum() - 1.0) > 1e-12)
        throw ConfigError("transition row " + std::to_string(i) + " does not sum to 1");
    if (!r_.allFinite() || (r_.array() < 0.0).any() || (r_.array() > 1.0).any())
      throw ConfigError("rewards must lie in [0, 1]");
    check_distribution(mu_, "mu");
    check_distribution(rho_, "rho");
  }

  Index states() const { return s_; }
  Index actions() const { return a_; }
  Index index(Index s, Index a) const { return s * a_ + a; }
  const Mat& transitions() const { return p_; }
  const Vec& rewards() const { return r_; }
  double gamma() const { return gamma_; }
  const Vec& mu() const { return mu_; }
  const Vec& rho() const { return rho_; }

  /// Theory quantities that divide by mu need it strictly positive.
  double min_mu() const { return mu_.minCoeff(); }
  void require_positive_mu() const {
    if (!(min_mu() > 0.0))
      throw ConfigError("this quantity needs an initial distribution mu with full support");
  }

  void check_theta(const Vec& theta) const {
    if (theta.size() != s_ * a_) throw ArgumentError("policy logits must have S*A entries");
    require_finite(theta, "policy logits");
  }

 private:
  void check_distribution(const Vec& d, const char* what) const {
    if (d.size() != s_) throw ConfigError(std::string(what) + " must have S entries");
    if (!d.allFinite() || (d.array() < 0.0).any() || std::abs(d.sum() - 1.0) > 1e-12)
      throw ConfigError(std::string(what) + " must be a probability distribution");
  }

  Index s_, a_;
  Mat p_;
  Vec r_;
  double gamma_;
  Vec mu_, rho_;
};

/// Flat S*A vector of pi(a|s) = softmax(theta(s, .)).
inline Vec policy_probs(const TabularMdp& mdp, const Vec& theta) {
  mdp.check_theta(theta);
  const Index na = mdp.actions();
  Vec pi(theta.size());
  for (Index s = 0; s < mdp.states(); ++s) pi.segment(s * na, na) = softmax(theta.segment(s * na, na));
  return pi;
}

/// Flat one-hot policy from an action per state.
inline Vec deterministic_policy(const TabularMdp& mdp, const std::vector<Index>& actions) {
  if (static_cast<Index>(actions.size()) != mdp.states())
    throw ArgumentError("deterministic policy needs one action per state");
  Vec pi = Vec::Zero(mdp.states() * mdp.actions());
  for (Index s = 0; s < mdp.states(); ++s) pi(mdp.index(s, actions[s])) = 1.0;
  return pi;
}

/// Exact evaluation of a fixed policy: V, Q and a factorization of I - gamma P_pi
/// that also serves visitation solves.
class PolicyEvaluation {
 public:
  PolicyEvaluation(const TabularMdp& mdp, Vec pi) : mdp_(&mdp), pi_(std::move(pi)) {
    const Index ns = mdp.states();
    const Index na = mdp.actions();
    if (pi_.size() != ns * na) throw ArgumentError("policy must have S*A entries");
    Mat m = Mat::Identity(ns, ns);
    Vec r_pi(ns);
    const Mat& p = mdp.transitions();
    for (Index s = 0; s < ns; ++s) {
      const Vec pi_s = pi_.segment(s * na, na);
      r_pi(s) = plain_dot(pi_s, mdp.rewards().segment(s * na, na));
      for (Index a = 0; a < na; ++a) {
        const double w = pi_s(a);
        if (w != 0.0) m.row(s) -= (mdp.gamma() * w) * p.row(s * na + a);
      }
    }
    lu_.compute(m);
    v_ = lu_.solve(r_pi);
    if (!v_.allFinite()) throw NumericalError("policy evaluation produced non-finite values");
    q_.resize(ns * na);
    for (Index i = 0; i < ns * na; ++i) q_(i) = mdp.rewards()(i) + mdp.gamma() * p.row(i).dot(v_);
  }

  const Vec& pi() const { return pi_; }
  const Vec& values() const { return v_; }
  const Vec& q() const { return q_; }
  double value(const Vec& start) const { return plain_dot(start, v_); }

  /// A(s, a) = Q(s, a) - V(s).
  Vec advantage() const {
    Vec adv = q_;
    const Index na = mdp_->actions();
    for (Index s = 0; s < mdp_->states(); ++s) adv.segment(s * na, na).array() -= v_(s);
    return adv;
  }

  /// d(s) = (1 - gamma) start^T (I - gamma P_pi)^{-1}.
  Vec visitation(const Vec& start) const {
    if (start.size() != mdp_->states()) throw ArgumentError("start distribution has wrong size");
    Vec d = lu_.transpose().solve(start);
    return (1.0 - mdp_->gamma()) * d;
  }

  /// Row s is d_start(s) / (1 - gamma) * H(pi_s) Q(s, .).
  Vec gradient(const Vec& start) const {
    const Vec d = visitation(start);
    const Index na = mdp_->actions();
    Vec g(pi_.size());
    for (Index s = 0; s < mdp_->states(); ++s) {
      const double scale = d(s) / (1.0 - mdp_->gamma());
      const Vec row = softmax_jacobian_apply(pi_.segment(s * na, na), q_.segment(s * na, na));
      for (Index a = 0; a < na; ++a) g(s * na + a) = scale * row(a);
    }
    return g;
  }

 private:
  const TabularMdp* mdp_;
  Vec pi_;
  Eigen::PartialPivLU<Mat> lu_;
  Vec v_;
  Vec q_;
};

inline PolicyEvaluation evaluate(const TabularMdp& mdp, const Vec& theta) {
  return PolicyEvaluation(mdp, policy_probs(mdp, theta));
}

inline Vec state_values(const TabularMdp& mdp, const Vec& theta) {
  return evaluate(mdp, theta).values();
}

struct QAndAdvantage {
  Vec q;
  Vec advantage;
};

inline QAndAdvantage q_and_advantage(const TabularMdp& mdp, const Vec& theta) {
  const auto ev = evaluate(mdp, theta);
  return {ev.q(), ev.advantage()};
}

inline Vec discounted_visitation(const TabularMdp& mdp, const Vec& theta, const Vec& start) {
  return evaluate(mdp, theta).visitation(start);
}

/// Exact gradient of V^{pi_theta}(start) with respect to the flat logits.
inline Vec policy_gradient(const TabularMdp& mdp, const Vec& theta, const Vec& start) {
  return evaluate(mdp, theta).gradient(start);
}

// ---------------------------------------------------------------------------
// Optimal policy
// ---------------------------------------------------------------------------

struct OptimalPolicy {
  std::vector<Index> actions;  // a*(s)
  Vec v;                       // V*
  Vec q;                       // Q*
  int iterations = 0;
  /// Smallest over states of Q*(s, a*(s)) - max_{a != a*(s)} Q*(s, a).
  double min_gap = kInf;
};

/// Howard policy iteration with an arbitrary reward vector. Greedy ties go to
/// the lowest action index; an action is replaced only on strict improvement.
inline OptimalPolicy policy_iteration(const TabularMdp& mdp, const Vec& rewards) {
  const Index ns = mdp.states();
  const Index na = mdp.actions();
  const double gamma = mdp.gamma();
  const Mat& p = mdp.transitions();
  OptimalPolicy out;
  out.actions.assign(static_cast<std::size_t>(ns), 0);
  const int max_rounds = 10000;
  for (int round = 0; round < max_rounds; ++round) {
    Mat m = Mat::Identity(ns, ns);
    Vec r_pi(ns);
    for (Index s = 0; s < ns; ++s) {
      const Index i = s * na + out.actions[s];
      m.row(s) -= gamma * p.row(i);
      r_pi(s) = rewards(i);
    }
    out.v = Eigen::PartialPivLU<Mat>(m).solve(r_pi);
    out.q = rewards + gamma * (p * out.v);
    out.iterations = round + 1;
    const double tol = 1e-12 * (1.0 + out.v.cwiseAbs().maxCoeff());
    bool changed = false;
    for (Index s = 0; s < ns; ++s) {
      Index best = 0;
      for (Index a = 1; a < na; ++a)
        if (out.q(s * na + a) > out.q(s * na + best)) best = a;
      if (out.q(s * na + best) > out.q(s * na + out.actions[s]) + tol) {
        out.actions[s] = best;
        changed = true;
      }
    }
    if (!changed) break;
    if (round + 1 == max_rounds) throw NumericalError("policy iteration did not terminate");
  }
  for (Index s = 0; s < ns; ++s) {
    double runner_up = -kInf;
    for (Index a = 0; a < na; ++a)
      if (a != out.actions[s]) runner_up = std::max(runner_up, out.q(s * na + a));
    out.min_gap = std::min(out.min_gap, out.q(s * na + out.actions[s]) - runner_up);
  }
  return out;
}

inline OptimalPolicy optimal_policy(const TabularMdp& mdp) {
  return policy_iteration(mdp, mdp.rewards());
}

/// V* by value iteration, iterated until successive sup-norm changes fall below tol.
inline Vec value_iteration(const TabularMdp& mdp, double tol = 1e-13, long max_iters = 10000000) {
  const Index ns = mdp.states();
  const Index na = mdp.actions();
  Vec v = Vec::Zero(ns);
  for (long k = 0; k < max_iters; ++k) {
    const Vec q = mdp.rewards() + mdp.gamma() * (mdp.transitions() * v);
    Vec next(ns);
    for (Index s = 0; s < ns; ++s) next(s) = q.segment(s * na, na).maxCoeff();
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (change < tol) break;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

struct IdentitySides {
  double lhs;
  double rhs;
};

/// V^{pi'}(rho) - V^{pi}(rho) against (1/(1-gamma)) sum_s d^{pi'}_rho(s) sum_a pi'(a|s) A^pi(s,a).
inline IdentitySides performance_difference(const TabularMdp& mdp, const Vec& theta,
                                            const Vec& theta_prime, const Vec& rho) {
  const auto ev = evaluate(mdp, theta);
  const auto ev_prime = evaluate(mdp, theta_prime);
  const Vec d_prime = ev_prime.visitation(rho);
  const Vec adv = ev.advantage();
  const Index na = mdp.actions();
  double acc = 0.0;
  for (Index s = 0; s < mdp.states(); ++s)
    acc += d_prime(s) *
           plain_dot(ev_prime.pi().segment(s * na, na), adv.segment(s * na, na));
  return {ev_prime.value(rho) - ev.value(rho), acc / (1.0 - mdp.gamma())};
}

/// V*(rho) - V^pi(rho) against (1/(1-gamma)) sum_s d^pi_rho(s) sum_a (pi* - pi)(a|s) Q*(s,a).
inline IdentitySides value_suboptimality(const TabularMdp& mdp, const OptimalPolicy& opt,
                                         const Vec& theta, const Vec& rho) {
  const auto ev = evaluate(mdp, theta);
  const Vec d = ev.visitation(rho);
  const Vec pi_star = deterministic_policy(mdp, opt.actions);
  const Index na = mdp.actions();
  double acc = 0.0;
  for (Index s = 0; s < mdp.states(); ++s) {
    const Vec diff = pi_star.segment(s * na, na) - ev.pi().segment(s * na, na);
    acc += d(s) * plain_dot(diff, opt.q.segment(s * na, na));
  }
  return {plain_dot(rho, opt.v) - ev.value(rho), acc / (1.0 - mdp.gamma())};
}

// ---------------------------------------------------------------------------
// Distribution-mismatch constants and step size
// ---------------------------------------------------------------------------

/// max_pi ||d^pi_mu / mu||_inf, exactly. For each s the largest d^pi_mu(s) is
/// (1 - gamma) times the optimal value of the indicator reward 1{s}.
inline double c_infinity_exact(const TabularMdp& mdp, const Vec& start) {
  mdp.require_positive_mu();
  const Index ns = mdp.states();
  const Index na = mdp.actions();
  double best = 0.0;
  for (Index s = 0; s < ns; ++s) {
    Vec indicator = Vec::Zero(ns * na);
    indicator.segment(s * na, na).setOnes();
    const auto opt = policy_iteration(mdp, indicator);
    const double d_max = (1.0 - mdp.gamma()) * plain_dot(start, opt.v);
    best = std::max(best, d_max / mdp.mu()(s));
  }
  return best;
}

/// The safe bound 1 / min_s mu(s).
inline double c_infinity_bound(const TabularMdp& mdp) {
  mdp.require_positive_mu();
  return 1.0 / mdp.min_mu();
}

/// max over sampled softmax policies and deterministic corners (all of them when
/// A^S <= max_corners, otherwise as many random ones) of ||d^pi_mu / mu||_inf.
inline double c_infinity_sampled(const TabularMdp& mdp, int policies, std::uint64_t seed,
                                 long max_corners = 4096) {
  mdp.require_positive_mu();
  const Index ns = mdp.states();
  const Index na = mdp.actions();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 3.0);
  double best = 0.0;
  auto consider = [&](const Vec& pi) {
    const Vec d = PolicyEvaluation(mdp, pi).visitation(mdp.mu());
    best = std::max(best, (d.array() / mdp.mu().array()).maxCoeff());
  };
  for (int k = 0; k < policies; ++k)
    consider(policy_probs(mdp, Vec::NullaryExpr(ns * na, [&] { return normal(rng); })));

  double corners = 1.0;
  for (Index s = 0; s < ns && corners <= static_cast<double>(max_corners); ++s)
    corners *= static_cast<double>(na);
  std::vector<Index> acts(static_cast<std::size_t>(ns), 0);
  if (corners <= static_cast<double>(max_corners)) {
    for (;;) {
      consider(deterministic_policy(mdp, acts));
      Index s = 0;
      while (s < ns && ++acts[s] == na) acts[s++] = 0;
      if (s == ns) break;
    }
  } else {
    std::uniform_int_distribution<Index> pick(0, na - 1);
    for (long k = 0; k < max_corners; ++k) {
      for (auto& a : acts) a = pick(rng);
      consider(deterministic_policy(mdp, acts));
    }
  }
  return best;
}

/// (1 - gamma) / (6 (1 - gamma) + 8 (C_inf - (1 - gamma))) / sqrt(S).
inline double gnpg_step_size(double gamma, double c_inf, Index states) {
  const double g = 1.0 - gamma;
  return g / (6.0 * g + 8.0 * (c_inf - g)) / std::sqrt(static_cast<double>(states));
}

inline double gnpg_default_step(const TabularMdp& mdp) {
  return gnpg_step_size(mdp.gamma(), c_infinity_bound(mdp), mdp.states());
}

/// [3 + 4 (C_inf - (1 - gamma)) / (1 - gamma)] sqrt(S); multiply by ||grad|| for beta(theta).
inline double mdp_ns_factor(double gamma, double c_inf, Index states) {
  const double g = 1.0 - gamma;
  return (3.0 + 4.0 * (c_inf - g) / g) * std::sqrt(static_cast<double>(states));
}

/// min_s pi(a*(s)|s).
inline double min_optimal_action_prob(const TabularMdp& mdp, const std::vector<Index>& a_star,
                                      const Vec& pi) {
  double m = kInf;
  for (Index s = 0; s < mdp.states(); ++s) m = std::min(m, pi(mdp.index(s, a_star[s])));
  return m;
}

/// min_s pi(a*(s)|s) / (sqrt(S) ||d^{pi*}_rho / d^pi_mu||_inf); multiplies V*(rho) - V(rho).
inline double mdp_nl_coefficient(const TabularMdp& mdp, const OptimalPolicy& opt,
                                 const PolicyEvaluation& ev, const Vec& mu, const Vec& rho) {
  const Vec d_star = PolicyEvaluation(mdp, deterministic_policy(mdp, opt.actions)).visitation(rho);
  const Vec d = ev.visitation(mu);
  double mismatch = 0.0;
  for (Index s = 0; s < mdp.states(); ++s) {
    if (d_star(s) == 0.0) continue;
    mismatch = std::max(mismatch, d(s) > 0.0 ? d_star(s) / d(s) : kInf);
  }
  if (mismatch == 0.0) return kInf;
  return min_optimal_action_prob(mdp, opt.actions, ev.pi()) /
         (std::sqrt(static_cast<double>(mdp.states())) * mismatch);
}

struct RateConstants {
  double c_inf = 0.0;        // max_pi ||d^pi_mu / mu||_inf used in the rate
  double c_inf_prime = 0.0;  // bound on max_pi ||d^pi_rho / mu||_inf
  double d_star_ratio = 0.0;  // ||d^{pi*}_mu / mu||_inf
};

/// C = (1-gamma)^2 c / (12 (1-gamma) + 16 (C_inf - (1-gamma))) / S / ||d^{pi*}_mu / mu||_inf.
inline double gnpg_rate(double gamma, double c, double c_inf, Index states, double d_star_ratio) {
  const double g = 1.0 - gamma;
  return g * g * c / (12.0 * g + 16.0 * (c_inf - g)) / static_cast<double>(states) / d_star_ratio;
}

/// (V*(mu) - V^{pi_1}(mu)) C'_inf / (1 - gamma) * exp(-C (t - 1)).
inline double gnpg_bound(double initial_gap_mu, double c_inf_prime, double gamma, double rate,
                         long t) {
  return initial_gap_mu * c_inf_prime / (1.0 - gamma) * std::exp(-rate * static_cast<double>(t - 1));
}

inline RateConstants rate_constants(const TabularMdp& mdp, const OptimalPolicy& opt) {
  mdp.require_positive_mu();
  RateConstants rc;
  rc.c_inf = c_infinity_bound(mdp);
  rc.c_inf_prime = 1.0 / mdp.min_mu();
  const Vec d_star = PolicyEvaluation(mdp, deterministic_policy(mdp, opt.actions)).visitation(mdp.mu());
  rc.d_star_ratio = (d_star.array() / mdp.mu().array()).maxCoeff();
  return rc;
}

// ---------------------------------------------------------------------------
// Policy optimization runs
// ---------------------------------------------------------------------------

/// GNPG (normalized) or PG ascent on V(mu); records V(rho) and V*(rho) - V(rho).
inline PolicyRun mdp_policy_run(const TabularMdp& mdp, const OptimalPolicy& opt, Vec theta,
                                const PolicyRunOptions& opts) {
  mdp.check_theta(theta);
  if (!(opts.eta > 0.0)) throw ConfigError("step size must be positive");
  if (opts.iters < 1) throw ConfigError("iteration budget must be at least 1");
  const long stride = std::max(1L, opts.record_stride);
  const double v_star_rho = plain_dot(mdp.rho(), opt.v);
  PolicyRun run;
  for (long t = 1;; ++t) {
    const PolicyEvaluation ev(mdp, policy_probs(mdp, theta));
    const Vec g = ev.gradient(mdp.mu());
    PolicyRecord rec;
    rec.t = t;
    rec.value = ev.value(mdp.rho());
    rec.delta = v_star_rho - rec.value;
    rec.grad_norm = plain_norm(g);
    rec.min_pi_star = min_optimal_action_prob(mdp, opt.actions, ev.pi());

    bool last = t >= opts.iters;
    if (rec.delta < opts.stop_delta) {
      run.stop = PolicyStop::delta_target;
      last = true;
    } else if (rec.grad_norm < opts.grad_tol) {
      run.stop = PolicyStop::converged;
      last = true;
    }
    if (last || t == 1 || (t - 1) % stride == 0) {
      run.records.push_back(rec);
      if (opts.keep_thetas) run.thetas.push_back(theta);
    }
    if (last) break;
    theta = opts.normalized ? normalized_ascent_step(theta, g, opts.eta)
                            : plain_ascent_step(theta, g, opts.eta);
  }
  run.final_theta = theta;
  return run;
}

inline PolicyRun gnpg_run(const TabularMdp& mdp, const OptimalPolicy& opt, const Vec& theta1,
                          double eta, long iters) {
  PolicyRunOptions opts;
  opts.eta = eta;
  opts.iters = iters;
  return mdp_policy_run(mdp, opt, theta1, opts);
}

/// V^{pi_theta}(mu) as a maximization objective over flat logits.
class MdpObjective final : public Objective {
 public:
  explicit MdpObjective(const TabularMdp& mdp) : mdp_(mdp), opt_(optimal_policy(mdp)) {}
  const TabularMdp& mdp() const { return mdp_; }
  const OptimalPolicy& optimum() const { return opt_; }

  std::string name() const override { return "mdp"; }
  Index dim() const override { return mdp_.states() * mdp_.actions(); }
  Sense sense() const override { return Sense::maximize; }
  double value(const Vec& theta) const override { return evaluate(mdp_, theta).value(mdp_.mu()); }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& theta) const override { return policy_gradient(mdp_, theta, mdp_.mu()); }
  std::optional<double> optimum_value() const override { return plain_dot(mdp_.mu(), opt_.v); }
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    if (!(mdp_.min_mu() > 0.0)) return std::nullopt;
    return mdp_ns_factor(mdp_.gamma(), c_infinity_bound(mdp_), mdp_.states()) *
           plain_norm(gradient(theta));
  }
  std::optional<NlData> nl_data(const Vec& theta) const override {
    const auto ev = evaluate(mdp_, theta);
    return NlData{mdp_nl_coefficient(mdp_, opt_, ev, mdp_.mu(), mdp_.mu()), 0.0};
  }

 private:
  TabularMdp mdp_;
  OptimalPolicy opt_;
};

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// S = sum_{i<h} b^i, or 0 when that exceeds the dense cap.
inline Index tree_state_count(int h, int b) {
  if (h < 1 || b < 1) throw ConfigError("tree MDP needs h >= 1 and b >= 1");
  Index total = 0;
  Index level = 1;
  for (int i = 0; i < h; ++i) {
    total += level;
    if (total > TabularMdp::kMaxStates) throw ConfigError("tree MDP exceeds the dense state cap");
    level *= b;
  }
  return total;
}

enum class TreeRewards { uniform, leaf_only };

inline TreeRewards parse_tree_rewards(const std::string& s) {
  if (s == "uniform") return TreeRewards::uniform;
  if (s == "leaf_only") return TreeRewards::leaf_only;
  throw ConfigError("unknown tree reward spec '" + s + "' (expected uniform or leaf_only)");
}

struct TreeMdpInfo {
  int redraws = 0;
  std::uint64_t seed_used = 0;
};

/// Complete b-ary tree of height h in breadth-first order. Action a at an
/// internal node moves to its a-th child; every action at a leaf self-loops.
/// Rewards are U[0, 1] per (s, a) (uniform) or per leaf action with zeros
/// inside the tree (leaf_only). Rewards are redrawn from seed + k until every
/// state's optimal action is separated by at least 1e-9 in Q*.
inline TabularMdp tree_mdp(int h, int b, double gamma, TreeRewards spec, std::uint64_t seed,
                           TreeMdpInfo* info = nullptr) {
  const Index ns = tree_state_count(h, b);
  const Index na = b;
  const Index internal = ns - [&] {
    Index leaves = 1;
    for (int i = 0; i + 1 < h; ++i) leaves *= b;
    return leaves;
  }();
  Mat p = Mat::Zero(ns * na, ns);
  for (Index s = 0; s < ns; ++s)
    for (Index a = 0; a < na; ++a) p(s * na + a, s < internal ? b * s + 1 + a : s) = 1.0;
  Vec root = Vec::Zero(ns);
  root(0) = 1.0;

  const int max_redraws = 1000;
  for (int k = 0; k < max_redraws; ++k) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vec r = Vec::Zero(ns * na);
    for (Index s = 0; s < ns; ++s)
      for (Index a = 0; a < na; ++a)
        if (spec == TreeRewards::uniform || s >= internal) r(s * na + a) = unif(rng);
    TabularMdp mdp(ns, na, p, r, gamma, root, root);
    if (na == 1 || optimal_policy(mdp).min_gap >= 1e-9) {
      if (info) *info = {k, seed + static_cast<std::uint64_t>(k)};
      return mdp;
    }
  }
  throw ConfigError("could not draw tree rewards with a unique optimal action");
}

/// Dense random MDP with Dirichlet(1) transition rows, U[0,1] rewards and
/// Dirichlet(1) mu, rho. Used by the verification suites.
inline TabularMdp random_mdp(Index ns, Index na, double gamma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto simplex = [&](Index n) {
    Vec v = Vec::NullaryExpr(n, [&] { return expo(rng) + 1e-3; });
    return Vec(v / v.sum());
  };
  Mat p(ns * na, ns);
  for (Index i = 0; i < ns * na; ++i) {
    p.row(i) = simplex(ns).transpose();
    p.row(i) /= p.row(i).sum();
  }
  Vec r = Vec::NullaryExpr(ns * na, [&] { return unif(rng); });
  Vec mu = simplex(ns);
  Vec rho = simplex(ns);
  mu /= mu.sum();
  rho /= rho.sum();
  return TabularMdp(ns, na, std::move(p), std::move(r), gamma, std::move(mu), std::move(rho));
}

/// The bandit as a one-state MDP with gamma = 0.
inline TabularMdp bandit_as_mdp(const BanditInstance& inst) {
  const Index k = inst.arms();
  return TabularMdp(1, k, Mat::Ones(k, 1), inst.rewards(), 0.0, Vec::Ones(1), Vec::Ones(1));
}

}  // namespace nonuniform

#endif  // NONUNIFORM_MDP_HPP
