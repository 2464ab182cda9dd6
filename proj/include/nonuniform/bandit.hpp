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

#ifndef NONUNIFORM_BANDIT_HPP
#define NONUNIFORM_BANDIT_HPP

#include "nonuniform/core.hpp"
#include "nonuniform/objectives.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace nonuniform {

/// Ascent step theta + eta * g / ||g||. Shared by the bandit and MDP paths.
inline Vec normalized_ascent_step(const Vec& theta, const Vec& g, double eta) {
  const double norm = plain_norm(g);
  Vec out(theta.size());
  for (Index i = 0; i < theta.size(); ++i) out(i) = theta(i) + eta * g(i) / norm;
  return out;
}

inline Vec plain_ascent_step(const Vec& theta, const Vec& g, double eta) {
  Vec out(theta.size());
  for (Index i = 0; i < theta.size(); ++i) out(i) = theta(i) + eta * g(i);
  return out;
}

/// K-armed bandit with deterministic rewards r in [0, 1]^K and a unique best arm.
class BanditInstance {
 public:
  static constexpr double kMinGap = 1e-12;

  explicit BanditInstance(Vec r) : r_(std::move(r)) {
    if (r_.size() == 0) throw ConfigError("bandit needs at least one arm");
    if (!r_.allFinite() || (r_.array() < 0.0).any() || (r_.array() > 1.0).any())
      throw ConfigError("bandit rewards must lie in [0, 1]");
    r_.maxCoeff(&a_star_);
    double second = -kInf;
    for (Index a = 0; a < r_.size(); ++a)
      if (a != a_star_) second = std::max(second, r_(a));
    gap_ = r_.size() == 1 ? kInf : r_(a_star_) - second;
    if (!(gap_ > kMinGap)) throw ConfigError("bandit rewards must have a unique maximum");
  }

  const Vec& rewards() const { return r_; }
  Index arms() const { return r_.size(); }
  Index best_arm() const { return a_star_; }
  double best_reward() const { return r_(a_star_); }
  double gap() const { return gap_; }

 private:
  Vec r_;
  Index a_star_ = 0;
  double gap_ = 0.0;
};

inline void check_bandit_dim(const BanditInstance& inst, const Vec& theta) {
  if (theta.size() != inst.arms()) throw ArgumentError("bandit: logit dimension mismatch");
}

/// pi_theta^T r.
inline double expected_reward(const BanditInstance& inst, const Vec& theta) {
  check_bandit_dim(inst, theta);
  return plain_dot(softmax(theta), inst.rewards());
}

/// Component a is pi(a) (r(a) - pi^T r).
inline Vec bandit_policy_gradient(const BanditInstance& inst, const Vec& theta) {
  check_bandit_dim(inst, theta);
  return softmax_jacobian_apply(softmax(theta), inst.rewards());
}

/// pi(a*) (pi* - pi)^T r; a lower bound on the policy-gradient norm.
inline double nl_lower_bound(const BanditInstance& inst, const Vec& theta) {
  check_bandit_dim(inst, theta);
  const Vec pi = softmax(theta);
  return pi(inst.best_arm()) * (inst.best_reward() - plain_dot(pi, inst.rewards()));
}

/// 3 ||grad||, an upper bound on the Hessian spectral radius.
inline double bandit_ns_coefficient(const BanditInstance& inst, const Vec& theta) {
  return 3.0 * plain_norm(bandit_policy_gradient(inst, theta));
}

/// Expected reward as a maximization objective.
class BanditObjective final : public Objective {
 public:
  explicit BanditObjective(BanditInstance inst) : inst_(std::move(inst)) {}
  const BanditInstance& instance() const { return inst_; }

  std::string name() const override { return "bandit"; }
  Index dim() const override { return inst_.arms(); }
  Sense sense() const override { return Sense::maximize; }
  double value(const Vec& theta) const override { return expected_reward(inst_, theta); }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& theta) const override { return bandit_policy_gradient(inst_, theta); }
  std::optional<double> optimum_value() const override { return inst_.best_reward(); }
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    return bandit_ns_coefficient(inst_, theta);
  }
  std::optional<NlData> nl_data(const Vec& theta) const override {
    return NlData{softmax(theta)(inst_.best_arm()), 0.0};
  }

 private:
  BanditInstance inst_;
};

/// One iterate of a policy-optimization run.
struct PolicyRecord {
  long t = 0;
  double value = 0.0;       // expected reward / V(rho)
  double delta = 0.0;       // optimal value minus value
  double grad_norm = 0.0;
  double min_pi_star = 0.0;  // pi_t(a*), or min over states of pi_t(a*(s)|s)
};

enum class PolicyStop { max_iters, converged, delta_target };

inline std::string to_string(PolicyStop s) {
  switch (s) {
    case PolicyStop::max_iters: return "max_iters";
    case PolicyStop::converged: return "grad_tol";
    case PolicyStop::delta_target: return "delta_tol";
  }
  return "unknown";
}

struct PolicyRun {
  std::vector<PolicyRecord> records;
  std::vector<Vec> thetas;  // filled only when requested
  PolicyStop stop = PolicyStop::max_iters;
  Vec final_theta;

  /// First t with delta < target, if any.
  std::optional<long> first_below(double target) const {
    for (const auto& r : records)
      if (r.delta < target) return r.t;
    return std::nullopt;
  }
  double min_pi_star() const {
    double m = kInf;
    for (const auto& r : records) m = std::min(m, r.min_pi_star);
    return m;
  }
};

struct PolicyRunOptions {
  bool normalized = true;     // GNPG when true, plain PG ascent otherwise
  double eta = 1.0 / 6.0;
  long iters = 1000;          // number of iterates recorded (t = 1..iters)
  double stop_delta = 0.0;    // stop once delta < stop_delta
  double grad_tol = 1e-14;
  long record_stride = 1;     // keep every stride-th record, plus first and last
  bool keep_thetas = false;
};

/// GNPG (or PG) on a bandit: theta <- theta + eta g / ||g|| (or + eta g).
inline PolicyRun bandit_policy_run(const BanditInstance& inst, Vec theta,
                                   const PolicyRunOptions& opts) {
  check_bandit_dim(inst, theta);
  require_finite(theta, "initial logits");
  if (!(opts.eta > 0.0)) throw ConfigError("step size must be positive");
  if (opts.iters < 1) throw ConfigError("iteration budget must be at least 1");
  const long stride = std::max(1L, opts.record_stride);
  PolicyRun run;
  for (long t = 1;; ++t) {
    const Vec pi = softmax(theta);
    const Vec g = softmax_jacobian_apply(pi, inst.rewards());
    PolicyRecord rec;
    rec.t = t;
    rec.value = plain_dot(pi, inst.rewards());
    rec.delta = inst.best_reward() - rec.value;
    rec.grad_norm = plain_norm(g);
    rec.min_pi_star = pi(inst.best_arm());

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

/// GNPG with step eta for T iterates.
inline PolicyRun bandit_gnpg_run(const BanditInstance& inst, const Vec& theta1, double eta,
                                 long iters) {
  if (!(eta > 0.0 && eta < 1.0 / 3.0))
    throw ConfigError("bandit GNPG step size must lie in (0, 1/3)");
  PolicyRunOptions opts;
  opts.eta = eta;
  opts.iters = iters;
  opts.keep_thetas = true;
  return bandit_policy_run(inst, theta1, opts);
}

/// Logits (0, ..., ln 48, ..., 0) putting mass 48/(K+47) on a suboptimal arm.
/// For K = 3 this is pi = (0.02, 0.96, 0.02).
inline Vec bandit_plateau_init(const BanditInstance& inst) {
  const Index k = inst.arms();
  Vec theta = Vec::Zero(k);
  if (k == 1) return theta;
  // Heaviest suboptimal arm: highest reward other than a*.
  Index trap = inst.best_arm() == 0 ? 1 : 0;
  for (Index a = 0; a < k; ++a)
    if (a != inst.best_arm() && inst.rewards()(a) > inst.rewards()(trap)) trap = a;
  theta(trap) = std::log(48.0);
  return theta;
}

/// e^{-c (t - 1) / 12} delta_1 with c the smallest pi_t(a*) along the run.
inline double bandit_rate_bound(double delta1, double c, long t) {
  return std::exp(-c * static_cast<double>(t - 1) / 12.0) * delta1;
}

}  // namespace nonuniform

#endif  // NONUNIFORM_BANDIT_HPP
