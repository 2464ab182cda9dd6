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

#ifndef NONUNIFORM_OPTIMIZERS_HPP
#define NONUNIFORM_OPTIMIZERS_HPP

#include "nonuniform/core.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace nonuniform {

enum class StepKind { gd, ngd_const, ngd_sqrt, gngd };

inline std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::gd: return "gd";
    case StepKind::ngd_const: return "ngd";
    case StepKind::ngd_sqrt: return "ngd_sqrt";
    case StepKind::gngd: return "gngd";
  }
  return "unknown";
}

inline StepKind parse_step_kind(const std::string& s) {
  if (s == "gd") return StepKind::gd;
  if (s == "ngd" || s == "ngd_const") return StepKind::ngd_const;
  if (s == "ngd_sqrt") return StepKind::ngd_sqrt;
  if (s == "gngd") return StepKind::gngd;
  throw ConfigError("unknown step rule '" + s + "' (expected gd, ngd, ngd_sqrt, gngd)");
}

struct StepRule {
  StepKind kind = StepKind::gd;
  double eta = 0.01;

  StepRule() = default;
  StepRule(StepKind k, double e) : kind(k), eta(e) {
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("step size must be positive and finite");
  }
};

inline constexpr double kDefaultBetaFloor = 1e-12;
inline constexpr double kStationaryTol = 1e-14;

/// Result of one update. `stationary` is set (and theta left unchanged) when a
/// normalized rule meets a gradient below 1e-14.
struct StepOutcome {
  Vec theta;
  double effective_step = 0.0;
  bool stationary = false;
};

/// Multiplier m with theta' = theta -/+ m grad (minus for minimization).
inline double step_multiplier(const StepRule& rule, const Objective& obj, const Vec& theta,
                              double grad_norm, long t, double beta_floor = kDefaultBetaFloor) {
  switch (rule.kind) {
    case StepKind::gd: return rule.eta;
    case StepKind::ngd_const: return rule.eta / grad_norm;
    case StepKind::ngd_sqrt: return rule.eta / std::sqrt(static_cast<double>(t)) / grad_norm;
    case StepKind::gngd: {
      const auto beta = obj.ns_coefficient(theta);
      if (!beta) throw ArgumentError("GNGD needs an analytic or bound smoothness coefficient for " + obj.name());
      return rule.eta / std::max(*beta, beta_floor);
    }
  }
  return 0.0;
}

/// One update from theta at iteration t (t >= 1) given its gradient.
inline StepOutcome step(const StepRule& rule, const Objective& obj, const Vec& theta, const Vec& grad,
                        long t, double beta_floor = kDefaultBetaFloor) {
  const double gnorm = grad.norm();
  const bool normalized = rule.kind == StepKind::ngd_const || rule.kind == StepKind::ngd_sqrt;
  if (normalized && gnorm < kStationaryTol) return {theta, 0.0, true};
  const double m = step_multiplier(rule, obj, theta, gnorm, t, beta_floor);
  const double sign = obj.sense() == Sense::minimize ? -1.0 : 1.0;
  return {theta + (sign * m) * grad, m, false};
}

inline StepOutcome step(const StepRule& rule, const Objective& obj, const Vec& theta, long t,
                        double beta_floor = kDefaultBetaFloor) {
  return step(rule, obj, theta, obj.gradient(theta), t, beta_floor);
}

enum class StopReason { grad_tol, delta_tol, max_iters, diverged };

inline std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::grad_tol: return "grad_tol";
    case StopReason::delta_tol: return "delta_tol";
    case StopReason::max_iters: return "max_iters";
    case StopReason::diverged: return "diverged";
  }
  return "unknown";
}

struct RunOptions {
  long max_iters = 1000000;  // number of updates; iterates t = 1..max_iters+1
  double grad_tol = 1e-12;
  double delta_tol = 1e-14;  // applied only when the optimum is known
  double divergence = 1e12;
  double beta_floor = kDefaultBetaFloor;
  long keep_all = 100000;    // above this budget records are strided
  bool keep_thetas = false;
  bool record_ns = true;
};

struct RunResult {
  std::vector<IterateRecord> records;
  std::vector<Vec> thetas;
  StopReason stop_reason = StopReason::max_iters;
  Vec final_theta;
  long stride = 1;

  /// First recorded t with delta below target.
  std::optional<long> first_below(double target) const {
    for (const auto& r : records)
      if (r.delta && *r.delta < target) return r.t;
    return std::nullopt;
  }
};

/// Every recorded value is no worse than the previous one (up to abs_slack).
inline bool is_monotone(const RunResult& run, Sense sense, double abs_slack = 0.0) {
  for (std::size_t i = 1; i < run.records.size(); ++i) {
    const double prev = run.records[i - 1].value;
    const double cur = run.records[i].value;
    if (sense == Sense::minimize ? cur > prev + abs_slack : cur < prev - abs_slack) return false;
  }
  return true;
}

inline RunResult run(const StepRule& rule, const Objective& obj, Vec theta, const RunOptions& opts = {}) {
  if (opts.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (theta.size() != obj.dim()) throw ArgumentError("initial point has the wrong dimension");
  require_finite(theta, "initial point");
  RunResult res;
  res.stride = opts.max_iters <= opts.keep_all
                   ? 1
                   : (opts.max_iters + opts.keep_all - 1) / opts.keep_all;
  const auto optimum = obj.optimum_value();

  for (long t = 1;; ++t) {
    IterateRecord rec;
    rec.t = t;
    rec.value = obj.value(theta);
    bool stop = false;
    Vec grad;
    if (!std::isfinite(rec.value) || std::abs(rec.value) > opts.divergence) {
      res.stop_reason = StopReason::diverged;
      stop = true;
    } else {
      grad = obj.gradient(theta);
      if (!grad.allFinite()) {
        res.stop_reason = StopReason::diverged;
        stop = true;
      }
    }
    if (!stop) {
      rec.grad_norm = grad.norm();
      if (optimum) rec.delta = std::abs(rec.value - *optimum);
      if (opts.record_ns) rec.ns_coeff = obj.ns_coefficient(theta);
      if (rec.delta && *rec.delta < opts.delta_tol) {
        res.stop_reason = StopReason::delta_tol;
        stop = true;
      } else if (rec.grad_norm < opts.grad_tol) {
        res.stop_reason = StopReason::grad_tol;
        stop = true;
      } else if (t > opts.max_iters) {
        res.stop_reason = StopReason::max_iters;
        stop = true;
      }
    }

    StepOutcome next;
    if (!stop) {
      next = step(rule, obj, theta, grad, t, opts.beta_floor);
      if (next.stationary) {
        res.stop_reason = StopReason::grad_tol;
        stop = true;
      } else {
        rec.effective_step = next.effective_step;
      }
    }
    if (stop && rec.effective_step == 0.0 && res.stop_reason != StopReason::diverged && grad.size() > 0 &&
        rec.grad_norm > 0.0)
      rec.effective_step = step_multiplier(rule, obj, theta, rec.grad_norm, t, opts.beta_floor);

    if (stop || t == 1 || (t - 1) % res.stride == 0) {
      res.records.push_back(rec);
      if (opts.keep_thetas) res.thetas.push_back(theta);
    }
    if (stop) break;
    theta = std::move(next.theta);
  }
  res.final_theta = theta;
  return res;
}

struct DescentCheck {
  double before = 0.0;
  double after = 0.0;
  double guaranteed = 0.0;  // ||grad||^2 / (2 beta)
  bool holds = false;
};

/// One step with eta = 1/beta (uniform beta when given, else beta(theta)) and
/// the check f(theta') <= f(theta) - ||grad||^2 / (2 beta), improvement for maximization.
inline DescentCheck descent_check(const Objective& obj, const Vec& theta,
                                  std::optional<double> uniform_beta = std::nullopt,
                                  double rel_slack = 1e-9) {
  double beta;
  if (uniform_beta) {
    beta = *uniform_beta;
  } else {
    const auto b = obj.ns_coefficient(theta);
    if (!b) throw ArgumentError("descent check needs a smoothness coefficient");
    beta = *b;
  }
  if (!(beta > 0.0)) throw ArgumentError("descent check needs a positive smoothness coefficient");
  const Vec g = obj.gradient(theta);
  const double sign = obj.sense() == Sense::minimize ? -1.0 : 1.0;
  DescentCheck out;
  out.before = obj.value(theta);
  out.after = obj.value(theta + (sign / beta) * g);
  out.guaranteed = g.squaredNorm() / (2.0 * beta);
  const double progress = sign < 0.0 ? out.before - out.after : out.after - out.before;
  const double scale = std::max({std::abs(out.before), std::abs(out.after), out.guaranteed});
  out.holds = progress >= out.guaranteed - rel_slack * scale;
  return out;
}

}  // namespace nonuniform

#endif  // NONUNIFORM_OPTIMIZERS_HPP
