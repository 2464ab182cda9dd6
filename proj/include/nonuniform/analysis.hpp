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

#ifndef NONUNIFORM_ANALYSIS_HPP
#define NONUNIFORM_ANALYSIS_HPP

#include "nonuniform/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace nonuniform {

enum class RateModel { sublinear, linear };

inline std::string to_string(RateModel m) { return m == RateModel::sublinear ? "sublinear" : "linear"; }

/// Least-squares rate model. For `sublinear` the slope is d log(delta) / d log(t);
/// for `linear` it is d log(delta) / dt.
struct RateFit {
  RateModel model = RateModel::linear;
  double exponent_or_rate = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::size_t points = 0;
};

struct RatePoint {
  double t;
  double delta;
};

struct FitWindow {
  std::optional<double> t_lo;
  std::optional<double> t_hi;
};

inline constexpr std::size_t kMinFitPoints = 20;

namespace detail {

inline RateFit ols(const std::vector<double>& x, const std::vector<double>& y, RateModel model) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  RateFit fit;
  fit.model = model;
  fit.points = x.size();
  if (!(sxx > 0.0)) throw InsufficientDataError("rate fit needs at least two distinct t");
  fit.exponent_or_rate = sxy / sxx;
  fit.intercept = my - fit.exponent_or_rate * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.exponent_or_rate * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

}  // namespace detail

/// Points with delta > 0 inside the window. Without an explicit window the first
/// 10% of the t range and everything from the first delta < 1e2 eps on are dropped.
inline std::vector<RatePoint> fit_points(const std::vector<RatePoint>& traj, const FitWindow& window = {}) {
  std::vector<RatePoint> out;
  if (traj.empty()) return out;
  double lo, hi;
  if (window.t_lo || window.t_hi) {
    lo = window.t_lo.value_or(-kInf);
    hi = window.t_hi.value_or(kInf);
  } else {
    const double first = traj.front().t;
    const double last = traj.back().t;
    lo = first + 0.1 * (last - first);
    hi = kInf;
    for (const auto& p : traj) {
      if (p.delta < 1e2 * kMachineEpsilon) {
        hi = p.t;
        break;
      }
    }
    // The tail cut applies strictly before the floor is reached.
    if (std::isfinite(hi)) hi = std::nextafter(hi, -kInf);
  }
  for (const auto& p : traj)
    if (p.t >= lo && p.t <= hi && p.delta > 0.0 && std::isfinite(p.delta)) out.push_back(p);
  return out;
}

inline RateFit fit_model(const std::vector<RatePoint>& pts, RateModel model) {
  if (pts.size() < kMinFitPoints)
    throw InsufficientDataError("rate fit needs at least 20 points with positive delta, got " +
                                std::to_string(pts.size()));
  std::vector<double> x, y;
  x.reserve(pts.size());
  y.reserve(pts.size());
  for (const auto& p : pts) {
    if (model == RateModel::sublinear && !(p.t > 0.0))
      throw InsufficientDataError("log-log fit needs t > 0");
    x.push_back(model == RateModel::sublinear ? std::log(p.t) : p.t);
    y.push_back(std::log(p.delta));
  }
  RateFit fit = detail::ols(x, y, model);
  fit.t_lo = pts.front().t;
  fit.t_hi = pts.back().t;
  return fit;
}

/// Both models on the window; the one with the higher r^2 wins (ties go to linear).
inline RateFit fit_rate(const std::vector<RatePoint>& traj, const FitWindow& window = {}) {
  const auto pts = fit_points(traj, window);
  const RateFit lin = fit_model(pts, RateModel::linear);
  const RateFit sub = fit_model(pts, RateModel::sublinear);
  return sub.r_squared > lin.r_squared ? sub : lin;
}

inline std::vector<RatePoint> rate_points(const std::vector<IterateRecord>& records) {
  std::vector<RatePoint> out;
  out.reserve(records.size());
  for (const auto& r : records)
    if (r.delta) out.push_back({static_cast<double>(r.t), *r.delta});
  return out;
}

// ---------------------------------------------------------------------------
// Sampled inequality checks
// ---------------------------------------------------------------------------

struct Violation {
  std::vector<double> point;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

/// {checked, passed, worst_margin, violations}. Margin is lhs - rhs scaled so
/// that a negative value is a violation.
struct CheckReport {
  std::string name;
  long checked = 0;
  long passed = 0;
  double worst_margin = kInf;
  std::vector<Violation> violations;
  std::size_t max_violations = 20;

  bool ok() const { return checked > 0 && passed == checked; }

  /// Records lhs >= rhs (margin = lhs - rhs).
  void expect_ge(double lhs, double rhs, const Vec& point, const std::string& note = {}) {
    record(lhs - rhs, lhs, rhs, point, note);
  }
  void expect_le(double lhs, double rhs, const Vec& point, const std::string& note = {}) {
    record(rhs - lhs, lhs, rhs, point, note);
  }

  void merge(const CheckReport& other) {
    checked += other.checked;
    passed += other.passed;
    worst_margin = std::min(worst_margin, other.worst_margin);
    for (const auto& v : other.violations)
      if (violations.size() < max_violations) violations.push_back(v);
  }

 private:
  void record(double margin, double lhs, double rhs, const Vec& point, const std::string& note) {
    ++checked;
    if (std::isnan(margin)) margin = -kInf;
    worst_margin = std::min(worst_margin, margin);
    if (margin >= 0.0) {
      ++passed;
    } else if (violations.size() < max_violations) {
      violations.push_back({to_std(point), lhs, rhs, note});
    }
  }
};

inline constexpr double kInequalitySlack = 1e-9;

/// ||grad f|| >= C(theta) delta^(1 - xi) (1 - 1e-9) at every point.
inline CheckReport verify_nl(const Objective& obj, const std::vector<Vec>& points,
                             const std::function<double(const Vec&)>& c_fn, double xi) {
  CheckReport rep;
  rep.name = "nl:" + obj.name();
  const auto opt = obj.optimum_value();
  if (!opt) throw ArgumentError("NL verification needs a known optimum");
  for (const auto& p : points) {
    const double delta = std::abs(obj.value(p) - *opt);
    const double lhs = obj.gradient(p).norm();
    const double rhs = c_fn(p) * std::pow(delta, 1.0 - xi) * (1.0 - kInequalitySlack);
    rep.expect_ge(lhs, rhs, p);
  }
  return rep;
}

/// |v^T H v| <= beta(theta) (1 + 1e-6) for random unit v, with H v from
/// finite-difference Hessian-vector products. `abs_tol` absorbs the stencil error.
inline CheckReport verify_ns(const Objective& obj, const std::vector<Vec>& points,
                             const std::function<double(const Vec&)>& beta_fn, int directions_per_point,
                             std::uint64_t seed, double abs_tol = 0.0) {
  CheckReport rep;
  rep.name = "ns:" + obj.name();
  std::mt19937_64 rng(seed);
  for (const auto& p : points) {
    const double beta = beta_fn(p);
    for (int k = 0; k < directions_per_point; ++k) {
      const Vec v = random_unit_vector(p.size(), rng);
      const double quad = std::abs(v.dot(hessian_vector_product(obj, p, v)));
      rep.expect_le(quad, beta * (1.0 + 1e-6) + abs_tol, p);
    }
  }
  return rep;
}

}  // namespace nonuniform

#endif  // NONUNIFORM_ANALYSIS_HPP
