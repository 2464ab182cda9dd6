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

#ifndef NONUNIFORM_OBJECTIVES_HPP
#define NONUNIFORM_OBJECTIVES_HPP

#include "nonuniform/core.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <string>

namespace nonuniform {

// ---------------------------------------------------------------------------
// Softmax helpers
// ---------------------------------------------------------------------------

/// Numerically stable softmax (max-subtracted).
inline Vec softmax(const Vec& z) {
  if (z.size() == 0) throw ArgumentError("softmax of an empty vector");
  require_finite(z, "softmax input");
  const double zmax = z.maxCoeff();
  Vec e(z.size());
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    e(i) = std::exp(z(i) - zmax);
    total += e(i);
  }
  return e / total;
}

/// log-softmax without forming the probabilities.
inline Vec log_softmax(const Vec& z) {
  const double zmax = z.maxCoeff();
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) total += std::exp(z(i) - zmax);
  const double lse = zmax + std::log(total);
  return z.array() - lse;
}

/// Left-to-right dot product. Kept explicit so the bandit and S = 1 MDP paths
/// produce bit-identical sums.
inline double plain_dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += a(i) * b(i);
  return s;
}

inline double plain_norm(const Vec& a) { return std::sqrt(plain_dot(a, a)); }

/// H(pi) q with H(pi) = diag(pi) - pi pi^T, the softmax Jacobian.
inline Vec softmax_jacobian_apply(const Vec& pi, const Vec& q) {
  const double mean = plain_dot(pi, q);
  Vec out(pi.size());
  for (Index i = 0; i < pi.size(); ++i) out(i) = pi(i) * (q(i) - mean);
  return out;
}

inline Mat softmax_jacobian(const Vec& pi) {
  Mat h = -pi * pi.transpose();
  h.diagonal() += pi;
  return h;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void require_probability_vector(const Vec& y, const char* what) {
  if (y.size() == 0) throw ConfigError(std::string(what) + " is empty");
  if (!y.allFinite() || (y.array() < 0.0).any())
    throw ConfigError(std::string(what) + " must have non-negative finite entries");
  if (std::abs(y.sum() - 1.0) > 1e-9) throw ConfigError(std::string(what) + " must sum to 1");
}

// ---------------------------------------------------------------------------
// |x|^p
// ---------------------------------------------------------------------------

struct PowerEval {
  double value;
  double grad;
  double beta;
};

/// Value, derivative and curvature p(p-1)|x|^(p-2) of |x|^p. The curvature is
/// +inf at x = 0 when p < 2.
inline PowerEval power_eval(double p, double x) {
  if (!(p > 1.0)) throw ConfigError("power objective needs p > 1");
  const double ax = std::abs(x);
  const double sign = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  PowerEval out{};
  out.value = std::pow(ax, p);
  out.grad = p * std::pow(ax, p - 1.0) * sign;
  if (ax == 0.0) {
    out.beta = p < 2.0 ? kInf : (p == 2.0 ? 2.0 : 0.0);
  } else {
    out.beta = p * (p - 1.0) * std::pow(ax, p - 2.0);
  }
  return out;
}

class PowerObjective final : public Objective {
 public:
  explicit PowerObjective(double p) : p_(p) {
    if (!(p > 1.0)) throw ConfigError("power objective needs p > 1");
  }
  double p() const { return p_; }

  std::string name() const override {
    std::ostringstream os;
    os << "power:p=" << p_;
    return os.str();
  }
  Index dim() const override { return 1; }
  double value(const Vec& x) const override { return power_eval(p_, x(0)).value; }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& x) const override { return Vec::Constant(1, power_eval(p_, x(0)).grad); }
  std::optional<double> optimum_value() const override { return 0.0; }
  std::optional<double> ns_coefficient(const Vec& x) const override {
    return power_eval(p_, x(0)).beta;
  }
  bool ns_is_exact() const override { return true; }
  // |f'(x)| = p * delta^(1 - 1/p) holds with equality.
  std::optional<NlData> nl_data(const Vec&) const override { return NlData{p_, 1.0 / p_}; }

 private:
  double p_;
};

// ---------------------------------------------------------------------------
// Modified Huber loss: x^2 on |x| <= 1, 2|x| - 1 outside.
// ---------------------------------------------------------------------------

class HuberObjective final : public Objective {
 public:
  std::string name() const override { return "huber"; }
  Index dim() const override { return 1; }
  double value(const Vec& x) const override {
    const double ax = std::abs(x(0));
    return ax <= 1.0 ? ax * ax : 2.0 * ax - 1.0;
  }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& x) const override {
    const double v = x(0);
    if (std::abs(v) <= 1.0) return Vec::Constant(1, 2.0 * v);
    return Vec::Constant(1, v > 0.0 ? 2.0 : -2.0);
  }
  std::optional<double> optimum_value() const override { return 0.0; }
  // Curvature is 2 on the quadratic piece and 0 outside; 2 bounds every segment.
  std::optional<double> ns_coefficient(const Vec&) const override { return 2.0; }
  bool ns_is_exact() const override { return true; }
  // Convex case: ||f'|| >= delta / |x - x*|.
  std::optional<NlData> nl_data(const Vec& x) const override {
    const double ax = std::abs(x(0));
    return NlData{ax > 0.0 ? 1.0 / ax : kInf, 0.0};
  }
};

// ---------------------------------------------------------------------------
// Sigmoid with a quadratic core and quartic tails in pi = sigmoid(theta):
//   2 (pi - 1/2)^2             if |pi - 1/2| <= 0.2
//   25 (pi - 1/2)^4 + 0.04     otherwise
// ---------------------------------------------------------------------------

class SigmoidQuarticObjective final : public Objective {
 public:
  static constexpr double kBreak = 0.2;

  std::string name() const override { return "sigmoid-quartic"; }
  Index dim() const override { return 1; }
  double value(const Vec& theta) const override {
    const double e = sigmoid(theta(0)) - 0.5;
    return std::abs(e) <= kBreak ? 2.0 * e * e : 25.0 * e * e * e * e + 0.04;
  }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& theta) const override {
    const double pi = sigmoid(theta(0));
    const double e = pi - 0.5;
    const double df = std::abs(e) <= kBreak ? 4.0 * e : 100.0 * e * e * e;
    return Vec::Constant(1, pi * (1.0 - pi) * df);
  }
  std::optional<double> optimum_value() const override { return 0.0; }

  /// |f''(theta)| from the chain rule on the active branch.
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    const double pi = sigmoid(theta(0));
    const double e = pi - 0.5;
    const double s1 = pi * (1.0 - pi);     // d pi / d theta
    const double s2 = s1 * (1.0 - 2.0 * pi);  // d^2 pi / d theta^2
    double d1, d2;
    if (std::abs(e) <= kBreak) {
      d1 = 4.0 * e;
      d2 = 4.0;
    } else {
      d1 = 100.0 * e * e * e;
      d2 = 300.0 * e * e;
    }
    return std::abs(d2 * s1 * s1 + d1 * s2);
  }
  bool ns_is_exact() const override { return true; }

  /// Degree 1/4 with the pointwise coefficient |f'| / delta^(3/4). On the
  /// quartic branch |f'| = 100 pi (1 - pi) |pi - 1/2|^3 and delta <= 50 (pi - 1/2)^4,
  /// so the coefficient is at least 100 pi (1 - pi) / 50^(3/4) there.
  std::optional<NlData> nl_data(const Vec& theta) const override {
    const double delta = value(theta);
    if (delta == 0.0) return NlData{kInf, 0.25};
    return NlData{std::abs(gradient(theta)(0)) / std::pow(delta, 0.75), 0.25};
  }
};

// ---------------------------------------------------------------------------
// Softmax cross-entropy and squared-error objectives
// ---------------------------------------------------------------------------

/// D_KL(y || softmax(theta)). Gradient pi - y; entries of y equal to 0 contribute 0.
class SoftmaxKLObjective final : public Objective {
 public:
  explicit SoftmaxKLObjective(Vec y) : y_(std::move(y)) {
    require_probability_vector(y_, "softmax-kl target y");
  }
  const Vec& target() const { return y_; }

  std::string name() const override { return "softmax-kl"; }
  Index dim() const override { return y_.size(); }
  double value(const Vec& theta) const override {
    check_dim(theta);
    const Vec logp = log_softmax(theta);
    double kl = 0.0;
    for (Index a = 0; a < y_.size(); ++a)
      if (y_(a) > 0.0) kl += y_(a) * (std::log(y_(a)) - logp(a));
    return kl;
  }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& theta) const override {
    check_dim(theta);
    return softmax(theta) - y_;
  }
  // The infimum 0 is attained only for interior y.
  std::optional<double> optimum_value() const override { return 0.0; }
  /// Spectral radius of the local Hessian diag(pi) - pi pi^T.
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    return symmetric_spectral_radius(softmax_jacobian(softmax(theta)));
  }
  bool ns_is_exact() const override { return true; }
  std::optional<NlData> nl_data(const Vec& theta) const override {
    return NlData{std::sqrt(softmax(theta).minCoeff()), 0.5};
  }

 private:
  void check_dim(const Vec& theta) const {
    if (theta.size() != y_.size()) throw ArgumentError("softmax-kl: dimension mismatch");
  }
  Vec y_;
};

/// Symmetric K x K matrix S(i, j) = d/d theta_j [H(pi)(pi - y)]_i, written as
/// the four-term expansion. S is the Hessian of (1/2) ||softmax(theta) - y||^2,
/// so the Hessian of the squared error itself is 2 S.
inline Mat softmax_mse_hessian(const Vec& y, const Vec& theta) {
  if (y.size() != theta.size()) throw ArgumentError("softmax-mse hessian: dimension mismatch");
  const Vec pi = softmax(theta);
  const Vec diff = pi - y;
  const double pid = plain_dot(pi, diff);
  const double pipi = plain_dot(pi, pi);
  const Index k = pi.size();
  Vec g(k);  // g_i = pi_i - y_i - pi^T (pi - y)
  for (Index i = 0; i < k; ++i) g(i) = diff(i) - pid;

  Mat s(k, k);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < k; ++j) {
      const double kron = i == j ? 1.0 : 0.0;
      const double pij = pi(i) * pi(j);
      s(i, j) = kron * pi(j) * g(i)                              // (a)
                - pij * g(i)                                     // (b)
                - pij * g(j)                                     // (c)
                + pij * (kron - pi(i) - pi(j) + pipi);           // (d)
    }
  }
  return s;
}

/// ||softmax(theta) - y||_2^2.
class SoftmaxMSEObjective final : public Objective {
 public:
  explicit SoftmaxMSEObjective(Vec y) : y_(std::move(y)) {
    require_probability_vector(y_, "softmax-mse target y");
  }
  const Vec& target() const { return y_; }

  std::string name() const override { return "softmax-mse"; }
  Index dim() const override { return y_.size(); }
  double value(const Vec& theta) const override {
    check_dim(theta);
    return (softmax(theta) - y_).squaredNorm();
  }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& theta) const override {
    check_dim(theta);
    const Vec pi = softmax(theta);
    return 2.0 * softmax_jacobian_apply(pi, pi - y_);
  }
  std::optional<double> optimum_value() const override { return 0.0; }
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    return 2.0 * symmetric_spectral_radius(softmax_mse_hessian(y_, theta));
  }
  bool ns_is_exact() const override { return true; }
  std::optional<NlData> nl_data(const Vec& theta) const override {
    return NlData{2.0 * softmax(theta).minCoeff(), 0.5};
  }

 private:
  void check_dim(const Vec& theta) const {
    if (theta.size() != y_.size()) throw ArgumentError("softmax-mse: dimension mismatch");
  }
  Vec y_;
};

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Target used by the softmax objectives when a config does not give one.
inline Vec default_softmax_target() { return make_vec({0.5, 0.25, 0.25}); }

/// Builds an analytic objective from its string id: "power:p=<p>", "huber",
/// "sigmoid-quartic", "softmax-kl", "softmax-mse". The softmax objectives take
/// their target from `target` (default (1/2, 1/4, 1/4)).
inline std::unique_ptr<Objective> make_objective(const std::string& id,
                                                 std::optional<Vec> target = std::nullopt) {
  if (id.rfind("power", 0) == 0) {
    double p = 4.0;
    const auto colon = id.find(':');
    if (colon != std::string::npos) {
      const std::string arg = id.substr(colon + 1);
      if (arg.rfind("p=", 0) != 0) throw ConfigError("power objective id must be power:p=<value>");
      try {
        std::size_t used = 0;
        p = std::stod(arg.substr(2), &used);
        if (used != arg.size() - 2) throw std::invalid_argument(arg);
      } catch (const std::exception&) {
        throw ConfigError("cannot parse exponent in objective id '" + id + "'");
      }
    } else if (id != "power") {
      throw ConfigError("unknown objective id '" + id + "'");
    }
    return std::make_unique<PowerObjective>(p);
  }
  if (id == "huber") return std::make_unique<HuberObjective>();
  if (id == "sigmoid-quartic") return std::make_unique<SigmoidQuarticObjective>();
  if (id == "softmax-kl")
    return std::make_unique<SoftmaxKLObjective>(target.value_or(default_softmax_target()));
  if (id == "softmax-mse")
    return std::make_unique<SoftmaxMSEObjective>(target.value_or(default_softmax_target()));
  throw ConfigError("unknown objective id '" + id +
                    "' (expected power:p=<p>, huber, sigmoid-quartic, softmax-kl, softmax-mse)");
}

}  // namespace nonuniform

#endif  // NONUNIFORM_OBJECTIVES_HPP
