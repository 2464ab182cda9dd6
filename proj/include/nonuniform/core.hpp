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

#ifndef NONUNIFORM_CORE_HPP
#define NONUNIFORM_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonuniform {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

constexpr double kMachineEpsilon = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to an operation (dimension mismatch, zero direction, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid model or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An objective returned a non-finite value where a finite one was required.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine (linear solve, eigen-decomposition) failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline const Vec& require_finite(const Vec& v, const char* what = "parameter vector") {
  if (!v.allFinite()) throw ArgumentError(std::string(what) + " has non-finite entries");
  return v;
}

inline double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Builds a vector from a brace list; convenient in tests and presets.
inline Vec make_vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

inline Vec to_vec(const std::vector<double>& xs) {
  return Eigen::Map<const Vec>(xs.data(), static_cast<Index>(xs.size()));
}

inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

// ---------------------------------------------------------------------------
// Objective interface
// ---------------------------------------------------------------------------

enum class Sense { minimize, maximize };

/// Non-uniform Lojasiewicz data at a point: ||grad f|| >= coefficient * delta^(1 - degree).
struct NlData {
  double coefficient = 0.0;
  double degree = 0.0;
};

class Objective;
Vec finite_diff_gradient(const Objective& obj, const Vec& theta, double h);
double default_fd_step(const Vec& theta);

/// A deterministic differentiable objective. Implementations are immutable
/// after construction, so one instance may be evaluated from many threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual Sense sense() const { return Sense::minimize; }
  virtual double value(const Vec& theta) const = 0;

  /// True when gradient() is analytic rather than the finite-difference fallback.
  virtual bool has_gradient() const { return false; }
  virtual Vec gradient(const Vec& theta) const {
    return finite_diff_gradient(*this, theta, default_fd_step(theta));
  }

  /// f(theta*) for minimization, or the supremum for maximization.
  virtual std::optional<double> optimum_value() const { return std::nullopt; }

  /// Non-uniform smoothness coefficient beta(theta), if the model supplies one.
  virtual std::optional<double> ns_coefficient(const Vec& /*theta*/) const { return std::nullopt; }

  /// True when ns_coefficient() is an exact analytic coefficient rather than a
  /// module-provided upper bound.
  virtual bool ns_is_exact() const { return false; }

  virtual std::optional<NlData> nl_data(const Vec& /*theta*/) const { return std::nullopt; }

  /// |f(theta) - f(theta*)|, or nullopt when the optimum is unknown.
  std::optional<double> suboptimality(double value_at_theta) const {
    auto opt = optimum_value();
    if (!opt) return std::nullopt;
    return std::abs(value_at_theta - *opt);
  }
  std::optional<double> suboptimality(const Vec& theta) const { return suboptimality(value(theta)); }
};

/// Objective assembled from callables. Used for the trivial test functions
/// (x^2, linear, constant) and for ad-hoc objectives in experiments.
class FunctionObjective final : public Objective {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;
  using BetaFn = std::function<double(const Vec&)>;

  FunctionObjective(std::string name, Index dim, ValueFn value, GradFn grad = {},
                    std::optional<double> optimum = std::nullopt, BetaFn beta = {},
                    Sense sense = Sense::minimize)
      : name_(std::move(name)),
        dim_(dim),
        value_(std::move(value)),
        grad_(std::move(grad)),
        beta_(std::move(beta)),
        optimum_(optimum),
        sense_(sense) {
    if (dim_ <= 0) throw ArgumentError("objective dimension must be positive");
    if (!value_) throw ArgumentError("objective needs a value function");
  }

  std::string name() const override { return name_; }
  Index dim() const override { return dim_; }
  Sense sense() const override { return sense_; }
  double value(const Vec& theta) const override { return value_(theta); }
  bool has_gradient() const override { return static_cast<bool>(grad_); }
  Vec gradient(const Vec& theta) const override {
    return grad_ ? grad_(theta) : Objective::gradient(theta);
  }
  std::optional<double> optimum_value() const override { return optimum_; }
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    if (!beta_) return std::nullopt;
    return beta_(theta);
  }
  bool ns_is_exact() const override { return static_cast<bool>(beta_); }

 private:
  std::string name_;
  Index dim_;
  ValueFn value_;
  GradFn grad_;
  BetaFn beta_;
  std::optional<double> optimum_;
  Sense sense_;
};

/// One recorded optimizer iterate.
struct IterateRecord {
  long t = 0;
  double value = 0.0;
  std::optional<double> delta;
  double grad_norm = 0.0;
  std::optional<double> ns_coeff;
  double effective_step = 0.0;
};

// ---------------------------------------------------------------------------
// Derivative oracles
// ---------------------------------------------------------------------------

/// h = eps^(1/3) * (1 + ||theta||_inf), the usual step for a central stencil.
inline double default_fd_step(const Vec& theta) {
  return std::cbrt(kMachineEpsilon) * (1.0 + inf_norm(theta));
}

/// Central-difference gradient: (f(theta + h e_i) - f(theta - h e_i)) / 2h.
inline Vec finite_diff_gradient(const Objective& obj, const Vec& theta, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  require_finite(theta);
  Vec g(theta.size());
  Vec probe = theta;
  for (Index i = 0; i < theta.size(); ++i) {
    probe(i) = theta(i) + h;
    const double fp = obj.value(probe);
    probe(i) = theta(i) - h;
    const double fm = obj.value(probe);
    probe(i) = theta(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw EvaluationError("non-finite objective value at a finite-difference probe of " +
                            obj.name());
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Vec finite_diff_gradient(const Objective& obj, const Vec& theta) {
  return finite_diff_gradient(obj, theta, default_fd_step(theta));
}

/// H(theta) v by central differences of the gradient along v/||v||, rescaled by ||v||.
inline Vec hessian_vector_product(const Objective& obj, const Vec& theta, const Vec& v, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite-difference step must be positive");
  if (v.size() != theta.size()) throw ArgumentError("direction dimension mismatch");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw ArgumentError("Hessian-vector product needs a nonzero direction");
  const Vec unit = v / norm;
  const Vec plus = theta + h * unit;
  const Vec minus = theta - h * unit;
  const Vec gp = obj.gradient(plus);
  const Vec gm = obj.gradient(minus);
  if (!gp.allFinite() || !gm.allFinite())
    throw EvaluationError("non-finite gradient while forming a Hessian-vector product");
  return (gp - gm) / (2.0 * h) * norm;
}

inline Vec hessian_vector_product(const Objective& obj, const Vec& theta, const Vec& v) {
  return hessian_vector_product(obj, theta, v, default_fd_step(theta));
}

/// Dense Hessian assembled column by column from Hessian-vector products and symmetrized.
inline Mat finite_diff_hessian(const Objective& obj, const Vec& theta) {
  const Index n = theta.size();
  Mat h(n, n);
  for (Index j = 0; j < n; ++j) h.col(j) = hessian_vector_product(obj, theta, Vec::Unit(n, j));
  return 0.5 * (h + h.transpose());
}

struct PowerIterationOptions {
  int iters = 200;
  double tol = 1e-10;
  std::uint64_t seed = 42;
};

inline Vec random_unit_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / norm;
}

/// |dominant eigenvalue| of the Hessian at theta by power iteration over
/// Hessian-vector products. Stops once successive Rayleigh quotients agree to tol.
inline double spectral_radius(const Objective& obj, const Vec& theta,
                              const PowerIterationOptions& opts = {}) {
  if (opts.iters < 1) throw ArgumentError("power iteration needs at least one iteration");
  if (!(opts.tol > 0.0)) throw ArgumentError("power iteration tolerance must be positive");
  require_finite(theta);
  const Index n = theta.size();
  std::mt19937_64 rng(opts.seed);

  Vec v = random_unit_vector(n, rng);
  Vec hv = hessian_vector_product(obj, theta, v);
  if (hv.norm() == 0.0) {
    // The first draw may sit in the null space; one fresh direction decides.
    v = random_unit_vector(n, rng);
    hv = hessian_vector_product(obj, theta, v);
    if (hv.norm() == 0.0) return 0.0;
  }

  double rq_prev = v.dot(hv);
  double estimate = hv.norm();
  for (int k = 1; k < opts.iters; ++k) {
    const double norm = hv.norm();
    if (norm == 0.0) break;
    v = hv / norm;
    hv = hessian_vector_product(obj, theta, v);
    const double rq = v.dot(hv);
    estimate = hv.norm();
    if (std::abs(rq - rq_prev) < opts.tol) break;
    rq_prev = rq;
  }
  return estimate;
}

// ---------------------------------------------------------------------------
// Small dense symmetric eigenproblems
// ---------------------------------------------------------------------------

/// Eigenvalues (ascending) of a small symmetric matrix by cyclic Jacobi rotations.
inline Vec symmetric_eigenvalues(const Mat& input, double tol = 1e-15, int max_sweeps = 100) {
  if (input.rows() != input.cols()) throw ArgumentError("eigenvalues need a square matrix");
  const Index n = input.rows();
  Mat a = 0.5 * (input + input.transpose());
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * scale) break;

    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= std::numeric_limits<double>::min()) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vec eig = a.diagonal();
  std::sort(eig.data(), eig.data() + n);
  return eig;
}

inline double symmetric_spectral_radius(const Mat& m) {
  const Vec eig = symmetric_eigenvalues(m);
  return std::max(std::abs(eig(0)), std::abs(eig(eig.size() - 1)));
}

}  // namespace nonuniform

#endif  // NONUNIFORM_CORE_HPP
