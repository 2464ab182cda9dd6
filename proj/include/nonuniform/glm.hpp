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

#ifndef NONUNIFORM_GLM_HPP
#define NONUNIFORM_GLM_HPP

#include "nonuniform/core.hpp"
#include "nonuniform/objectives.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace nonuniform {

/// Realizable sigmoid GLM: y_i = sigmoid(phi_i^T theta*).
class GlmDataset {
 public:
  GlmDataset(Mat features, Vec theta_star) : phi_(std::move(features)), theta_star_(std::move(theta_star)) {
    if (phi_.rows() < 1 || phi_.cols() < 1) throw ConfigError("GLM needs at least one sample and one feature");
    if (theta_star_.size() != phi_.cols()) throw ConfigError("theta* dimension does not match features");
    if (!phi_.allFinite() || !theta_star_.allFinite())
      throw ConfigError("GLM features and theta* must be finite");
    const Index n = phi_.rows();
    y_.resize(n);
    for (Index i = 0; i < n; ++i) y_(i) = sigmoid(phi_.row(i).dot(theta_star_));
    if ((y_.array() <= 0.0).any() || (y_.array() >= 1.0).any())
      throw ConfigError("GLM targets saturate; reduce the norm of theta*");
    v_ = (y_.array() * (1.0 - y_.array())).minCoeff();
    max_phi_sq_ = phi_.rowwise().squaredNorm().maxCoeff();
    const Vec eig = symmetric_eigenvalues(phi_.transpose() * phi_ / static_cast<double>(n));
    const double top = eig(eig.size() - 1);
    lambda_phi_ = 0.0;
    for (Index k = 0; k < eig.size(); ++k) {
      if (eig(k) > 1e-10 * top) {
        lambda_phi_ = eig(k);
        break;
      }
    }
    if (!(lambda_phi_ > 0.0)) throw ConfigError("GLM features are all zero");
  }

  /// Rows i.i.d. standard normal, optionally scaled to unit norm; theta* standard
  /// normal, shrunk to norm 3 when longer.
  static GlmDataset generate(Index n, Index d, std::uint64_t seed, bool unit_features) {
    if (n < 1 || d < 1) throw ConfigError("GLM generator needs n >= 1 and d >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat phi = Mat::NullaryExpr(n, d, [&] { return normal(rng); });
    if (unit_features)
      for (Index i = 0; i < n; ++i) phi.row(i) /= phi.row(i).norm();
    Vec ts = Vec::NullaryExpr(d, [&] { return normal(rng); });
    if (ts.norm() > 3.0) ts *= 3.0 / ts.norm();
    return GlmDataset(std::move(phi), std::move(ts));
  }

  const Mat& features() const { return phi_; }
  const Vec& theta_star() const { return theta_star_; }
  const Vec& targets() const { return y_; }
  Index samples() const { return phi_.rows(); }
  Index dim() const { return phi_.cols(); }
  double lambda_phi() const { return lambda_phi_; }
  double v() const { return v_; }
  double max_feature_sq() const { return max_phi_sq_; }
  /// 3/8 max_i ||phi_i||^2.
  double beta_uniform() const { return 0.375 * max_phi_sq_; }

  void check_theta(const Vec& theta) const {
    if (theta.size() != dim()) throw ArgumentError("GLM: parameter dimension mismatch");
  }

 private:
  Mat phi_;
  Vec theta_star_;
  Vec y_;
  double lambda_phi_ = 0.0;
  double v_ = 0.0;
  double max_phi_sq_ = 0.0;
};

struct LossGrad {
  double loss;
  Vec grad;
};

inline Vec glm_predictions(const GlmDataset& ds, const Vec& theta) {
  ds.check_theta(theta);
  const Vec z = ds.features() * theta;
  return z.unaryExpr([](double x) { return sigmoid(x); });
}

/// L = mean (pi_i - y_i)^2 and its gradient (2/N) sum pi(1-pi)(pi - y) phi.
inline LossGrad glm_loss_grad(const GlmDataset& ds, const Vec& theta) {
  const Vec pi = glm_predictions(ds, theta);
  const double n = static_cast<double>(ds.samples());
  const Vec diff = pi - ds.targets();
  const Vec w = (pi.array() * (1.0 - pi.array()) * diff.array()).matrix();
  return {diff.squaredNorm() / n, (2.0 / n) * ds.features().transpose() * w};
}

/// (2/N) sum [pi(1-pi)(1-2pi)(pi - y) + pi^2 (1-pi)^2] phi phi^T.
inline Mat glm_hessian(const GlmDataset& ds, const Vec& theta) {
  const Vec pi = glm_predictions(ds, theta);
  const double n = static_cast<double>(ds.samples());
  Vec w(pi.size());
  for (Index i = 0; i < pi.size(); ++i) {
    const double s = pi(i) * (1.0 - pi(i));
    w(i) = s * (1.0 - 2.0 * pi(i)) * (pi(i) - ds.targets()(i)) + s * s;
  }
  return (2.0 / n) * ds.features().transpose() * w.asDiagonal() * ds.features();
}

/// u(theta) = min_i pi_i (1 - pi_i).
inline double glm_u(const GlmDataset& ds, const Vec& theta) {
  const Vec pi = glm_predictions(ds, theta);
  return (pi.array() * (1.0 - pi.array())).minCoeff();
}

/// 8 u min(u, v) sqrt(lambda_phi); ||grad L|| >= C sqrt(L).
inline double glm_nl_coefficient(const GlmDataset& ds, const Vec& theta) {
  const double u = glm_u(ds, theta);
  return 8.0 * u * std::min(u, ds.v()) * std::sqrt(ds.lambda_phi());
}

struct GlmSmoothness {
  double l1 = 0.0;
  double l0 = 0.0;
  double beta_ns = kInf;  // L1 ||grad|| + L0 ||grad||^2 / L, +inf at L = 0
  double beta_uniform = 0.0;
  double beta = 0.0;  // min of the two
  bool capped = false;  // the uniform bound was the smaller one
};

inline GlmSmoothness glm_smoothness(const GlmDataset& ds, const Vec& theta) {
  const auto lg = glm_loss_grad(ds, theta);
  const double u = glm_u(ds, theta);
  const double m = std::min(u, ds.v());
  const double lam = ds.lambda_phi();
  GlmSmoothness out;
  out.l1 = ds.max_feature_sq() / (32.0 * std::pow(m * std::sqrt(lam), 1.5));
  out.l0 = 17.0 * ds.max_feature_sq() / (512.0 * u * u * m * m * lam);
  out.beta_uniform = ds.beta_uniform();
  if (lg.loss > 0.0) {
    const double g = lg.grad.norm();
    out.beta_ns = out.l1 * g + out.l0 * g * g / lg.loss;
  }
  if (!std::isfinite(out.beta_ns) || out.beta_ns >= out.beta_uniform) {
    out.beta = out.beta_uniform;
    out.capped = true;
  } else {
    out.beta = out.beta_ns;
  }
  return out;
}

/// min(beta(theta), beta_unif); beta_unif at the optimum.
inline double glm_ns_coefficient(const GlmDataset& ds, const Vec& theta) {
  return glm_smoothness(ds, theta).beta;
}

class GlmObjective final : public Objective {
 public:
  explicit GlmObjective(GlmDataset ds) : ds_(std::move(ds)) {}
  const GlmDataset& dataset() const { return ds_; }

  std::string name() const override { return "glm"; }
  Index dim() const override { return ds_.dim(); }
  double value(const Vec& theta) const override { return glm_loss_grad(ds_, theta).loss; }
  bool has_gradient() const override { return true; }
  Vec gradient(const Vec& theta) const override { return glm_loss_grad(ds_, theta).grad; }
  std::optional<double> optimum_value() const override { return 0.0; }
  std::optional<double> ns_coefficient(const Vec& theta) const override {
    return glm_ns_coefficient(ds_, theta);
  }
  std::optional<NlData> nl_data(const Vec& theta) const override {
    return NlData{glm_nl_coefficient(ds_, theta), 0.5};
  }

 private:
  GlmDataset ds_;
};

}  // namespace nonuniform

#endif  // NONUNIFORM_GLM_HPP
