// Copyright 2026 The echoprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Energy-based models on static inputs: free and nudged relaxation to a
// fixed point, and the two-point contrastive gradient estimate.

#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "echoprop/models.hpp"

namespace echoprop {

/// E(ŝ, θ, x0) with partial derivatives.
class EnergyModel {
 public:
  virtual ~EnergyModel() = default;

  virtual int state_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual int input_dim() const = 0;

  virtual double value(const Vec& s, const ParamVector& theta, const Vec& x0) const = 0;
  virtual Vec d_state(const Vec& s, const ParamVector& theta, const Vec& x0) const = 0;
  virtual Vec d_theta(const Vec& s, const ParamVector& theta, const Vec& x0) const = 0;

  virtual std::string id() const { return "energy"; }
};

/// E = ½θ‖ŝ‖² - ŝᵀx0 with a single scalar parameter θ > 0.
class QuadraticEnergy final : public EnergyModel {
 public:
  explicit QuadraticEnergy(int d = 1) : d_(d) { detail::require(d >= 1, "QuadraticEnergy: d must be >= 1"); }

  int state_dim() const override { return d_; }
  int param_dim() const override { return 1; }
  int input_dim() const override { return d_; }

  double value(const Vec& s, const ParamVector& theta, const Vec& x0) const override {
    return 0.5 * theta[0] * s.squaredNorm() - s.dot(x0);
  }
  Vec d_state(const Vec& s, const ParamVector& theta, const Vec& x0) const override { return theta[0] * s - x0; }
  Vec d_theta(const Vec& s, const ParamVector&, const Vec&) const override {
    Vec g(1);
    g(0) = 0.5 * s.squaredNorm();
    return g;
  }
  std::string id() const override { return "quadratic"; }

 private:
  int d_;
};

/// E = ½‖ŝ‖² - ½σᵀWσ - σᵀA x0 with σ = tanh(ŝ).
///
/// θ = [W upper off-diagonal entries (row-major) | A entries (row-major)],
/// W symmetric with zero diagonal.
class HopfieldEnergy final : public EnergyModel {
 public:
  HopfieldEnergy(int d, int input_dim) : d_(d), dx_(input_dim) {
    detail::require(d >= 1 && input_dim >= 0, "HopfieldEnergy: bad dimensions");
  }

  int state_dim() const override { return d_; }
  int param_dim() const override { return d_ * (d_ - 1) / 2 + d_ * dx_; }
  int input_dim() const override { return dx_; }

  Mat coupling(const ParamVector& theta) const {
    Mat w = Mat::Zero(d_, d_);
    int idx = 0;
    for (int i = 0; i < d_; ++i) {
      for (int j = i + 1; j < d_; ++j) {
        w(i, j) = w(j, i) = theta[idx++];
      }
    }
    return w;
  }

  Mat input_weights(const ParamVector& theta) const {
    Mat a(d_, dx_);
    int idx = d_ * (d_ - 1) / 2;
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < dx_; ++j) a(i, j) = theta[idx++];
    }
    return a;
  }

  double value(const Vec& s, const ParamVector& theta, const Vec& x0) const override {
    check(s, theta, x0);
    const Vec sig = s.array().tanh();
    return 0.5 * s.squaredNorm() - 0.5 * sig.dot(coupling(theta) * sig) - sig.dot(input_weights(theta) * x0);
  }

  Vec d_state(const Vec& s, const ParamVector& theta, const Vec& x0) const override {
    check(s, theta, x0);
    const Vec sig = s.array().tanh();
    const Vec dsig = 1.0 - sig.array().square();
    const Vec drive = coupling(theta) * sig + input_weights(theta) * x0;
    return s - Vec(dsig.cwiseProduct(drive));
  }

  Vec d_theta(const Vec& s, const ParamVector& theta, const Vec& x0) const override {
    check(s, theta, x0);
    const Vec sig = s.array().tanh();
    Vec g(param_dim());
    int idx = 0;
    for (int i = 0; i < d_; ++i) {
      for (int j = i + 1; j < d_; ++j) g(idx++) = -sig(i) * sig(j);
    }
    for (int i = 0; i < d_; ++i) {
      for (int j = 0; j < dx_; ++j) g(idx++) = -sig(i) * x0(j);
    }
    return g;
  }

  std::string id() const override { return "hopfield"; }

 private:
  void check(const Vec& s, const ParamVector& theta, const Vec& x0) const {
    detail::require_dim(s.size(), d_, "HopfieldEnergy state");
    detail::require_dim(theta.dim(), param_dim(), "HopfieldEnergy θ");
    detail::require_dim(x0.size(), dx_, "HopfieldEnergy input");
  }

  int d_;
  int dx_;
};

struct RelaxConfig {
  double step = 0.05;
  double tol = 1e-10;
  int max_iters = 100000;

  void validate() const {
    detail::require(step > 0.0 && std::isfinite(step), "RelaxConfig: step must be positive");
    detail::require(tol > 0.0 && std::isfinite(tol), "RelaxConfig: tol must be positive");
    detail::require(max_iters > 0, "RelaxConfig: max_iters must be positive");
  }
};

struct RelaxResult {
  Vec state;
  int iterations = 0;
  double residual = 0.0;
};

/// Cost term attached to a nudged relaxation.
struct StaticNudge {
  double beta;
  const CostModel& cost;
  const Vec& target;
};

/// Gradient descent ŝ ← ŝ - step·(∂_ŝE + β∂_ŝC) until the sup-norm of the
/// gradient is at most tol. If history is given, E + βC is appended before
/// every step and once at the returned point.
inline RelaxResult relax(const EnergyModel& model, const ParamVector& theta, const Vec& x0,
                         const std::optional<StaticNudge>& nudge, const Vec& s_init, const RelaxConfig& cfg = {},
                         std::vector<double>* history = nullptr) {
  cfg.validate();
  detail::require_dim(theta.dim(), model.param_dim(), "relax θ");
  detail::require_dim(x0.size(), model.input_dim(), "relax input");
  detail::require_dim(s_init.size(), model.state_dim(), "relax initial state");
  if (nudge && !std::isfinite(nudge->beta)) throw PreconditionError("relax: beta must be finite");
  const bool nudged = nudge && nudge->beta != 0.0;

  auto grad = [&](const Vec& s) {
    Vec g = model.d_state(s, theta, x0);
    if (nudged) g += nudge->beta * nudge->cost.d_position(s, Vec(), nudge->target);
    return g;
  };
  auto energy = [&](const Vec& s) {
    double e = model.value(s, theta, x0);
    if (nudged) e += nudge->beta * nudge->cost.value(s, Vec(), nudge->target);
    return e;
  };

  Vec s = s_init;
  for (int it = 0;; ++it) {
    const Vec g = grad(s);
    const double res = g.lpNorm<Eigen::Infinity>();
    if (history) history->push_back(energy(s));
    if (!std::isfinite(res)) throw NumericalError("relax: relaxation diverged", it);
    if (res <= cfg.tol) return {s, it, res};
    if (it >= cfg.max_iters) {
      throw ConvergenceError("relax: max_iters exceeded, residual " + detail::sci(res), it);
    }
    s -= cfg.step * g;
  }
}

/// One-sided: (∂_θE(ŝ_β) - ∂_θE(ŝ_0)) / β.
/// Symmetric: (∂_θE(ŝ_β) - ∂_θE(ŝ_-β)) / 2β.
/// Nudged relaxations start from the free fixed point.
inline GradientEstimate static_ep_gradient(const EnergyModel& model, const CostModel& cost, const ParamVector& theta,
                                           const Vec& x0, const Vec& y0, double beta,
                                           Nudging nudging = Nudging::symmetric, const RelaxConfig& cfg = {},
                                           const std::optional<Vec>& s_init = std::nullopt) {
  const detail::Stopwatch clock;
  if (beta == 0.0 || !std::isfinite(beta)) throw PreconditionError("static_ep_gradient: beta must be finite and nonzero");
  const Vec start = s_init.value_or(Vec::Zero(model.state_dim()));
  const Vec free = relax(model, theta, x0, std::nullopt, start, cfg).state;
  auto nudged = [&](double b) { return relax(model, theta, x0, StaticNudge{b, cost, y0}, free, cfg).state; };

  Vec g;
  if (nudging == Nudging::one_sided) {
    g = (model.d_theta(nudged(beta), theta, x0) - model.d_theta(free, theta, x0)) / beta;
  } else {
    g = (model.d_theta(nudged(beta), theta, x0) - model.d_theta(nudged(-beta), theta, x0)) / (2.0 * beta);
  }
  GradientEstimate out(std::move(g), Method::static_ep, beta, nudging);
  out.seconds = clock.seconds();
  return out;
}

/// C(ŝ_0(θ)) for the static oracle.
inline double static_loss(const EnergyModel& model, const CostModel& cost, const ParamVector& theta, const Vec& x0,
                          const Vec& y0, const RelaxConfig& cfg = {}, const std::optional<Vec>& s_init = std::nullopt) {
  const Vec s = relax(model, theta, x0, std::nullopt, s_init.value_or(Vec::Zero(model.state_dim())), cfg).state;
  return cost.value(s, Vec(), y0);
}

}  // namespace echoprop
