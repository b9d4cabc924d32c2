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

// Forward and backward Legendre transforms as evaluatable wrappers.
//
// The wrappers close over their source model. Hessian invertibility is only
// checked at the points where the wrapper is evaluated.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "echoprop/models.hpp"

namespace echoprop {

struct NewtonConfig {
  double tol = 1e-12;
  int max_iters = 50;
};

namespace detail {

/// Solves M z = r for a mass-like matrix, dividing exactly when M is diagonal.
inline Vec solve_mass(const Mat& m, const Vec& r) {
  const bool diagonal = (m - Mat(m.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (diagonal) {
    if ((m.diagonal().array() == 0.0).any()) throw SingularHessianError("Legendre transform: singular mass matrix");
    return r.cwiseQuotient(m.diagonal());
  }
  Eigen::FullPivLU<Mat> lu(m);
  if (!lu.isInvertible()) throw SingularHessianError("Legendre transform: singular mass matrix");
  return lu.solve(r);
}

/// Newton iteration for g(z) = target with Jacobian jac(z).
template <typename G, typename J>
Vec newton_solve(G&& g, J&& jac, const Vec& target, Vec z, const NewtonConfig& cfg, const char* what) {
  const double scale = std::max(1.0, target.lpNorm<Eigen::Infinity>());
  for (int it = 0; it <= cfg.max_iters; ++it) {
    const Vec r = g(z) - target;
    Eigen::FullPivLU<Mat> lu(jac(z));
    if (!lu.isInvertible()) throw SingularHessianError(std::string(what) + ": singular Hessian");
    if (r.lpNorm<Eigen::Infinity>() <= cfg.tol * scale) return z;
    if (it == cfg.max_iters) break;
    z -= lu.solve(r);
    if (!z.allFinite()) throw NumericalError(std::string(what) + ": Newton iterate became non-finite");
  }
  throw ConvergenceError(std::string(what) + ": Newton iteration did not converge");
}

}  // namespace detail

/// Velocity ṡ(s, p) solving p = ∂_ṡL(s, ṡ).
inline Vec velocity_from_momentum(const LagrangianModel& l, const Vec& s, const Vec& p, const ParamVector& theta,
                                  const Vec& x, const NewtonConfig& cfg = {}) {
  detail::require_dim(p.size(), l.state_dim(), "momentum");
  if (auto m = l.kinetic_mass(theta)) return detail::solve_mass(*m, p);
  return detail::newton_solve([&](const Vec& v) { return l.d_velocity(s, v, theta, x); },
                              [&](const Vec& v) { return l.velocity_hessian(s, v, theta, x); }, p,
                              Vec::Zero(p.size()), cfg, "forward Legendre transform");
}

/// Momentum p(s, ṡ) solving ṡ = ∂_pH(s, p).
inline Vec momentum_from_velocity(const HamiltonianModel& h, const Vec& s, const Vec& v, const ParamVector& theta,
                                  const Vec& x, const NewtonConfig& cfg = {}) {
  detail::require_dim(v.size(), h.state_dim(), "velocity");
  if (auto m = h.kinetic_mass(theta)) return *m * v;
  return detail::newton_solve([&](const Vec& p) { return h.d_momentum(PhaseState(s, p), theta, x); },
                              [&](const Vec& p) { return h.momentum_hessian(PhaseState(s, p), theta, x); }, v,
                              Vec::Zero(v.size()), cfg, "backward Legendre transform");
}

/// H(s, p) = pᵀṡ - L(s, ṡ) with ṡ = ṡ(s, p).
class LegendreHamiltonian final : public HamiltonianModel {
 public:
  explicit LegendreHamiltonian(std::shared_ptr<const LagrangianModel> l, NewtonConfig cfg = {})
      : l_(std::move(l)), cfg_(cfg) {}

  int state_dim() const override { return l_->state_dim(); }
  int param_dim() const override { return l_->param_dim(); }
  int input_dim() const override { return l_->input_dim(); }

  Vec velocity(const PhaseState& phi, const ParamVector& theta, const Vec& x) const {
    return velocity_from_momentum(*l_, phi.position, phi.momentum, theta, x, cfg_);
  }

  double value(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    const Vec v = velocity(phi, theta, x);
    return phi.momentum.dot(v) - l_->value(phi.position, v, theta, x);
  }
  // Envelope identities: the ṡ(s, p) dependence drops out because p = ∂_ṡL.
  Vec d_position(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    return -l_->d_position(phi.position, velocity(phi, theta, x), theta, x);
  }
  Vec d_momentum(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    return velocity(phi, theta, x);
  }
  Vec d_theta(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    return -l_->d_theta(phi.position, velocity(phi, theta, x), theta, x);
  }
  Mat momentum_hessian(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    const Mat hv = l_->velocity_hessian(phi.position, velocity(phi, theta, x), theta, x);
    Eigen::FullPivLU<Mat> lu(hv);
    if (!lu.isInvertible()) throw SingularHessianError("forward Legendre transform: singular velocity Hessian");
    return lu.inverse();
  }
  bool time_reversible() const override { return l_->reversible(); }
  bool separable() const override { return l_->separable(); }
  std::optional<Mat> kinetic_mass(const ParamVector& theta) const override { return l_->kinetic_mass(theta); }
  std::string id() const override { return "legendre(" + l_->id() + ")"; }

  const LagrangianModel& source() const noexcept { return *l_; }

 private:
  std::shared_ptr<const LagrangianModel> l_;
  NewtonConfig cfg_;
};

/// L(s, ṡ) = pᵀṡ - H(s, p) with p = p(s, ṡ).
class LegendreLagrangian final : public LagrangianModel {
 public:
  explicit LegendreLagrangian(std::shared_ptr<const HamiltonianModel> h, NewtonConfig cfg = {})
      : h_(std::move(h)), cfg_(cfg) {}

  int state_dim() const override { return h_->state_dim(); }
  int param_dim() const override { return h_->param_dim(); }
  int input_dim() const override { return h_->input_dim(); }

  Vec momentum(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const {
    return momentum_from_velocity(*h_, s, v, theta, x, cfg_);
  }

  double value(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    const Vec p = momentum(s, v, theta, x);
    return p.dot(v) - h_->value(PhaseState(s, p), theta, x);
  }
  Vec d_position(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    return -h_->d_position(PhaseState(s, momentum(s, v, theta, x)), theta, x);
  }
  Vec d_velocity(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    return momentum(s, v, theta, x);
  }
  Vec d_theta(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    return -h_->d_theta(PhaseState(s, momentum(s, v, theta, x)), theta, x);
  }
  Mat velocity_hessian(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    const Mat hp = h_->momentum_hessian(PhaseState(s, momentum(s, v, theta, x)), theta, x);
    Eigen::FullPivLU<Mat> lu(hp);
    if (!lu.isInvertible()) throw SingularHessianError("backward Legendre transform: singular momentum Hessian");
    return lu.inverse();
  }
  bool reversible() const override { return h_->time_reversible(); }
  std::optional<Mat> kinetic_mass(const ParamVector& theta) const override { return h_->kinetic_mass(theta); }
  std::string id() const override { return "legendre⁻¹(" + h_->id() + ")"; }

 private:
  std::shared_ptr<const HamiltonianModel> h_;
  NewtonConfig cfg_;
};

inline std::shared_ptr<const HamiltonianModel> forward_legendre(std::shared_ptr<const LagrangianModel> l,
                                                                NewtonConfig cfg = {}) {
  return std::make_shared<const LegendreHamiltonian>(std::move(l), cfg);
}

inline std::shared_ptr<const LagrangianModel> backward_legendre(std::shared_ptr<const HamiltonianModel> h,
                                                                NewtonConfig cfg = {}) {
  return std::make_shared<const LegendreLagrangian>(std::move(h), cfg);
}

}  // namespace echoprop
