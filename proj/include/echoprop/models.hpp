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

#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "echoprop/core.hpp"

namespace echoprop {

/// Lagrangian mechanics L(s, ṡ, θ, x) with hand-coded partial derivatives.
///
/// Implementations are immutable and may be evaluated concurrently.
class LagrangianModel {
 public:
  virtual ~LagrangianModel() = default;

  virtual int state_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual int input_dim() const = 0;

  virtual double value(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const = 0;
  virtual Vec d_position(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const = 0;
  virtual Vec d_velocity(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const = 0;
  virtual Vec d_theta(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const = 0;
  virtual Mat velocity_hessian(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const = 0;

  /// L(s, ṡ) = L(s, -ṡ) for every argument.
  virtual bool reversible() const = 0;

  /// If L = ½ṡᵀM(θ)ṡ - U(s, θ, x), returns M; the Legendre transform is then closed-form.
  virtual std::optional<Mat> kinetic_mass(const ParamVector& /*theta*/) const { return std::nullopt; }

  /// L = T(ṡ, θ) - U(s, θ, x); the partner Hamiltonian is then separable.
  virtual bool separable() const { return false; }

  virtual std::string id() const { return "lagrangian"; }
};

/// Hamiltonian mechanics H(s, p, θ, x).
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual int state_dim() const = 0;
  virtual int param_dim() const = 0;
  virtual int input_dim() const = 0;

  virtual double value(const PhaseState& phi, const ParamVector& theta, const Vec& x) const = 0;
  virtual Vec d_position(const PhaseState& phi, const ParamVector& theta, const Vec& x) const = 0;
  virtual Vec d_momentum(const PhaseState& phi, const ParamVector& theta, const Vec& x) const = 0;
  virtual Vec d_theta(const PhaseState& phi, const ParamVector& theta, const Vec& x) const = 0;

  /// ∂_pp H; needed by the backward Legendre transform.
  virtual Mat momentum_hessian(const PhaseState& phi, const ParamVector& theta, const Vec& x) const = 0;

  /// H(Σ_z Φ) = H(Φ) for every argument.
  virtual bool time_reversible() const = 0;

  /// ∂_s H independent of p and ∂_p H independent of s (explicit leapfrog).
  virtual bool separable() const { return false; }

  /// If H = ½pᵀM(θ)⁻¹p + U(s, θ, x), returns M.
  virtual std::optional<Mat> kinetic_mass(const ParamVector& /*theta*/) const { return std::nullopt; }

  virtual std::string id() const { return "hamiltonian"; }

  /// ∂_Φ H stacked as (∂_s H; ∂_p H).
  Vec d_phase(const PhaseState& phi, const ParamVector& theta, const Vec& x) const {
    Vec g(2 * phi.dim());
    g << d_position(phi, theta, x), d_momentum(phi, theta, x);
    return g;
  }
};

/// Per-time-step task cost c(s, p, y). Static and Lagrangian callers pass an
/// empty momentum.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual double value(const Vec& s, const Vec& p, const Vec& y) const = 0;
  virtual Vec d_position(const Vec& s, const Vec& p, const Vec& y) const = 0;
  virtual Vec d_momentum(const Vec& s, const Vec& p, const Vec& y) const = 0;

  /// True when c ignores the momentum argument.
  virtual bool position_only() const = 0;

  virtual std::string id() const { return "cost"; }
};

/// Weighted ℓ2 tracking cost on a selected subset of coordinates:
/// c = ½ w ‖s[sel] - y‖² + ½ w_p ‖p[sel] - y_p‖², where the momentum term is
/// present only when w_p != 0 and y carries the extra components.
class L2Cost final : public CostModel {
 public:
  /// selector: indices into s compared against y[0..|sel|).
  explicit L2Cost(std::vector<int> selector, double weight = 1.0, double momentum_weight = 0.0)
      : selector_(std::move(selector)), weight_(weight), momentum_weight_(momentum_weight) {
    detail::require(!selector_.empty(), "L2Cost: selector must be non-empty");
    for (int i : selector_) detail::require(i >= 0, "L2Cost: negative selector index");
    detail::require(std::isfinite(weight) && weight >= 0.0, "L2Cost: weight must be >= 0");
    detail::require(std::isfinite(momentum_weight) && momentum_weight >= 0.0, "L2Cost: momentum weight must be >= 0");
  }

  /// Cost on the first n coordinates.
  static std::shared_ptr<const L2Cost> first(int n, double weight = 1.0) {
    std::vector<int> sel(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sel[static_cast<std::size_t>(i)] = i;
    return std::make_shared<L2Cost>(std::move(sel), weight);
  }

  const std::vector<int>& selector() const noexcept { return selector_; }
  double weight() const noexcept { return weight_; }
  int target_dim() const noexcept { return static_cast<int>(selector_.size()); }

  double value(const Vec& s, const Vec& p, const Vec& y) const override {
    check(s, y);
    double acc = 0.0;
    for (std::size_t j = 0; j < selector_.size(); ++j) {
      const double r = s(selector_[j]) - y(static_cast<Eigen::Index>(j));
      acc += r * r;
    }
    double out = 0.5 * weight_ * acc;
    if (momentum_weight_ != 0.0) {
      check_momentum(p, y);
      double accp = 0.0;
      const auto off = static_cast<Eigen::Index>(selector_.size());
      for (std::size_t j = 0; j < selector_.size(); ++j) {
        const double r = p(selector_[j]) - y(off + static_cast<Eigen::Index>(j));
        accp += r * r;
      }
      out += 0.5 * momentum_weight_ * accp;
    }
    return out;
  }

  Vec d_position(const Vec& s, const Vec& /*p*/, const Vec& y) const override {
    check(s, y);
    Vec g = Vec::Zero(s.size());
    for (std::size_t j = 0; j < selector_.size(); ++j) {
      g(selector_[j]) += weight_ * (s(selector_[j]) - y(static_cast<Eigen::Index>(j)));
    }
    return g;
  }

  Vec d_momentum(const Vec& s, const Vec& p, const Vec& y) const override {
    Vec g = Vec::Zero(s.size());
    if (momentum_weight_ == 0.0) return g;
    check_momentum(p, y);
    const auto off = static_cast<Eigen::Index>(selector_.size());
    for (std::size_t j = 0; j < selector_.size(); ++j) {
      g(selector_[j]) += momentum_weight_ * (p(selector_[j]) - y(off + static_cast<Eigen::Index>(j)));
    }
    return g;
  }

  bool position_only() const override { return momentum_weight_ == 0.0; }

  std::string id() const override { return momentum_weight_ == 0.0 ? "l2" : "l2_phase"; }

 private:
  void check(const Vec& s, const Vec& y) const {
    for (int i : selector_) {
      if (i >= s.size()) throw DimensionError("L2Cost: selector index exceeds state dimension");
    }
    if (y.size() < static_cast<Eigen::Index>(selector_.size())) {
      throw DimensionError("L2Cost: target shorter than selector");
    }
  }
  void check_momentum(const Vec& p, const Vec& y) const {
    detail::require_dim(y.size(), 2 * static_cast<Eigen::Index>(selector_.size()), "L2Cost phase target");
    for (int i : selector_) {
      if (i >= p.size()) throw DimensionError("L2Cost: selector index exceeds momentum dimension");
    }
  }

  std::vector<int> selector_;
  double weight_;
  double momentum_weight_;
};

/// Maximum |H(Σ_z Φ) - H(Φ)| over random phase points in [-scale, scale].
inline double max_reversibility_defect(const HamiltonianModel& h, const ParamVector& theta, const Vec& x,
                                       int samples, std::uint64_t seed, double scale = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  const int d = h.state_dim();
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    PhaseState phi(Vec::NullaryExpr(d, [&](Eigen::Index) { return u(rng); }),
                   Vec::NullaryExpr(d, [&](Eigen::Index) { return u(rng); }));
    PhaseState flipped(phi.position, -phi.momentum);
    worst = std::max(worst, std::abs(h.value(flipped, theta, x) - h.value(phi, theta, x)));
  }
  return worst;
}

/// Maximum |L(s, -ṡ) - L(s, ṡ)| over random points in [-scale, scale].
inline double max_reversibility_defect(const LagrangianModel& l, const ParamVector& theta, const Vec& x,
                                       int samples, std::uint64_t seed, double scale = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  const int d = l.state_dim();
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    Vec s = Vec::NullaryExpr(d, [&](Eigen::Index) { return u(rng); });
    Vec v = Vec::NullaryExpr(d, [&](Eigen::Index) { return u(rng); });
    worst = std::max(worst, std::abs(l.value(s, -v, theta, x) - l.value(s, v, theta, x)));
  }
  return worst;
}

}  // namespace echoprop
