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

// Networks of coupled oscillators, the concrete model zoo.
//
//   L = ½ṡᵀMṡ - ½sᵀK(θ)s - sᵀW(θ)x - (q/4) Σ s_i⁴
//   H = ½pᵀM⁻¹p + ½sᵀK(θ)s + sᵀW(θ)x + (q/4) Σ s_i⁴
//
// θ is laid out as [stiffness | input coupling | log masses]. The stiffness
// block is either the upper-triangular entries of K itself ("direct") or the
// upper-triangular entries of a factor A with K = AᵀA + floor·I ("factored",
// always positive definite). Masses are exp(θ) when learned, else 1.

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "echoprop/models.hpp"

namespace echoprop {

enum class Topology { diagonal, chain, full, custom };
enum class StiffnessParam { direct, factored };

/// Which couplings exist and how θ maps onto them.
struct CouplingTopology {
  Topology kind = Topology::chain;
  /// d×d 0/1 pattern, used when kind == custom. Must be symmetric.
  Mat custom_mask;
  StiffnessParam stiffness = StiffnessParam::factored;
  /// Diagonal added to AᵀA in factored mode.
  double floor = 0.1;
  int input_dim = 0;
  /// d×input_dim 0/1 pattern of learnable input weights; empty means dense.
  Mat input_mask;
  bool learn_mass = false;
  /// Fixed quartic self-interaction coefficient q >= 0.
  double quartic = 0.0;
};

/// Shared structure of a Legendre-partner (L, H) pair.
class OscillatorNetwork {
 public:
  OscillatorNetwork(int d, CouplingTopology topo) : d_(d), topo_(std::move(topo)) {
    if (d < 1) throw PreconditionError("oscillator model: state dimension must be positive");
    detail::require(topo_.input_dim >= 0, "oscillator model: negative input dimension");
    detail::require(topo_.quartic >= 0.0 && std::isfinite(topo_.quartic), "oscillator model: quartic must be >= 0");
    detail::require(topo_.floor >= 0.0, "oscillator model: floor must be >= 0");

    Mat mask = Mat::Zero(d, d);
    switch (topo_.kind) {
      case Topology::diagonal: mask.diagonal().setOnes(); break;
      case Topology::chain:
        mask.diagonal().setOnes();
        for (int i = 0; i + 1 < d; ++i) mask(i, i + 1) = mask(i + 1, i) = 1.0;
        break;
      case Topology::full: mask.setOnes(); break;
      case Topology::custom:
        detail::require(topo_.custom_mask.rows() == d && topo_.custom_mask.cols() == d,
                        "oscillator model: custom mask must be d×d");
        if (!topo_.custom_mask.isApprox(topo_.custom_mask.transpose(), 0.0)) {
          throw PreconditionError("oscillator model: coupling descriptor implies an asymmetric stiffness matrix");
        }
        mask = topo_.custom_mask;
        break;
    }
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) {
        if (mask(i, j) != 0.0) stiffness_entries_.emplace_back(i, j);
      }
    }

    const int dx = topo_.input_dim;
    if (dx > 0) {
      Mat imask = topo_.input_mask.size() == 0 ? Mat::Ones(d, dx) : topo_.input_mask;
      detail::require(imask.rows() == d && imask.cols() == dx, "oscillator model: input mask must be d×input_dim");
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < dx; ++j) {
          if (imask(i, j) != 0.0) input_entries_.emplace_back(i, j);
        }
      }
    }
    n_stiff_ = static_cast<int>(stiffness_entries_.size());
    n_input_ = static_cast<int>(input_entries_.size());
    n_mass_ = topo_.learn_mass ? d : 0;
  }

  int state_dim() const noexcept { return d_; }
  int input_dim() const noexcept { return topo_.input_dim; }
  int param_dim() const noexcept { return n_stiff_ + n_input_ + n_mass_; }
  const CouplingTopology& topology() const noexcept { return topo_; }
  int stiffness_params() const noexcept { return n_stiff_; }
  int input_params() const noexcept { return n_input_; }
  int mass_params() const noexcept { return n_mass_; }

  std::string id() const {
    static constexpr const char* names[] = {"diagonal", "chain", "full", "custom"};
    std::string s = "oscillator(d=" + std::to_string(d_) + "," + names[static_cast<int>(topo_.kind)] +
                    (topo_.stiffness == StiffnessParam::direct ? ",direct" : ",factored");
    if (topo_.learn_mass) s += ",mass";
    if (topo_.quartic != 0.0) s += ",quartic";
    return s + ")";
  }

  void check_theta(const ParamVector& theta) const { detail::require_dim(theta.dim(), param_dim(), "oscillator θ"); }

  /// Factor A (factored mode) with A(i,j) = θ for each stored (i, j).
  Mat factor(const ParamVector& theta) const {
    Mat a = Mat::Zero(d_, d_);
    for (int n = 0; n < n_stiff_; ++n) a(stiffness_entries_[n].first, stiffness_entries_[n].second) = theta[n];
    return a;
  }

  Mat stiffness(const ParamVector& theta) const {
    check_theta(theta);
    if (topo_.stiffness == StiffnessParam::factored) {
      const Mat a = factor(theta);
      Mat k = a.transpose() * a;
      k.diagonal().array() += topo_.floor;
      return k;
    }
    Mat k = Mat::Zero(d_, d_);
    for (int n = 0; n < n_stiff_; ++n) {
      const auto [i, j] = stiffness_entries_[n];
      k(i, j) = k(j, i) = theta[n];
    }
    return k;
  }

  Mat input_weights(const ParamVector& theta) const {
    Mat w = Mat::Zero(d_, topo_.input_dim);
    for (int n = 0; n < n_input_; ++n) w(input_entries_[n].first, input_entries_[n].second) = theta[n_stiff_ + n];
    return w;
  }

  Vec masses(const ParamVector& theta) const {
    if (!topo_.learn_mass) return Vec::Ones(d_);
    return theta.values().segment(n_stiff_ + n_input_, d_).array().exp();
  }

  /// Potential U(s) = ½sᵀKs + sᵀWx + (q/4)Σs⁴.
  double potential(const Vec& s, const ParamVector& theta, const Vec& x) const {
    check_state(s, x);
    double u = 0.5 * s.dot(stiffness(theta) * s);
    if (topo_.input_dim > 0) u += s.dot(input_weights(theta) * x);
    if (topo_.quartic != 0.0) u += 0.25 * topo_.quartic * s.array().pow(4).sum();
    return u;
  }

  /// ∂_s U.
  Vec force_gradient(const Vec& s, const ParamVector& theta, const Vec& x) const {
    check_state(s, x);
    Vec g = stiffness(theta) * s;
    if (topo_.input_dim > 0) g += input_weights(theta) * x;
    if (topo_.quartic != 0.0) g.array() += topo_.quartic * s.array().cube();
    return g;
  }

  /// ∂_θ U (the mass block is zero).
  Vec potential_d_theta(const Vec& s, const ParamVector& theta, const Vec& x) const {
    check_state(s, x);
    Vec g = Vec::Zero(param_dim());
    if (topo_.stiffness == StiffnessParam::factored) {
      const Vec as = factor(theta) * s;
      for (int n = 0; n < n_stiff_; ++n) {
        const auto [a, b] = stiffness_entries_[n];
        g(n) = as(a) * s(b);
      }
    } else {
      for (int n = 0; n < n_stiff_; ++n) {
        const auto [i, j] = stiffness_entries_[n];
        g(n) = i == j ? 0.5 * s(i) * s(i) : s(i) * s(j);
      }
    }
    for (int n = 0; n < n_input_; ++n) {
      const auto [i, j] = input_entries_[n];
      g(n_stiff_ + n) = s(i) * x(j);
    }
    return g;
  }

  /// ∂_θ of the kinetic energy ½ṡᵀMṡ at fixed velocity.
  Vec kinetic_d_theta_velocity(const Vec& v, const ParamVector& theta) const {
    Vec g = Vec::Zero(param_dim());
    if (topo_.learn_mass) {
      const Vec m = masses(theta);
      g.segment(n_stiff_ + n_input_, d_) = 0.5 * m.array() * v.array().square();
    }
    return g;
  }

  /// ∂_θ of the kinetic energy ½pᵀM⁻¹p at fixed momentum.
  Vec kinetic_d_theta_momentum(const Vec& p, const ParamVector& theta) const {
    Vec g = Vec::Zero(param_dim());
    if (topo_.learn_mass) {
      const Vec m = masses(theta);
      g.segment(n_stiff_ + n_input_, d_) = -0.5 * p.array().square() / m.array();
    }
    return g;
  }

 private:
  void check_state(const Vec& s, const Vec& x) const {
    detail::require_dim(s.size(), d_, "oscillator state");
    detail::require_dim(x.size(), topo_.input_dim, "oscillator input");
  }

  int d_;
  CouplingTopology topo_;
  std::vector<std::pair<int, int>> stiffness_entries_;
  std::vector<std::pair<int, int>> input_entries_;
  int n_stiff_ = 0;
  int n_input_ = 0;
  int n_mass_ = 0;
};

class OscillatorLagrangian final : public LagrangianModel {
 public:
  explicit OscillatorLagrangian(std::shared_ptr<const OscillatorNetwork> net) : net_(std::move(net)) {}

  int state_dim() const override { return net_->state_dim(); }
  int param_dim() const override { return net_->param_dim(); }
  int input_dim() const override { return net_->input_dim(); }

  double value(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    net_->check_theta(theta);
    detail::require_dim(v.size(), state_dim(), "oscillator velocity");
    const Vec m = net_->masses(theta);
    return 0.5 * v.dot(m.cwiseProduct(v)) - net_->potential(s, theta, x);
  }
  Vec d_position(const Vec& s, const Vec& /*v*/, const ParamVector& theta, const Vec& x) const override {
    return -net_->force_gradient(s, theta, x);
  }
  Vec d_velocity(const Vec& /*s*/, const Vec& v, const ParamVector& theta, const Vec& /*x*/) const override {
    detail::require_dim(v.size(), state_dim(), "oscillator velocity");
    return net_->masses(theta).cwiseProduct(v);
  }
  Vec d_theta(const Vec& s, const Vec& v, const ParamVector& theta, const Vec& x) const override {
    return net_->kinetic_d_theta_velocity(v, theta) - net_->potential_d_theta(s, theta, x);
  }
  Mat velocity_hessian(const Vec& /*s*/, const Vec& /*v*/, const ParamVector& theta, const Vec& /*x*/) const override {
    return net_->masses(theta).asDiagonal();
  }
  bool reversible() const override { return true; }
  bool separable() const override { return true; }
  std::optional<Mat> kinetic_mass(const ParamVector& theta) const override {
    return Mat(net_->masses(theta).asDiagonal());
  }
  std::string id() const override { return net_->id() + ".L"; }

  const OscillatorNetwork& network() const noexcept { return *net_; }

 private:
  std::shared_ptr<const OscillatorNetwork> net_;
};

class OscillatorHamiltonian final : public HamiltonianModel {
 public:
  explicit OscillatorHamiltonian(std::shared_ptr<const OscillatorNetwork> net) : net_(std::move(net)) {}

  int state_dim() const override { return net_->state_dim(); }
  int param_dim() const override { return net_->param_dim(); }
  int input_dim() const override { return net_->input_dim(); }

  double value(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    net_->check_theta(theta);
    detail::require_dim(phi.momentum.size(), state_dim(), "oscillator momentum");
    const Vec m = net_->masses(theta);
    return 0.5 * phi.momentum.dot(phi.momentum.cwiseQuotient(m)) + net_->potential(phi.position, theta, x);
  }
  Vec d_position(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    return net_->force_gradient(phi.position, theta, x);
  }
  Vec d_momentum(const PhaseState& phi, const ParamVector& theta, const Vec& /*x*/) const override {
    detail::require_dim(phi.momentum.size(), state_dim(), "oscillator momentum");
    return phi.momentum.cwiseQuotient(net_->masses(theta));
  }
  Vec d_theta(const PhaseState& phi, const ParamVector& theta, const Vec& x) const override {
    return net_->kinetic_d_theta_momentum(phi.momentum, theta) + net_->potential_d_theta(phi.position, theta, x);
  }
  Mat momentum_hessian(const PhaseState& /*phi*/, const ParamVector& theta, const Vec& /*x*/) const override {
    return net_->masses(theta).cwiseInverse().asDiagonal();
  }
  bool time_reversible() const override { return true; }
  bool separable() const override { return true; }
  std::optional<Mat> kinetic_mass(const ParamVector& theta) const override {
    return Mat(net_->masses(theta).asDiagonal());
  }
  std::string id() const override { return net_->id() + ".H"; }

  const OscillatorNetwork& network() const noexcept { return *net_; }

 private:
  std::shared_ptr<const OscillatorNetwork> net_;
};

/// Exact Legendre partners sharing one network definition.
struct ModelPair {
  std::shared_ptr<const LagrangianModel> lagrangian;
  std::shared_ptr<const HamiltonianModel> hamiltonian;
  std::shared_ptr<const OscillatorNetwork> network;

  int param_dim() const { return lagrangian->param_dim(); }
  int state_dim() const { return lagrangian->state_dim(); }
  int input_dim() const { return lagrangian->input_dim(); }
};

inline ModelPair make_oscillator_model(int d, const CouplingTopology& topology) {
  auto net = std::make_shared<const OscillatorNetwork>(d, topology);
  return {std::make_shared<const OscillatorLagrangian>(net), std::make_shared<const OscillatorHamiltonian>(net), net};
}

}  // namespace echoprop
