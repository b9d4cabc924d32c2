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

// Hamiltonian echo: a forward run from λ(θ), then a momentum-flipped run on
// time-reversed inputs with the cost switched on, and the gradient estimate
// built from the pair.
//
// Logical time of the forward phase is [-T, 0]. It is stored on the grid
// [0, T]: forward index k is logical time -T + k·dt. Echo index k is logical
// time k·dt and is paired with forward index n - k. Both phases share the
// sample at logical time 0.

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "echoprop/dynamics.hpp"

namespace echoprop {

/// λ(θ) with an optional analytic Jacobian ∂_θλ (2d × dim θ).
class InitialStateMap {
 public:
  virtual ~InitialStateMap() = default;

  virtual PhaseState operator()(const ParamVector& theta) const = 0;

  /// True when λ does not depend on θ; the boundary term is then skipped.
  virtual bool declared_zero() const { return false; }

  /// Analytic Jacobian if available; finite differences are used otherwise.
  virtual std::optional<Mat> jacobian(const ParamVector& /*theta*/) const { return std::nullopt; }
};

/// θ-independent initial state.
class FixedInitialState final : public InitialStateMap {
 public:
  explicit FixedInitialState(PhaseState state) : state_(std::move(state)) {}
  PhaseState operator()(const ParamVector&) const override { return state_; }
  bool declared_zero() const override { return true; }

 private:
  PhaseState state_;
};

/// λ(θ) = (α, ∂_ṡL_0(α, γ, θ, x_0)): the phase point matching a Lagrangian
/// initial condition (α, γ).
class LagrangianInitialState final : public InitialStateMap {
 public:
  LagrangianInitialState(std::shared_ptr<const LagrangianModel> l, Vec alpha, Vec gamma, Vec x0)
      : l_(std::move(l)), alpha_(std::move(alpha)), gamma_(std::move(gamma)), x0_(std::move(x0)) {
    detail::require(l_ != nullptr, "LagrangianInitialState: null model");
    detail::require_dim(alpha_.size(), l_->state_dim(), "LagrangianInitialState alpha");
    detail::require_dim(gamma_.size(), l_->state_dim(), "LagrangianInitialState gamma");
  }

  PhaseState operator()(const ParamVector& theta) const override {
    return {alpha_, l_->d_velocity(alpha_, gamma_, theta, x0_)};
  }

 private:
  std::shared_ptr<const LagrangianModel> l_;
  Vec alpha_;
  Vec gamma_;
  Vec x0_;
};

/// λ from a callable.
class FunctionInitialState final : public InitialStateMap {
 public:
  explicit FunctionInitialState(std::function<PhaseState(const ParamVector&)> f) : f_(std::move(f)) {
    detail::require(static_cast<bool>(f_), "FunctionInitialState: empty function");
  }
  PhaseState operator()(const ParamVector& theta) const override { return f_(theta); }

 private:
  std::function<PhaseState(const ParamVector&)> f_;
};

/// ∂_θλ: zero if declared so, else the analytic Jacobian, else central differences.
inline Mat initial_state_jacobian(const InitialStateMap& init, const ParamVector& theta, int state_dim,
                                  double eps = 1e-5) {
  if (init.declared_zero()) return Mat::Zero(2 * state_dim, theta.dim());
  if (auto j = init.jacobian(theta)) {
    if (j->rows() != 2 * state_dim || j->cols() != theta.dim()) throw DimensionError("initial state Jacobian shape");
    return *j;
  }
  Mat out(2 * state_dim, theta.dim());
  for (int i = 0; i < theta.dim(); ++i) {
    out.col(i) = (init(theta.shifted(i, eps)).concat() - init(theta.shifted(i, -eps)).concat()) / (2.0 * eps);
  }
  return out;
}

/// Σ_x: exchanges the position and momentum blocks of a stacked phase vector.
inline Vec block_swap(const Vec& phi) {
  const auto d = phi.size() / 2;
  Vec out(phi.size());
  out << phi.tail(d), phi.head(d);
  return out;
}

struct EchoRun {
  Trajectory forward;
  Trajectory echo;
  double beta = 0.0;

  int n_steps() const { return forward.grid().n_steps(); }
  /// Logical time of forward index k.
  double forward_time(int k) const { return -forward.grid().horizon() + k * forward.grid().dt(); }
  double echo_time(int k) const { return k * echo.grid().dt(); }
};

namespace detail {

inline void check_echo_inputs(const HamiltonianModel& h, const ParamVector& theta, const TimeGrid& grid,
                              const Signal& x, const Signal& y, double beta, const IntegratorConfig& cfg) {
  if (cfg.scheme != Scheme::leapfrog) throw PreconditionError("run_echo: echo runs require the leapfrog scheme");
  if (!h.time_reversible()) throw PreconditionError("run_echo: Hamiltonian must be invariant under momentum flip");
  if (!std::isfinite(beta)) throw PreconditionError("run_echo: beta must be finite");
  require_dim(theta.dim(), h.param_dim(), "run_echo θ");
  check_signal(x, grid, h.input_dim(), "run_echo input");
  if (!y.grid().aligned_with(grid)) throw DimensionError("run_echo: target not aligned with grid");
}

/// c(s, -p, y): echo states are momentum-flipped images of forward states,
/// so a momentum-dependent cost is read through Σ_z during the echo.
class FlippedCost final : public CostModel {
 public:
  explicit FlippedCost(const CostModel& c) : c_(c) {}
  double value(const Vec& s, const Vec& p, const Vec& y) const override { return c_.value(s, flip(p), y); }
  Vec d_position(const Vec& s, const Vec& p, const Vec& y) const override { return c_.d_position(s, flip(p), y); }
  Vec d_momentum(const Vec& s, const Vec& p, const Vec& y) const override {
    return c_.position_only() ? Vec(Vec::Zero(s.size())) : Vec(-c_.d_momentum(s, flip(p), y));
  }
  bool position_only() const override { return c_.position_only(); }
  std::string id() const override { return c_.id(); }

 private:
  static Vec flip(const Vec& p) { return -p; }
  const CostModel& c_;
};

inline Trajectory echo_phase(const HamiltonianModel& h, const CostModel& cost, const ParamVector& theta,
                             const Trajectory& forward, const Signal& xr, const Signal& yr, double beta,
                             const IntegratorConfig& cfg) {
  const FlippedCost echo_cost(cost);
  std::optional<Nudge> nudge;
  if (beta != 0.0) nudge.emplace(Nudge{beta, echo_cost, yr});
  return integrate_hamiltonian(h, theta, momentum_flip(forward.back_phase()), forward.grid(), xr, nudge, cfg);
}

}  // namespace detail

inline EchoRun run_echo(const HamiltonianModel& h, const CostModel& cost, const ParamVector& theta,
                        const InitialStateMap& init, const TimeGrid& grid, const Signal& x, const Signal& y,
                        double beta, const IntegratorConfig& cfg = {}) {
  detail::check_echo_inputs(h, theta, grid, x, y, beta, cfg);
  Trajectory fwd = integrate_hamiltonian(h, theta, init(theta), grid, x, std::nullopt, cfg);
  Trajectory echo = detail::echo_phase(h, cost, theta, fwd, x.time_reversed(), y.time_reversed(), beta, cfg);
  return {std::move(fwd), std::move(echo), beta};
}

/// max_k ‖echo[k] - Σ_z forward[n - k]‖ over the stacked phase vector.
inline double echo_deviation(const EchoRun& run) {
  const int n = run.n_steps();
  double worst = 0.0;
  for (int k = 0; k <= n; ++k) {
    const Vec ref = momentum_flip(run.forward.phase(n - k)).concat();
    worst = std::max(worst, (run.echo.phase(k).concat() - ref).norm());
  }
  return worst;
}

struct RhelOptions {
  /// θ step for ∂_θλ when no analytic Jacobian is given.
  double fd_eps = 1e-5;
  IntegratorConfig integrator;
};

/// Δ(β) = -(1/β)[∫(∂_θH(Φ^e_t) - ∂_θH(Φ_-t))dt - (∂_θλ)ᵀ Σ_x (Φ^e_T - Σ_z Φ_-T)].
inline GradientEstimate grad_rhel(const HamiltonianModel& h, const CostModel& cost, const ParamVector& theta,
                                  const InitialStateMap& init, const TimeGrid& grid, const Signal& x, const Signal& y,
                                  double beta, Nudging nudging = Nudging::symmetric, const RhelOptions& opt = {}) {
  const detail::Stopwatch clock;
  if (beta == 0.0 || !std::isfinite(beta)) throw PreconditionError("grad_rhel: beta must be finite and nonzero");
  detail::check_echo_inputs(h, theta, grid, x, y, beta, opt.integrator);
  const int n = grid.n_steps();
  const Signal xr = x.time_reversed();
  const Signal yr = y.time_reversed();
  const PhaseState lambda = init(theta);
  const Trajectory fwd = integrate_hamiltonian(h, theta, lambda, grid, x, std::nullopt, opt.integrator);
  const Mat jac = initial_state_jacobian(init, theta, h.state_dim(), opt.fd_eps);
  const Vec start = momentum_flip(fwd.phase(0)).concat();

  auto delta = [&](double b) -> Vec {
    const Trajectory echo = detail::echo_phase(h, cost, theta, fwd, xr, yr, b, opt.integrator);
    Vec acc = trapezoid(grid, theta.dim(), [&](int k) {
      return Vec(h.d_theta(echo.phase(k), theta, xr.at(k)) - h.d_theta(fwd.phase(n - k), theta, x.at(n - k)));
    });
    if (!init.declared_zero()) acc -= jac.transpose() * block_swap(echo.back_phase().concat() - start);
    return Vec(-acc / b);
  };

  Vec g = nudging == Nudging::one_sided ? delta(beta) : Vec(0.5 * (delta(beta) + delta(-beta)));
  GradientEstimate out(std::move(g), Method::rhel, beta, nudging);
  out.seconds = clock.seconds();
  return out;
}

}  // namespace echoprop
