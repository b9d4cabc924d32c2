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

// Time integration of Hamiltonian and Lagrangian systems.
//
// Leapfrog is the generalized Störmer-Verlet scheme
//
//   p½   = p_k  - h/2 ∂_s H_β(s_k, p½, t_k)
//   s_k+1 = s_k + h/2 [∂_p H_β(s_k, p½, t_k) + ∂_p H_β(s_k+1, p½, t_k+1)]
//   p_k+1 = p½  - h/2 ∂_s H_β(s_k+1, p½, t_k+1)
//
// with H_β = H - β c. The implicit stages collapse to explicit updates for
// separable systems. Running it from a momentum-flipped end state with
// time-reversed inputs retraces the forward run up to round-off.

#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "echoprop/legendre.hpp"
#include "echoprop/models.hpp"

namespace echoprop {

enum class Scheme { leapfrog, rk4 };

struct IntegratorConfig {
  Scheme scheme = Scheme::leapfrog;
  /// Fixed-point iterations for the implicit leapfrog stages.
  int max_implicit_iters = 50;
  double implicit_tol = 1e-15;
};

/// Nudging term -β c(s, p, y_t) added to the Hamiltonian (+β c for Lagrangians).
struct Nudge {
  double beta;
  const CostModel& cost;
  const Signal& target;
};

inline PhaseState momentum_flip(const PhaseState& phi) { return {phi.position, -phi.momentum}; }

namespace detail {

class NudgedFlow {
 public:
  NudgedFlow(const HamiltonianModel& h, const ParamVector& theta, const Signal& x, const std::optional<Nudge>& nudge)
      : h_(h), theta_(theta), x_(x), nudge_(nudge && nudge->beta != 0.0 ? &*nudge : nullptr) {}

  Vec ds(const Vec& s, const Vec& p, int k) const {
    PhaseState phi(s, p);
    Vec g = h_.d_position(phi, theta_, x_.at(k));
    if (nudge_) g -= nudge_->beta * nudge_->cost.d_position(s, p, nudge_->target.at(k));
    return g;
  }

  Vec dp(const Vec& s, const Vec& p, int k) const {
    PhaseState phi(s, p);
    Vec g = h_.d_momentum(phi, theta_, x_.at(k));
    if (nudge_ && !nudge_->cost.position_only()) g -= nudge_->beta * nudge_->cost.d_momentum(s, p, nudge_->target.at(k));
    return g;
  }

  bool separable() const { return h_.separable() && (!nudge_ || nudge_->cost.position_only()); }

 private:
  const HamiltonianModel& h_;
  const ParamVector& theta_;
  const Signal& x_;
  const Nudge* nudge_;
};

inline bool converged(const Vec& next, const Vec& prev, double tol) {
  return (next - prev).lpNorm<Eigen::Infinity>() <= tol * std::max(1.0, next.lpNorm<Eigen::Infinity>());
}

inline void leapfrog_step(const NudgedFlow& f, Vec& s, Vec& p, int k, double h, const IntegratorConfig& cfg) {
  const bool sep = f.separable();
  const double half = 0.5 * h;

  Vec p_half = p - half * f.ds(s, p, k);
  if (!sep) {
    int it = 0;
    for (; it < cfg.max_implicit_iters; ++it) {
      Vec next = p - half * f.ds(s, p_half, k);
      const bool done = converged(next, p_half, cfg.implicit_tol);
      p_half = std::move(next);
      if (done) break;
    }
    if (it == cfg.max_implicit_iters) throw ConvergenceError("leapfrog: implicit momentum stage did not converge", k);
  }

  const Vec v_left = f.dp(s, p_half, k);
  Vec s_next = s + half * (v_left + f.dp(s, p_half, k + 1));
  if (!sep) {
    int it = 0;
    for (; it < cfg.max_implicit_iters; ++it) {
      Vec next = s + half * (v_left + f.dp(s_next, p_half, k + 1));
      const bool done = converged(next, s_next, cfg.implicit_tol);
      s_next = std::move(next);
      if (done) break;
    }
    if (it == cfg.max_implicit_iters) throw ConvergenceError("leapfrog: implicit position stage did not converge", k);
  }

  p = p_half - half * f.ds(s_next, p_half, k + 1);
  s = std::move(s_next);
}

// Inputs are held at the left sample for the two midpoint stages; the
// integrator only ever reads grid-aligned samples.
inline void rk4_step(const NudgedFlow& f, Vec& s, Vec& p, int k, double h) {
  auto rhs = [&](const Vec& ss, const Vec& pp, int kk, Vec& ds_out, Vec& dp_out) {
    ds_out = f.dp(ss, pp, kk);
    dp_out = -f.ds(ss, pp, kk);
  };
  Vec a1, b1, a2, b2, a3, b3, a4, b4;
  rhs(s, p, k, a1, b1);
  rhs(s + 0.5 * h * a1, p + 0.5 * h * b1, k, a2, b2);
  rhs(s + 0.5 * h * a2, p + 0.5 * h * b2, k, a3, b3);
  rhs(s + h * a3, p + h * b3, k + 1, a4, b4);
  s += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  p += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
}

inline void check_signal(const Signal& sig, const TimeGrid& grid, int dim, const char* what) {
  if (!sig.grid().aligned_with(grid)) throw DimensionError(std::string(what) + ": signal not aligned with grid");
  require_dim(sig.dim(), dim, what);
}

inline void check_nudge(const std::optional<Nudge>& nudge, const TimeGrid& grid) {
  if (!nudge) return;
  if (!std::isfinite(nudge->beta)) throw PreconditionError("nudge: beta must be finite");
  if (!nudge->target.grid().aligned_with(grid)) throw DimensionError("nudge: target not aligned with grid");
}

/// Non-owning shared_ptr for wrapping a borrowed model.
template <typename T>
std::shared_ptr<const T> borrow(const T& obj) {
  return std::shared_ptr<const T>(std::shared_ptr<const T>(), &obj);
}

}  // namespace detail

/// Integrates dΦ/dt = J ∂_Φ H - β J ∂_Φ c on the grid starting from phi0.
inline Trajectory integrate_hamiltonian(const HamiltonianModel& h, const ParamVector& theta, const PhaseState& phi0,
                                        const TimeGrid& grid, const Signal& x,
                                        const std::optional<Nudge>& nudge = std::nullopt,
                                        const IntegratorConfig& cfg = {}) {
  const int d = h.state_dim();
  detail::require_dim(theta.dim(), h.param_dim(), "integrate_hamiltonian θ");
  detail::require_dim(phi0.position.size(), d, "integrate_hamiltonian initial position");
  detail::require_dim(phi0.momentum.size(), d, "integrate_hamiltonian initial momentum");
  detail::check_signal(x, grid, h.input_dim(), "integrate_hamiltonian input");
  detail::check_nudge(nudge, grid);
  if (!phi0.position.allFinite() || !phi0.momentum.allFinite()) {
    throw NumericalError("integrate_hamiltonian: non-finite initial state", 0);
  }

  const detail::NudgedFlow flow(h, theta, x, nudge);
  Trajectory traj(grid, TrajectoryKind::hamiltonian);
  Vec s = phi0.position;
  Vec p = phi0.momentum;
  traj.push_back(s, p);
  const double dt = grid.dt();
  for (int k = 0; k < grid.n_steps(); ++k) {
    if (cfg.scheme == Scheme::leapfrog) {
      detail::leapfrog_step(flow, s, p, k, dt, cfg);
    } else {
      detail::rk4_step(flow, s, p, k, dt);
    }
    if (!s.allFinite() || !p.allFinite()) throw NumericalError("integrate_hamiltonian: integration diverged", k + 1);
    traj.push_back(s, p);
  }
  return traj;
}

/// Initial value problem for a Lagrangian, solved on the Legendre-partner
/// Hamiltonian flow. The returned trajectory stores (s_k, ṡ_k) with
/// ṡ_k = ∂_p H(s_k, p_k); states[0] is exactly (alpha, gamma).
inline Trajectory integrate_lagrangian_ivp(const LagrangianModel& l, const ParamVector& theta, const Vec& alpha,
                                           const Vec& gamma, const TimeGrid& grid, const Signal& x,
                                           const std::optional<Nudge>& nudge = std::nullopt,
                                           const IntegratorConfig& cfg = {}) {
  detail::require_dim(alpha.size(), l.state_dim(), "integrate_lagrangian_ivp alpha");
  detail::require_dim(gamma.size(), l.state_dim(), "integrate_lagrangian_ivp gamma");
  detail::check_signal(x, grid, l.input_dim(), "integrate_lagrangian_ivp input");
  if (nudge && !nudge->cost.position_only()) {
    throw PreconditionError("integrate_lagrangian_ivp: Lagrangian nudging needs a position-only cost");
  }
  const LegendreHamiltonian h(detail::borrow(l));
  const PhaseState phi0(alpha, l.d_velocity(alpha, gamma, theta, x.at(0)));
  const Trajectory ham = integrate_hamiltonian(h, theta, phi0, grid, x, nudge, cfg);

  std::vector<Vec> velocities;
  velocities.reserve(ham.size());
  velocities.push_back(gamma);
  for (int k = 1; k <= grid.n_steps(); ++k) {
    velocities.push_back(velocity_from_momentum(l, ham.position(k), ham.momentum(k), theta, x.at(k)));
  }
  return Trajectory(grid, TrajectoryKind::lagrangian, ham.positions(), std::move(velocities));
}

/// Euler-Lagrange residual at interior grid points k = 1..n_steps-1.
struct ElResidual {
  TimeGrid grid;
  std::vector<Vec> interior;

  /// Residual at grid index k (1 <= k <= n_steps - 1).
  const Vec& at(int k) const { return interior.at(static_cast<std::size_t>(k - 1)); }

  double max_norm() const {
    double m = 0.0;
    for (const auto& r : interior) m = std::max(m, r.lpNorm<Eigen::Infinity>());
    return m;
  }
};

/// EL_k = ∂_s L_β(s_k, ṡ_k) - (∂_ṡ L_β(k+1) - ∂_ṡ L_β(k-1)) / (2 dt), using the
/// stored velocities of a Lagrangian-view trajectory.
inline ElResidual euler_lagrange_residual(const LagrangianModel& l, const Trajectory& traj, const ParamVector& theta,
                                          const Signal& x, double beta = 0.0, const CostModel* cost = nullptr,
                                          const Signal* y = nullptr) {
  detail::require(traj.kind() == TrajectoryKind::lagrangian, "euler_lagrange_residual: needs a Lagrangian trajectory");
  if (traj.size() < 3) throw PreconditionError("euler_lagrange_residual: trajectory shorter than 3 points");
  detail::check_signal(x, traj.grid(), l.input_dim(), "euler_lagrange_residual input");
  const bool nudged = beta != 0.0;
  if (nudged) {
    detail::require(cost != nullptr && y != nullptr, "euler_lagrange_residual: nudged residual needs cost and target");
    detail::require(cost->position_only(), "euler_lagrange_residual: cost must be position-only");
  }
  const int n = traj.grid().n_steps();
  const double dt = traj.grid().dt();
  ElResidual out{traj.grid(), {}};
  out.interior.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 1; k < n; ++k) {
    Vec r = l.d_position(traj.position(k), traj.velocity(k), theta, x.at(k));
    if (nudged) r += beta * cost->d_position(traj.position(k), Vec(), y->at(k));
    const Vec fwd = l.d_velocity(traj.position(k + 1), traj.velocity(k + 1), theta, x.at(k + 1));
    const Vec bwd = l.d_velocity(traj.position(k - 1), traj.velocity(k - 1), theta, x.at(k - 1));
    r -= (fwd - bwd) / (2.0 * dt);
    out.interior.push_back(std::move(r));
  }
  return out;
}

/// Runs forward, flips momentum, runs again on time-reversed inputs, flips
/// back, and returns max_k ‖Φ_retraced[k] - Φ_forward[k]‖.
inline double echo_retrace_check(const HamiltonianModel& h, const ParamVector& theta, const PhaseState& phi0,
                                 const TimeGrid& grid, const Signal& x, const IntegratorConfig& cfg = {}) {
  const Trajectory fwd = integrate_hamiltonian(h, theta, phi0, grid, x, std::nullopt, cfg);
  const Signal xr = x.time_reversed();
  const Trajectory back = integrate_hamiltonian(h, theta, momentum_flip(fwd.back_phase()), grid, xr, std::nullopt, cfg);
  const int n = grid.n_steps();
  double worst = 0.0;
  for (int j = 0; j <= n; ++j) {
    const PhaseState retraced = momentum_flip(back.phase(j));
    const PhaseState original = fwd.phase(n - j);
    worst = std::max(worst, (retraced.concat() - original.concat()).norm());
  }
  return worst;
}

/// max_k |H(Φ_k) - H(Φ_0)| along a Hamiltonian trajectory.
inline double max_energy_drift(const HamiltonianModel& h, const ParamVector& theta, const Trajectory& traj,
                               const Signal& x) {
  const double e0 = h.value(traj.phase(0), theta, x.at(0));
  double worst = 0.0;
  for (int k = 1; k < static_cast<int>(traj.size()); ++k) {
    worst = std::max(worst, std::abs(h.value(traj.phase(k), theta, x.at(k)) - e0));
  }
  return worst;
}

}  // namespace echoprop
