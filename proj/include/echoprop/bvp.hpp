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

// Boundary conditions for trajectory problems, and the relaxation solver
// for the two-point (position, position) boundary value problem.

#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "echoprop/dynamics.hpp"

namespace echoprop {

/// Fixed initial position and velocity.
struct Civp {
  Vec alpha;
  Vec gamma;
};

/// Fixed initial and final positions.
struct Cbvp {
  Vec alpha;
  Vec gamma_T;
};

/// Final state pinned to the free trajectory's end, which starts from (alpha, gamma).
struct Pfvp {
  Vec alpha;
  Vec gamma;
};

using BoundarySpec = std::variant<Civp, Cbvp, Pfvp>;

struct CbvpRelaxConfig {
  /// Pseudo-time step; defaults to 0.2·dt² when unset.
  std::optional<double> tau_step;
  double tol = 1e-10;
  int max_sweeps = 5'000'000;

  double step_for(const TimeGrid& grid) const {
    const double tau = tau_step.value_or(0.2 * grid.dt() * grid.dt());
    detail::require(tau > 0.0 && std::isfinite(tau), "CbvpRelaxConfig: tau_step must be positive");
    return tau;
  }
};

struct CbvpResult {
  Trajectory trajectory;
  int sweeps = 0;
  double residual = 0.0;
};

namespace detail {

struct OptionalNudge {
  double beta = 0.0;
  const CostModel* cost = nullptr;
  const Signal* target = nullptr;

  OptionalNudge() = default;
  explicit OptionalNudge(const std::optional<Nudge>& n) {
    if (n) {
      beta = n->beta;
      cost = &n->cost;
      target = &n->target;
    }
  }
  bool active() const { return cost != nullptr && beta != 0.0; }
};

}  // namespace detail

/// Discrete EL residual of a position sequence at interior nodes:
///
///   EL_k = ∂_s L(s_k, (s_k+1 - s_k-1)/2dt) + β ∂_s c(s_k)
///          - (π_k+½ - π_k-½) / dt,
///   π_k+½ = ½[∂_ṡ L(s_k, v_k+½, x_k) + ∂_ṡ L(s_k+1, v_k+½, x_k+1)],  v_k+½ = (s_k+1 - s_k)/dt.
inline std::vector<Vec> cbvp_discrete_residual(const LagrangianModel& l, const std::vector<Vec>& s,
                                               const ParamVector& theta, const TimeGrid& grid, const Signal& x,
                                               const std::optional<Nudge>& nudge = std::nullopt) {
  const int n = grid.n_steps();
  if (static_cast<int>(s.size()) != n + 1) throw DimensionError("cbvp_discrete_residual: position count mismatch");
  if (n < 2) throw PreconditionError("cbvp_discrete_residual: need at least 3 grid points");
  const detail::OptionalNudge nu(nudge);
  const double dt = grid.dt();

  std::vector<Vec> pi_half;
  pi_half.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const Vec v = (s[k + 1] - s[k]) / dt;
    pi_half.push_back(0.5 * (l.d_velocity(s[k], v, theta, x.at(k)) + l.d_velocity(s[k + 1], v, theta, x.at(k + 1))));
  }
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 1; k < n; ++k) {
    const Vec vc = (s[k + 1] - s[k - 1]) / (2.0 * dt);
    Vec r = l.d_position(s[k], vc, theta, x.at(k));
    if (nu.active()) r += nu.beta * nu.cost->d_position(s[k], Vec(), nu.target->at(k));
    r -= (pi_half[k] - pi_half[k - 1]) / dt;
    out.push_back(std::move(r));
  }
  return out;
}

/// Second-order finite-difference velocities for a position sequence.
inline std::vector<Vec> finite_difference_velocities(const std::vector<Vec>& s, double dt) {
  const std::size_t n = s.size() - 1;
  std::vector<Vec> v(s.size());
  if (n == 1) {
    v[0] = v[1] = (s[1] - s[0]) / dt;
    return v;
  }
  v[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / (2.0 * dt);
  v[n] = (3.0 * s[n] - 4.0 * s[n - 1] + s[n - 2]) / (2.0 * dt);
  for (std::size_t k = 1; k < n; ++k) v[k] = (s[k + 1] - s[k - 1]) / (2.0 * dt);
  return v;
}

/// Relaxes interior positions by explicit-Euler gradient flow on the action,
/// d_τ s = -EL, with endpoints pinned to (alpha, gamma_T). Jacobi sweeps.
inline CbvpResult solve_cbvp(const LagrangianModel& l, const ParamVector& theta, const Cbvp& spec,
                             const TimeGrid& grid, const Signal& x, const std::optional<Nudge>& nudge = std::nullopt,
                             const CbvpRelaxConfig& cfg = {},
                             const std::optional<std::vector<Vec>>& initial_guess = std::nullopt) {
  const int d = l.state_dim();
  detail::require_dim(spec.alpha.size(), d, "solve_cbvp alpha");
  detail::require_dim(spec.gamma_T.size(), d, "solve_cbvp gamma_T");
  detail::require_dim(theta.dim(), l.param_dim(), "solve_cbvp θ");
  detail::check_signal(x, grid, l.input_dim(), "solve_cbvp input");
  detail::check_nudge(nudge, grid);
  detail::require(cfg.tol > 0.0 && cfg.max_sweeps > 0, "CbvpRelaxConfig: tol and max_sweeps must be positive");
  if (nudge && !nudge->cost.position_only()) throw PreconditionError("solve_cbvp: cost must be position-only");
  const int n = grid.n_steps();
  if (n < 2) throw PreconditionError("solve_cbvp: need at least 3 grid points");

  std::vector<Vec> s;
  if (initial_guess) {
    if (static_cast<int>(initial_guess->size()) != n + 1) throw DimensionError("solve_cbvp: initial guess length");
    s = *initial_guess;
    for (const auto& v : s) detail::require_dim(v.size(), d, "solve_cbvp initial guess");
  } else {
    s.reserve(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
      const double w = static_cast<double>(k) / n;
      s.push_back((1.0 - w) * spec.alpha + w * spec.gamma_T);
    }
  }
  s.front() = spec.alpha;
  s.back() = spec.gamma_T;

  const double tau = cfg.step_for(grid);
  int sweeps = 0;
  double res = 0.0;
  for (;; ++sweeps) {
    const std::vector<Vec> el = cbvp_discrete_residual(l, s, theta, grid, x, nudge);
    res = 0.0;
    for (const auto& r : el) res = std::max(res, r.lpNorm<Eigen::Infinity>());
    if (!std::isfinite(res)) throw NumericalError("solve_cbvp: relaxation diverged", sweeps);
    if (res <= cfg.tol) break;
    if (sweeps >= cfg.max_sweeps) {
      throw ConvergenceError("solve_cbvp: max_sweeps exceeded, residual " + detail::sci(res), sweeps);
    }
    for (int k = 1; k < n; ++k) s[k] -= tau * el[k - 1];
  }

  std::vector<Vec> v = finite_difference_velocities(s, grid.dt());
  return {Trajectory(grid, TrajectoryKind::lagrangian, std::move(s), std::move(v)), sweeps, res};
}

}  // namespace echoprop
