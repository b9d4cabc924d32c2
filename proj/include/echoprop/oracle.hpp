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

// Ground-truth gradients by central finite differences over θ.
//
// Everything here re-runs complete forward solves per probe and only ever
// looks at the free (un-nudged) system.

#pragma once

#include <functional>
#include <optional>
#include <type_traits>
#include <variant>

#include "echoprop/bvp.hpp"
#include "echoprop/dynamics.hpp"

namespace echoprop {

using LossFn = std::function<double(const ParamVector&)>;

/// Component i = (loss(θ + ε e_i) - loss(θ - ε e_i)) / 2ε.
inline GradientEstimate fd_gradient(const LossFn& loss, const ParamVector& theta, double eps = 1e-5) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw PreconditionError("fd_gradient: eps must be positive");
  Vec g(theta.dim());
  for (int i = 0; i < theta.dim(); ++i) {
    const double up = loss(theta.shifted(i, eps));
    const double down = loss(theta.shifted(i, -eps));
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("fd_gradient: non-finite loss at parameter " + std::to_string(i));
    }
    g(i) = (up - down) / (2.0 * eps);
  }
  return GradientEstimate(std::move(g), Method::fd_oracle, 0.0, Nudging::one_sided);
}

/// Trapezoid integral of c(s_k, y_k) along a Lagrangian-view trajectory.
inline double cost_integral(const CostModel& cost, const Trajectory& traj, const Signal& y) {
  detail::require(cost.position_only(), "cost_integral: Lagrangian trajectories need a position-only cost");
  return trapezoid_scalar(traj.grid(), [&](int k) { return cost.value(traj.position(k), Vec(), y.at(k)); });
}

/// Trapezoid integral of c(s_k, p_k, y_k) along a Hamiltonian trajectory.
inline double phase_cost_integral(const CostModel& cost, const Trajectory& traj, const Signal& y) {
  return trapezoid_scalar(traj.grid(),
                          [&](int k) { return cost.value(traj.position(k), traj.momentum(k), y.at(k)); });
}

/// Cost functional C = ∫ c(s_t^0, y_t) dt along the free trajectory of the
/// given boundary regime. CIVP and PFVP share the same free trajectory.
inline double trajectory_loss(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta,
                              const BoundarySpec& spec, const TimeGrid& grid, const Signal& x, const Signal& y,
                              const CbvpRelaxConfig& cbvp_cfg = {}) {
  detail::check_signal(y, grid, y.dim(), "trajectory_loss target");
  const Trajectory traj = std::visit(
      [&](const auto& bc) -> Trajectory {
        using T = std::decay_t<decltype(bc)>;
        if constexpr (std::is_same_v<T, Cbvp>) {
          return solve_cbvp(l, theta, bc, grid, x, std::nullopt, cbvp_cfg).trajectory;
        } else {
          return integrate_lagrangian_ivp(l, theta, bc.alpha, bc.gamma, grid, x);
        }
      },
      spec);
  return cost_integral(cost, traj, y);
}

/// Cost functional along the forward run of a Hamiltonian system started at
/// initial_state(θ).
inline double hamiltonian_loss(const HamiltonianModel& h, const CostModel& cost, const ParamVector& theta,
                               const std::function<PhaseState(const ParamVector&)>& initial_state,
                               const TimeGrid& grid, const Signal& x, const Signal& y) {
  const Trajectory traj = integrate_hamiltonian(h, theta, initial_state(theta), grid, x);
  return phase_cost_integral(cost, traj, y);
}

}  // namespace echoprop
