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

// Trajectory-level contrastive gradient estimators for Lagrangian systems.
//
// All three estimators share the integral term
//
//   I(β) = ∫ [∂_θ L_β(s^β_t, ṡ^β_t) - ∂_θ L_0(s^0_t, ṡ^0_t)] dt
//
// and differ in how the boundary residuals at t = 0 and t = T are handled:
//
//   CIVP  fixed (s_0, ṡ_0): residuals at T need ∂_θ s_T and d_θ ∂_ṡL_0 at T,
//         obtained here by re-integrating at θ ± ε (desk-scale validation only).
//   CBVP  fixed (s_0, s_T): residuals vanish; trajectories need a BVP solve.
//   PFVP  final state pinned to the free run's end: for reversible L and a
//         position-only cost one term at t = 0 survives, and trajectories come
//         from integrating forward from the velocity-reversed end state.
//
// The cost is θ-independent, so ∂_θ L_β = ∂_θ L_0 and ∂_ṡ L_β = ∂_ṡ L_0.

#pragma once

#include <optional>
#include <utility>

#include "echoprop/bvp.hpp"
#include "echoprop/dynamics.hpp"

namespace echoprop {

namespace detail {

inline void check_estimator_inputs(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta,
                                   const TimeGrid& grid, const Signal& x, const Signal& y, double beta,
                                   const char* who) {
  if (beta == 0.0 || !std::isfinite(beta)) throw PreconditionError(std::string(who) + ": beta must be finite and nonzero");
  require_dim(theta.dim(), l.param_dim(), who);
  check_signal(x, grid, l.input_dim(), who);
  if (!y.grid().aligned_with(grid)) throw DimensionError(std::string(who) + ": target not aligned with grid");
  if (!cost.position_only()) throw PreconditionError(std::string(who) + ": cost must depend on position only");
}

/// ∫ [∂_θ L(a_k, ȧ_k) - ∂_θ L(b_k, ḃ_k)] dt with both trajectories on the same grid.
inline Vec integral_term(const LagrangianModel& l, const ParamVector& theta, const Trajectory& nudged,
                         const Trajectory& free, const Signal& x) {
  return trapezoid(free.grid(), theta.dim(), [&](int k) {
    return Vec(l.d_theta(nudged.position(k), nudged.velocity(k), theta, x.at(k)) -
               l.d_theta(free.position(k), free.velocity(k), theta, x.at(k)));
  });
}

/// Runs f(+β) (and f(-β) when symmetric) and combines.
template <typename F>
Vec combine_nudging(F&& f, double beta, Nudging nudging) {
  if (nudging == Nudging::one_sided) return f(beta);
  return 0.5 * (f(beta) + f(-beta));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CIVP
// ---------------------------------------------------------------------------

struct CivpOptions {
  /// θ step for the boundary-residual probes.
  double fd_eps = 1e-5;
  bool include_boundary = true;
  /// Refuse to run with more parameters than this (2 re-integrations each).
  int max_params = 32;
  IntegratorConfig integrator;
};

inline GradientEstimate grad_civp(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta,
                                  const Civp& spec, const TimeGrid& grid, const Signal& x, const Signal& y,
                                  double beta, Nudging nudging = Nudging::symmetric, const CivpOptions& opt = {}) {
  const detail::Stopwatch clock;
  detail::check_estimator_inputs(l, cost, theta, grid, x, y, beta, "grad_civp");
  if (theta.dim() > opt.max_params) {
    throw PreconditionError("grad_civp: " + std::to_string(theta.dim()) + " parameters exceed the probe guard of " +
                            std::to_string(opt.max_params));
  }
  const int n = grid.n_steps();
  const Trajectory free = integrate_lagrangian_ivp(l, theta, spec.alpha, spec.gamma, grid, x, std::nullopt, opt.integrator);
  const Vec& s_T = free.position(n);
  const Vec pi_T = l.d_velocity(s_T, free.velocity(n), theta, x.at(n));

  // Columns: ∂_θi s_T and d_θi ∂_ṡL_0(s_T(θ), ṡ_T(θ), θ).
  Mat ds_T = Mat::Zero(l.state_dim(), theta.dim());
  Mat dpi_T = Mat::Zero(l.state_dim(), theta.dim());
  if (opt.include_boundary) {
    for (int i = 0; i < theta.dim(); ++i) {
      const ParamVector up = theta.shifted(i, opt.fd_eps);
      const ParamVector down = theta.shifted(i, -opt.fd_eps);
      const Trajectory tu = integrate_lagrangian_ivp(l, up, spec.alpha, spec.gamma, grid, x, std::nullopt, opt.integrator);
      const Trajectory td = integrate_lagrangian_ivp(l, down, spec.alpha, spec.gamma, grid, x, std::nullopt, opt.integrator);
      ds_T.col(i) = (tu.position(n) - td.position(n)) / (2.0 * opt.fd_eps);
      dpi_T.col(i) = (l.d_velocity(tu.position(n), tu.velocity(n), up, x.at(n)) -
                      l.d_velocity(td.position(n), td.velocity(n), down, x.at(n))) /
                     (2.0 * opt.fd_eps);
    }
  }

  auto delta = [&](double b) -> Vec {
    const Nudge nudge{b, cost, y};
    const Trajectory nudged =
        integrate_lagrangian_ivp(l, theta, spec.alpha, spec.gamma, grid, x, nudge, opt.integrator);
    Vec acc = detail::integral_term(l, theta, nudged, free, x);
    if (opt.include_boundary) {
      const Vec pi_T_beta = l.d_velocity(nudged.position(n), nudged.velocity(n), theta, x.at(n));
      acc += ds_T.transpose() * (pi_T_beta - pi_T);
      acc -= dpi_T.transpose() * (nudged.position(n) - s_T);
    }
    return acc / b;
  };

  GradientEstimate out(detail::combine_nudging(delta, beta, nudging), Method::civp, beta, nudging);
  out.seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// CBVP
// ---------------------------------------------------------------------------

inline GradientEstimate grad_cbvp(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta,
                                  const Cbvp& spec, const TimeGrid& grid, const Signal& x, const Signal& y,
                                  double beta, Nudging nudging = Nudging::symmetric, const CbvpRelaxConfig& cfg = {}) {
  const detail::Stopwatch clock;
  detail::check_estimator_inputs(l, cost, theta, grid, x, y, beta, "grad_cbvp");
  const CbvpResult free = solve_cbvp(l, theta, spec, grid, x, std::nullopt, cfg);

  auto delta = [&](double b) -> Vec {
    const Nudge nudge{b, cost, y};
    const CbvpResult nudged = solve_cbvp(l, theta, spec, grid, x, nudge, cfg, free.trajectory.positions());
    return detail::integral_term(l, theta, nudged.trajectory, free.trajectory, x) / b;
  };

  GradientEstimate out(detail::combine_nudging(delta, beta, nudging), Method::cbvp, beta, nudging);
  out.seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// PFVP
// ---------------------------------------------------------------------------

/// The free forward run and one velocity-reversed (possibly nudged) run.
///
/// The PFVP solution on forward time is s̃_t = reversed.position(n - k) with
/// velocity ṡ̃_t = -reversed.velocity(n - k); the reversed run reads inputs and
/// targets backwards so that step j of it sees x_{n-j}.
struct PfvpRun {
  Trajectory free;
  Trajectory reversed;
  double beta = 0.0;

  int n_steps() const { return free.grid().n_steps(); }
  const Vec& tilde_position(int k) const { return reversed.position(n_steps() - k); }
  Vec tilde_velocity(int k) const { return -reversed.velocity(n_steps() - k); }
};

struct PfvpOptions {
  /// θ step for ∂_θ∂_ṡ L_0 at (alpha, gamma).
  double fd_eps = 1e-5;
  IntegratorConfig integrator;
};

namespace detail {

inline void check_pfvp(const LagrangianModel& l, const CostModel& cost, const char* who) {
  if (!l.reversible()) throw PreconditionError(std::string(who) + ": Lagrangian must be time-reversible");
  if (!cost.position_only()) throw PreconditionError(std::string(who) + ": cost must depend on position only");
}

inline Trajectory pfvp_reversed(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta,
                                const Trajectory& free, const Signal& xr, const Signal& yr, double beta,
                                const IntegratorConfig& integ) {
  const int n = free.grid().n_steps();
  std::optional<Nudge> nudge;
  if (beta != 0.0) nudge.emplace(Nudge{beta, cost, yr});
  return integrate_lagrangian_ivp(l, theta, free.position(n), -free.velocity(n), free.grid(), xr, nudge, integ);
}

}  // namespace detail

inline PfvpRun run_pfvp(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta, const Pfvp& spec,
                        const TimeGrid& grid, const Signal& x, const Signal& y, double beta,
                        const IntegratorConfig& integ = {}) {
  detail::check_pfvp(l, cost, "run_pfvp");
  Trajectory free = integrate_lagrangian_ivp(l, theta, spec.alpha, spec.gamma, grid, x, std::nullopt, integ);
  Trajectory rev = detail::pfvp_reversed(l, cost, theta, free, x.time_reversed(), y.time_reversed(), beta, integ);
  return {std::move(free), std::move(rev), beta};
}

/// ∂_θ∂_ṡ L_0(alpha, gamma, θ) as a d × dim θ matrix, by central differences.
inline Mat mixed_theta_velocity_derivative(const LagrangianModel& l, const Vec& alpha, const Vec& gamma,
                                           const ParamVector& theta, const Vec& x0, double eps) {
  Mat out(l.state_dim(), theta.dim());
  for (int i = 0; i < theta.dim(); ++i) {
    out.col(i) = (l.d_velocity(alpha, gamma, theta.shifted(i, eps), x0) -
                  l.d_velocity(alpha, gamma, theta.shifted(i, -eps), x0)) /
                 (2.0 * eps);
  }
  return out;
}

inline GradientEstimate grad_pfvp(const LagrangianModel& l, const CostModel& cost, const ParamVector& theta,
                                  const Pfvp& spec, const TimeGrid& grid, const Signal& x, const Signal& y,
                                  double beta, Nudging nudging = Nudging::symmetric, const PfvpOptions& opt = {}) {
  const detail::Stopwatch clock;
  detail::check_estimator_inputs(l, cost, theta, grid, x, y, beta, "grad_pfvp");
  detail::check_pfvp(l, cost, "grad_pfvp");
  const int n = grid.n_steps();
  const Signal xr = x.time_reversed();
  const Signal yr = y.time_reversed();
  const Trajectory free =
      integrate_lagrangian_ivp(l, theta, spec.alpha, spec.gamma, grid, x, std::nullopt, opt.integrator);
  const Trajectory rev0 = detail::pfvp_reversed(l, cost, theta, free, xr, yr, 0.0, opt.integrator);
  const Mat mixed = mixed_theta_velocity_derivative(l, spec.alpha, spec.gamma, theta, x.at(0), opt.fd_eps);

  auto delta = [&](double b) -> Vec {
    const Trajectory revb = detail::pfvp_reversed(l, cost, theta, free, xr, yr, b, opt.integrator);
    // Forward-time index k of s̃ is reversed-run index n - k, which saw input x_k.
    Vec acc = trapezoid(grid, theta.dim(), [&](int k) {
      const int j = n - k;
      return Vec(l.d_theta(revb.position(j), -revb.velocity(j), theta, x.at(k)) -
                 l.d_theta(rev0.position(j), -rev0.velocity(j), theta, x.at(k)));
    });
    acc += mixed.transpose() * (revb.position(n) - rev0.position(n));
    return acc / b;
  };

  GradientEstimate out(detail::combine_nudging(delta, beta, nudging), Method::pfvp, beta, nudging);
  out.seconds = clock.seconds();
  return out;
}

}  // namespace echoprop
