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

// Uniform entry point to every trajectory estimator and its oracle for a
// (model pair, task) combination.

#pragma once

#include <string>

#include "echoprop/glep.hpp"
#include "echoprop/harness/task.hpp"
#include "echoprop/oracle.hpp"
#include "echoprop/rhel.hpp"

namespace echoprop {

class CompatibilityError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

struct EstimatorSettings {
  double fd_eps = 1e-5;
  double oracle_eps = 1e-5;
  CbvpRelaxConfig cbvp;
  IntegratorConfig integrator;
};

inline EstimatorSettings settings_from(const EstimatorConfig& e) {
  EstimatorSettings s;
  s.fd_eps = e.fd_eps;
  s.oracle_eps = e.oracle_eps;
  s.cbvp.tol = e.cbvp_tol;
  s.cbvp.max_sweeps = e.cbvp_max_sweeps;
  s.cbvp.tau_step = e.cbvp_tau_step;
  return s;
}

inline void check_compatible(const ModelPair& m, const Task& task, Method method) {
  switch (method) {
    case Method::static_ep:
      throw CompatibilityError("STATIC_EP works on energy models; trajectory tasks need CIVP, CBVP, PFVP or RHEL");
    case Method::rhel:
      if (!m.hamiltonian->time_reversible()) throw CompatibilityError("RHEL needs a momentum-flip invariant Hamiltonian");
      break;
    case Method::pfvp:
      if (!m.lagrangian->reversible()) throw CompatibilityError("PFVP needs a time-reversible Lagrangian");
      if (!task.cost->position_only()) throw CompatibilityError("PFVP needs a position-only cost");
      break;
    case Method::civp:
    case Method::cbvp:
    case Method::fd_oracle:
      break;
  }
}

/// C(θ) of the boundary regime the method estimates; CIVP, PFVP and RHEL
/// share the initial-value loss.
inline double task_loss(const ModelPair& m, const Task& task, const ParamVector& theta, Method method,
                        const EstimatorSettings& s = {}) {
  if (method == Method::cbvp) {
    return trajectory_loss(*m.lagrangian, *task.cost, theta, Cbvp{task.initial_position, task.final_position},
                           task.grid, task.x, task.y, s.cbvp);
  }
  return trajectory_loss(*m.lagrangian, *task.cost, theta, Civp{task.initial_position, task.initial_velocity}, task.grid,
                         task.x, task.y);
}

inline GradientEstimate oracle_gradient(const ModelPair& m, const Task& task, const ParamVector& theta, Method method,
                                        const EstimatorSettings& s = {}) {
  return fd_gradient([&](const ParamVector& t) { return task_loss(m, task, t, method, s); }, theta, s.oracle_eps);
}

inline GradientEstimate estimate_gradient(const ModelPair& m, const Task& task, const ParamVector& theta, Method method,
                                          double beta, Nudging nudging, const EstimatorSettings& s = {}) {
  check_compatible(m, task, method);
  const auto& l = *m.lagrangian;
  switch (method) {
    case Method::civp: {
      CivpOptions opt;
      opt.fd_eps = s.fd_eps;
      opt.integrator = s.integrator;
      return grad_civp(l, *task.cost, theta, Civp{task.initial_position, task.initial_velocity}, task.grid, task.x,
                       task.y, beta, nudging, opt);
    }
    case Method::cbvp:
      return grad_cbvp(l, *task.cost, theta, Cbvp{task.initial_position, task.final_position}, task.grid, task.x,
                       task.y, beta, nudging, s.cbvp);
    case Method::pfvp: {
      PfvpOptions opt;
      opt.fd_eps = s.fd_eps;
      opt.integrator = s.integrator;
      return grad_pfvp(l, *task.cost, theta, Pfvp{task.initial_position, task.initial_velocity}, task.grid, task.x,
                       task.y, beta, nudging, opt);
    }
    case Method::rhel: {
      const LagrangianInitialState init(m.lagrangian, task.initial_position, task.initial_velocity, task.x.at(0));
      RhelOptions opt;
      opt.fd_eps = s.fd_eps;
      opt.integrator = s.integrator;
      return grad_rhel(*m.hamiltonian, *task.cost, theta, init, task.grid, task.x, task.y, beta, nudging, opt);
    }
    case Method::fd_oracle:
      return oracle_gradient(m, task, theta, Method::civp, s);
    case Method::static_ep:
      break;
  }
  throw CompatibilityError("unsupported estimator");
}

}  // namespace echoprop
