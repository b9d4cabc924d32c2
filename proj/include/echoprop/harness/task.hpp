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

// Synthetic supervised tasks and the oscillator models they run on.

#pragma once

#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "echoprop/harness/config.hpp"
#include "echoprop/models.hpp"
#include "echoprop/oscillator.hpp"
#include "echoprop/zoo.hpp"

namespace echoprop {

struct Task {
  std::string name;
  TimeGrid grid;
  Signal x;
  Signal y;
  std::shared_ptr<const CostModel> cost;
  std::vector<int> output_selector;
  Vec initial_position;
  Vec initial_velocity;
  /// Right endpoint for the fixed-boundary regime.
  Vec final_position;
};

namespace detail {

inline Vec vec_or_zeros(const std::vector<double>& v, int d) {
  if (v.empty()) return Vec::Zero(d);
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

/// Scalar drive u(t) and per-output target r(t) of each task kind:
///   sine       u = a_x sin ωt,             r = a sin ωt
///   two_sines  u = a_x (sin ωt + sin ω₂t), r = a sin ωt + a₂ sin(ω₂t + φ₂)
///   step       u = a_x 1[t ≥ t₀],          r = a (1 - e^{-(t - t₀)/τ}) for t ≥ t₀
/// Every input channel carries u, every selected output tracks r.
inline Task make_task(const TaskConfig& cfg, int state_dim, int input_dim) {
  for (int i : cfg.output) {
    if (i < 0 || i >= state_dim) throw DimensionError("make_task: output index out of range");
  }
  const TimeGrid grid = TimeGrid::over(cfg.horizon, cfg.n_steps);
  auto drive = [&](double t) {
    switch (cfg.kind) {
      case TaskKind::sine: return cfg.drive_amplitude * std::sin(cfg.omega * t);
      case TaskKind::two_sines: return cfg.drive_amplitude * (std::sin(cfg.omega * t) + std::sin(cfg.omega2 * t));
      case TaskKind::step: return t >= cfg.step_time ? cfg.drive_amplitude : 0.0;
    }
    return 0.0;
  };
  auto target = [&](double t) {
    switch (cfg.kind) {
      case TaskKind::sine: return cfg.amplitude * std::sin(cfg.omega * t);
      case TaskKind::two_sines:
        return cfg.amplitude * std::sin(cfg.omega * t) + cfg.amplitude2 * std::sin(cfg.omega2 * t + cfg.phase2);
      case TaskKind::step:
        return t >= cfg.step_time ? cfg.amplitude * (1.0 - std::exp(-(t - cfg.step_time) / cfg.rise_time)) : 0.0;
    }
    return 0.0;
  };
  const int dy = static_cast<int>(cfg.output.size());
  return Task{std::string(to_string(cfg.kind)),
              grid,
              Signal::sample(grid, input_dim, [&](double t) { return Vec(Vec::Constant(input_dim, drive(t))); }),
              Signal::sample(grid, dy, [&](double t) { return Vec(Vec::Constant(dy, target(t))); }),
              std::make_shared<const L2Cost>(cfg.output, cfg.cost_weight),
              cfg.output,
              detail::vec_or_zeros(cfg.initial_position, state_dim),
              detail::vec_or_zeros(cfg.initial_velocity, state_dim),
              detail::vec_or_zeros(cfg.final_position, state_dim)};
}

/// Oscillator network with input weights only on the driven oscillators.
inline ModelPair make_model(const ModelConfig& cfg) {
  CouplingTopology topo;
  topo.kind = cfg.topology;
  topo.stiffness = cfg.stiffness;
  topo.floor = cfg.floor;
  topo.input_dim = cfg.input_dim;
  topo.learn_mass = cfg.learn_mass;
  topo.quartic = cfg.quartic;
  if (cfg.input_dim > 0) {
    topo.input_mask = Mat::Zero(cfg.dim, cfg.input_dim);
    for (int i : cfg.driven) {
      if (i < 0 || i >= cfg.dim) throw DimensionError("make_model: driven index out of range");
      topo.input_mask.row(i).setOnes();
    }
  }
  return make_oscillator_model(cfg.dim, topo);
}

/// reference_theta + scale·N(0, 1), drawn from a generator seeded with `seed`.
inline ParamVector initial_theta(const ModelPair& m, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v = reference_theta(*m.network).values();
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += scale * normal(rng);
  return ParamVector(v);
}

}  // namespace echoprop
