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

// Plain gradient-descent training driven by any trajectory estimator.

#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "echoprop/harness/estimators.hpp"

namespace echoprop {

struct TrainConfig {
  Method estimator = Method::rhel;
  double beta = 1e-3;
  Nudging nudging = Nudging::symmetric;
  double learning_rate = 0.05;
  int epochs = 200;
  std::uint64_t seed = 0;
  double init_scale = 0.2;
  EstimatorSettings settings;

  void validate() const {
    // lr = 0 is allowed: it freezes θ, which is useful as a baseline.
    detail::require(std::isfinite(learning_rate) && learning_rate >= 0.0, "TrainConfig: learning_rate must be >= 0");
    detail::require(epochs >= 1, "TrainConfig: epochs must be >= 1");
    detail::require(beta != 0.0 && std::isfinite(beta), "TrainConfig: beta must be finite and nonzero");
    detail::require(init_scale >= 0.0, "TrainConfig: init_scale must be >= 0");
  }
};

inline TrainConfig train_config_from(const ExperimentConfig& c) {
  TrainConfig t;
  t.estimator = c.estimator.method;
  t.beta = c.estimator.beta;
  t.nudging = c.estimator.nudging;
  t.learning_rate = c.train.learning_rate;
  t.epochs = c.train.epochs;
  t.seed = c.seed;
  t.init_scale = c.train.init_scale;
  t.settings = settings_from(c.estimator);
  return t;
}

inline Json to_json(const TrainConfig& t) {
  return Json{{"estimator", std::string(to_string(t.estimator))},
              {"beta", t.beta},
              {"nudging", std::string(to_string(t.nudging))},
              {"learning_rate", t.learning_rate},
              {"epochs", t.epochs},
              {"seed", t.seed},
              {"init_scale", t.init_scale}};
}

struct RunRecord {
  /// loss[e] is C(θ_e), evaluated before the update of epoch e.
  std::vector<double> loss;
  std::vector<double> grad_norm;
  std::vector<double> epoch_seconds;
  double wall_seconds = 0.0;
  ParamVector theta_initial;
  ParamVector theta_final;
  Json config;

  /// Equality of everything except timings.
  bool same_payload(const RunRecord& o) const {
    return loss == o.loss && grad_norm == o.grad_norm && theta_initial == o.theta_initial &&
           theta_final == o.theta_final && config == o.config;
  }

  Json payload_json() const {
    return Json{{"config", config},
                {"loss", loss},
                {"grad_norm", grad_norm},
                {"theta_initial", to_json(theta_initial.values())},
                {"theta_final", to_json(theta_final.values())}};
  }

  Json timings_json() const { return Json{{"wall_seconds", wall_seconds}, {"epoch_seconds", epoch_seconds}}; }

  /// Header: epoch,loss,grad_norm. Timings live in timings_json only, so the
  /// file is reproducible byte for byte.
  void write_csv(std::ostream& out) const {
    out << "epoch,loss,grad_norm\n";
    for (std::size_t e = 0; e < loss.size(); ++e) {
      out << e << ',' << detail::fmt(loss[e]) << ',' << detail::fmt(grad_norm[e]) << '\n';
    }
  }
};

/// θ ← θ - lr·Δ for cfg.epochs epochs starting from initial_theta(seed).
inline RunRecord train(const ModelPair& m, const Task& task, const TrainConfig& cfg) {
  cfg.validate();
  check_compatible(m, task, cfg.estimator);
  const detail::Stopwatch wall;
  RunRecord rec;
  rec.config = to_json(cfg);
  rec.config["task"] = task.name;
  rec.config["model"] = m.lagrangian->id();
  rec.theta_initial = initial_theta(m, cfg.seed, cfg.init_scale);
  ParamVector theta = rec.theta_initial;
  for (int e = 0; e < cfg.epochs; ++e) {
    const detail::Stopwatch clock;
    const double loss = task_loss(m, task, theta, cfg.estimator, cfg.settings);
    const GradientEstimate g = estimate_gradient(m, task, theta, cfg.estimator, cfg.beta, cfg.nudging, cfg.settings);
    if (!std::isfinite(loss) || !g.value.allFinite()) throw NumericalError("train: non-finite loss or gradient", e);
    rec.loss.push_back(loss);
    rec.grad_norm.push_back(g.value.norm());
    theta = ParamVector(Vec(theta.values() - cfg.learning_rate * g.value));
    rec.epoch_seconds.push_back(clock.seconds());
  }
  rec.theta_final = theta;
  rec.wall_seconds = wall.seconds();
  return rec;
}

}  // namespace echoprop
