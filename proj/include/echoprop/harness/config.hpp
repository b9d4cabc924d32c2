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

// Experiment configuration: a JSON document with nested sections. Every
// field has a default, and unknown keys are rejected so typos surface early.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "echoprop/core.hpp"
#include "echoprop/io.hpp"
#include "echoprop/oscillator.hpp"

namespace echoprop {

class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class TaskKind { sine, two_sines, step };

inline std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::sine: return "sine";
    case TaskKind::two_sines: return "two_sines";
    case TaskKind::step: return "step";
  }
  return "?";
}

inline TaskKind parse_task_kind(std::string_view s) {
  for (TaskKind k : {TaskKind::sine, TaskKind::two_sines, TaskKind::step}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown task kind '" + std::string(s) + "'");
}

inline std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::diagonal: return "diagonal";
    case Topology::chain: return "chain";
    case Topology::full: return "full";
    case Topology::custom: return "custom";
  }
  return "?";
}

inline Topology parse_topology(std::string_view s) {
  for (Topology t : {Topology::diagonal, Topology::chain, Topology::full}) {
    if (s == to_string(t)) return t;
  }
  throw ConfigError("unknown topology '" + std::string(s) + "' (diagonal, chain, full)");
}

inline std::string_view to_string(StiffnessParam p) { return p == StiffnessParam::direct ? "direct" : "factored"; }

inline StiffnessParam parse_stiffness(std::string_view s) {
  if (s == "direct") return StiffnessParam::direct;
  if (s == "factored") return StiffnessParam::factored;
  throw ConfigError("unknown stiffness parametrization '" + std::string(s) + "'");
}

struct ModelConfig {
  int dim = 2;
  Topology topology = Topology::chain;
  StiffnessParam stiffness = StiffnessParam::factored;
  double floor = 0.1;
  int input_dim = 1;
  /// Oscillators that receive the input; the others are driven only through couplings.
  std::vector<int> driven{0};
  bool learn_mass = false;
  double quartic = 0.0;
};

struct TaskConfig {
  TaskKind kind = TaskKind::sine;
  double horizon = 6.0;
  int n_steps = 600;
  double omega = 1.0;
  double amplitude = 1.0;
  double omega2 = 2.3;
  double amplitude2 = 0.5;
  double phase2 = 0.4;
  double step_time = 0.5;
  double rise_time = 0.3;
  double drive_amplitude = 1.0;
  std::vector<int> output{0};
  double cost_weight = 1.0;
  /// Empty means zeros.
  std::vector<double> initial_position;
  std::vector<double> initial_velocity;
  /// CBVP right endpoint; empty means zeros.
  std::vector<double> final_position;
};

struct EstimatorConfig {
  Method method = Method::rhel;
  double beta = 1e-3;
  Nudging nudging = Nudging::symmetric;
  /// θ step for the CIVP probes and for FD Jacobians of λ(θ) or ∂_ṡL.
  double fd_eps = 1e-5;
  /// θ step for the finite-difference oracle.
  double oracle_eps = 1e-5;
  double cbvp_tol = 1e-10;
  int cbvp_max_sweeps = 5'000'000;
  std::optional<double> cbvp_tau_step;
};

struct TrainSection {
  double learning_rate = 0.05;
  int epochs = 200;
  /// θ0 = reference + init_scale·N(0, 1) drawn from the seed.
  double init_scale = 0.2;
};

struct CompareSection {
  std::vector<double> betas{1e-2, 1e-3, 1e-4};
  std::vector<Method> estimators{Method::civp, Method::pfvp, Method::rhel};
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  ModelConfig model;
  TaskConfig task;
  EstimatorConfig estimator;
  TrainSection train;
  CompareSection compare;
  /// gradcheck: pass when the relative error is at most this.
  double gradcheck_tolerance = 1e-3;
  /// retrace: pass when the β = 0 echo deviation is at most this.
  double retrace_tolerance = 1e-8;
};

namespace detail {

/// Reads keys from one JSON object and complains about leftovers.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type");
    }
  }

  void read_opt(const char* key, std::optional<double>& out) {
    seen_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return;
    double v = 0.0;
    read(key, v);
    out = v;
  }

  template <typename Parse, typename T>
  void read_enum(const char* key, T& out, Parse parse) {
    std::string s;
    read(key, s);
    if (j_.contains(key)) out = parse(s);
  }

  std::optional<Section> child(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require_cfg(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail

inline void validate(const ExperimentConfig& c) {
  using detail::require_cfg;
  const auto& m = c.model;
  require_cfg(m.dim >= 1, "model.dim must be >= 1");
  require_cfg(m.input_dim >= 0, "model.input_dim must be >= 0");
  require_cfg(m.floor >= 0.0, "model.floor must be >= 0");
  require_cfg(m.quartic >= 0.0, "model.quartic must be >= 0");
  for (int i : m.driven) require_cfg(i >= 0 && i < m.dim, "model.driven index out of range");
  const auto& t = c.task;
  require_cfg(t.horizon > 0.0 && std::isfinite(t.horizon), "task.horizon must be positive");
  require_cfg(t.n_steps >= 1, "task.n_steps must be >= 1");
  require_cfg(!t.output.empty(), "task.output must be non-empty");
  for (int i : t.output) require_cfg(i >= 0 && i < m.dim, "task.output index out of range");
  require_cfg(t.cost_weight >= 0.0, "task.cost_weight must be >= 0");
  require_cfg(t.rise_time > 0.0, "task.rise_time must be positive");
  auto vec_ok = [&](const std::vector<double>& v) { return v.empty() || static_cast<int>(v.size()) == m.dim; };
  require_cfg(vec_ok(t.initial_position) && vec_ok(t.initial_velocity) && vec_ok(t.final_position),
              "task initial/final vectors must have model.dim entries");
  const auto& e = c.estimator;
  require_cfg(e.beta != 0.0 && std::isfinite(e.beta), "estimator.beta must be finite and nonzero");
  require_cfg(e.fd_eps > 0.0 && e.oracle_eps > 0.0, "estimator eps values must be positive");
  require_cfg(e.cbvp_tol > 0.0 && e.cbvp_max_sweeps > 0, "estimator.cbvp settings must be positive");
  require_cfg(c.train.learning_rate >= 0.0 && std::isfinite(c.train.learning_rate), "train.learning_rate must be >= 0");
  require_cfg(c.train.epochs >= 1, "train.epochs must be >= 1");
  require_cfg(c.train.init_scale >= 0.0, "train.init_scale must be >= 0");
  require_cfg(!c.compare.betas.empty() && !c.compare.estimators.empty(), "compare lists must be non-empty");
  for (double b : c.compare.betas) require_cfg(b != 0.0 && std::isfinite(b), "compare.betas must be finite and nonzero");
  require_cfg(c.gradcheck_tolerance > 0.0 && c.retrace_tolerance > 0.0, "tolerances must be positive");
}

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  detail::Section root(j, "config");
  root.read("seed", c.seed);
  if (auto s = root.child("model")) {
    s->read("dim", c.model.dim);
    s->read_enum("topology", c.model.topology, parse_topology);
    s->read_enum("stiffness", c.model.stiffness, parse_stiffness);
    s->read("floor", c.model.floor);
    s->read("input_dim", c.model.input_dim);
    s->read("driven", c.model.driven);
    s->read("learn_mass", c.model.learn_mass);
    s->read("quartic", c.model.quartic);
    s->finish();
  }
  if (auto s = root.child("task")) {
    auto& t = c.task;
    s->read_enum("kind", t.kind, parse_task_kind);
    s->read("horizon", t.horizon);
    s->read("n_steps", t.n_steps);
    s->read("omega", t.omega);
    s->read("amplitude", t.amplitude);
    s->read("omega2", t.omega2);
    s->read("amplitude2", t.amplitude2);
    s->read("phase2", t.phase2);
    s->read("step_time", t.step_time);
    s->read("rise_time", t.rise_time);
    s->read("drive_amplitude", t.drive_amplitude);
    s->read("output", t.output);
    s->read("cost_weight", t.cost_weight);
    s->read("initial_position", t.initial_position);
    s->read("initial_velocity", t.initial_velocity);
    s->read("final_position", t.final_position);
    s->finish();
  }
  auto parse_m = [](std::string_view v) {
    try {
      return parse_method(v);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  };
  auto parse_n = [](std::string_view v) {
    try {
      return parse_nudging(v);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  };
  if (auto s = root.child("estimator")) {
    auto& e = c.estimator;
    s->read_enum("method", e.method, parse_m);
    s->read("beta", e.beta);
    s->read_enum("nudging", e.nudging, parse_n);
    s->read("fd_eps", e.fd_eps);
    s->read("oracle_eps", e.oracle_eps);
    s->read("cbvp_tol", e.cbvp_tol);
    s->read("cbvp_max_sweeps", e.cbvp_max_sweeps);
    s->read_opt("cbvp_tau_step", e.cbvp_tau_step);
    s->finish();
  }
  if (auto s = root.child("train")) {
    s->read("learning_rate", c.train.learning_rate);
    s->read("epochs", c.train.epochs);
    s->read("init_scale", c.train.init_scale);
    s->finish();
  }
  if (auto s = root.child("compare")) {
    s->read("betas", c.compare.betas);
    std::vector<std::string> names;
    s->read("estimators", names);
    if (!names.empty()) {
      c.compare.estimators.clear();
      for (const auto& n : names) c.compare.estimators.push_back(parse_m(n));
    }
    s->finish();
  }
  if (auto s = root.child("gradcheck")) {
    s->read("tolerance", c.gradcheck_tolerance);
    s->finish();
  }
  if (auto s = root.child("retrace")) {
    s->read("tolerance", c.retrace_tolerance);
    s->finish();
  }
  root.finish();
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_json(read_json(path));
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
}

/// Fully expanded snapshot, including defaults.
inline Json to_json(const ExperimentConfig& c) {
  Json methods = Json::array();
  for (Method m : c.compare.estimators) methods.push_back(std::string(to_string(m)));
  const auto& t = c.task;
  const auto& e = c.estimator;
  return Json{
      {"seed", c.seed},
      {"model",
       {{"dim", c.model.dim},
        {"topology", std::string(to_string(c.model.topology))},
        {"stiffness", std::string(to_string(c.model.stiffness))},
        {"floor", c.model.floor},
        {"input_dim", c.model.input_dim},
        {"driven", c.model.driven},
        {"learn_mass", c.model.learn_mass},
        {"quartic", c.model.quartic}}},
      {"task",
       {{"kind", std::string(to_string(t.kind))},
        {"horizon", t.horizon},
        {"n_steps", t.n_steps},
        {"omega", t.omega},
        {"amplitude", t.amplitude},
        {"omega2", t.omega2},
        {"amplitude2", t.amplitude2},
        {"phase2", t.phase2},
        {"step_time", t.step_time},
        {"rise_time", t.rise_time},
        {"drive_amplitude", t.drive_amplitude},
        {"output", t.output},
        {"cost_weight", t.cost_weight},
        {"initial_position", t.initial_position},
        {"initial_velocity", t.initial_velocity},
        {"final_position", t.final_position}}},
      {"estimator",
       {{"method", std::string(to_string(e.method))},
        {"beta", e.beta},
        {"nudging", std::string(to_string(e.nudging))},
        {"fd_eps", e.fd_eps},
        {"oracle_eps", e.oracle_eps},
        {"cbvp_tol", e.cbvp_tol},
        {"cbvp_max_sweeps", e.cbvp_max_sweeps},
        {"cbvp_tau_step", e.cbvp_tau_step ? Json(*e.cbvp_tau_step) : Json(nullptr)}}},
      {"train",
       {{"learning_rate", c.train.learning_rate}, {"epochs", c.train.epochs}, {"init_scale", c.train.init_scale}}},
      {"compare", {{"betas", c.compare.betas}, {"estimators", methods}}},
      {"gradcheck", {{"tolerance", c.gradcheck_tolerance}}},
      {"retrace", {{"tolerance", c.retrace_tolerance}}}};
}

}  // namespace echoprop
