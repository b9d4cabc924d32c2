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

// echoprop command-line driver.
//
// Exit codes: 0 success, 1 estimator/oracle mismatch (assert mode),
// 2 configuration error, 3 numerical failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "echoprop.hpp"

#ifndef ECHOPROP_GIT_DESCRIBE
#define ECHOPROP_GIT_DESCRIBE "unknown"
#endif

namespace fs = std::filesystem;
using namespace echoprop;

namespace {

constexpr int kOk = 0;
constexpr int kMismatch = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

struct Options {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> estimator;
  std::optional<double> beta;
  bool assert_mode = false;
  std::string input;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.estimator) {
    try {
      c.estimator.method = parse_method(*o.estimator);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.beta) c.estimator.beta = *o.beta;
  validate(c);
  return c;
}

struct Setup {
  ExperimentConfig config;
  ModelPair model;
  Task task;
  ParamVector theta;
};

Setup build(const Options& o) {
  ExperimentConfig c = resolve(o);
  ModelPair m = make_model(c.model);
  Task t = make_task(c.task, c.model.dim, c.model.input_dim);
  ParamVector th = initial_theta(m, c.seed, c.train.init_scale);
  return {std::move(c), std::move(m), std::move(t), std::move(th)};
}

/// Manifest with a hash over config and payload; timings are kept outside it.
void write_manifest(const fs::path& path, const std::string& command, const ExperimentConfig& c, const Json& payload,
                    const Json& timings) {
  const Json config = to_json(c);
  Json m{{"tool", "echoprop"},
         {"version", ECHOPROP_GIT_DESCRIBE},
         {"command", command},
         {"config", config},
         {"payload", payload},
         {"payload_hash", hex64(fnv1a(config.dump() + payload.dump()))},
         {"timings", timings}};
  write_json(path, m);
}

template <typename F>
void write_text(const fs::path& path, F&& body) {
  auto out = detail::open_out(path);
  body(out);
}

int cmd_gradcheck(const Options& o) {
  const Setup s = build(o);
  const auto& e = s.config.estimator;
  const EstimatorSettings settings = settings_from(e);
  const GradientEstimate g = estimate_gradient(s.model, s.task, s.theta, e.method, e.beta, e.nudging, settings);
  const GradientEstimate oracle = oracle_gradient(s.model, s.task, s.theta, e.method, settings);
  const double err = relative_error(g.value, oracle.value);
  const bool pass = err <= s.config.gradcheck_tolerance;
  const fs::path out(o.out);
  const Json payload{{"method", std::string(to_string(g.method))},
                     {"beta", g.beta},
                     {"nudging", std::string(to_string(g.nudging))},
                     {"gradient", to_json(g.value)},
                     {"oracle", to_json(oracle.value)},
                     {"rel_error", err},
                     {"tolerance", s.config.gradcheck_tolerance},
                     {"pass", pass}};
  write_manifest(out / "gradcheck.json", "gradcheck", s.config, payload,
                 Json{{"estimator_seconds", g.seconds}, {"oracle_seconds", oracle.seconds}});
  std::cout << to_string(g.method) << " beta=" << g.beta << " rel_error=" << detail::sci(err)
            << " tolerance=" << detail::sci(s.config.gradcheck_tolerance) << (pass ? " PASS" : " FAIL") << '\n';
  return (o.assert_mode && !pass) ? kMismatch : kOk;
}

int cmd_compare(const Options& o) {
  const Setup s = build(o);
  std::vector<Method> methods = s.config.compare.estimators;
  if (o.estimator) methods = {s.config.estimator.method};
  std::vector<double> betas = s.config.compare.betas;
  if (o.beta) betas = {*o.beta};
  const ComparisonTable t = compare_estimators(s.model, s.task, s.theta, betas, methods, s.config.estimator.nudging,
                                               settings_from(s.config.estimator));
  const fs::path out(o.out);
  write_text(out / "compare.csv", [&](std::ostream& f) { t.write_csv(f); });
  write_manifest(out / "compare.json", "compare", s.config, t.payload_json(), t.timings_json());
  for (const auto& r : t.rows) {
    std::cout << to_string(r.method) << " beta=" << r.beta << " rel_error=" << detail::sci(r.rel_error);
    if (!std::isnan(r.rhel_pfvp)) std::cout << " rhel_vs_pfvp=" << detail::sci(r.rhel_pfvp);
    std::cout << '\n';
  }
  return kOk;
}

int cmd_train(const Options& o) {
  const Setup s = build(o);
  const RunRecord rec = train(s.model, s.task, train_config_from(s.config));
  const fs::path out(o.out);
  write_text(out / "train.csv", [&](std::ostream& f) { rec.write_csv(f); });
  write_manifest(out / "train.json", "train", s.config, rec.payload_json(), rec.timings_json());
  std::cout << "epochs=" << rec.loss.size() << " initial_loss=" << detail::sci(rec.loss.front())
            << " final_loss=" << detail::sci(rec.loss.back()) << " ratio=" << detail::sci(rec.loss.back() / rec.loss.front())
            << '\n';
  return kOk;
}

int cmd_retrace(const Options& o) {
  const Setup s = build(o);
  const detail::Stopwatch clock;
  const LagrangianInitialState init(s.model.lagrangian, s.task.initial_position, s.task.initial_velocity, s.task.x.at(0));
  const EchoRun run = run_echo(*s.model.hamiltonian, *s.task.cost, s.theta, init, s.task.grid, s.task.x, s.task.y, 0.0);
  const int n = run.n_steps();
  const fs::path out(o.out);
  double worst = 0.0;
  write_text(out / "retrace.csv", [&](std::ostream& f) {
    f << "k,t,deviation\n";
    for (int k = 0; k <= n; ++k) {
      const double dev = (run.echo.phase(k).concat() - momentum_flip(run.forward.phase(n - k)).concat()).norm();
      worst = std::max(worst, dev);
      f << k << ',' << detail::fmt(run.echo_time(k)) << ',' << detail::fmt(dev) << '\n';
    }
  });
  const bool pass = worst <= s.config.retrace_tolerance;
  write_manifest(out / "retrace.json", "retrace", s.config,
                 Json{{"max_deviation", worst}, {"tolerance", s.config.retrace_tolerance}, {"pass", pass}},
                 Json{{"seconds", clock.seconds()}});
  std::cout << "max_deviation=" << detail::sci(worst) << " tolerance=" << detail::sci(s.config.retrace_tolerance)
            << (pass ? " PASS" : " FAIL") << '\n';
  return (o.assert_mode && !pass) ? kMismatch : kOk;
}

int cmd_export(const Options& o) {
  const fs::path out(o.out);
  if (!o.input.empty()) {
    const Trajectory tr = read_trajectory_csv(fs::path(o.input));
    write_trajectory_csv(out / "trajectory.csv", tr);
    std::cout << "re-serialized " << tr.size() << " samples\n";
    return kOk;
  }
  const Setup s = build(o);
  const detail::Stopwatch clock;
  const auto& t = s.task;
  const Trajectory free =
      integrate_lagrangian_ivp(*s.model.lagrangian, s.theta, t.initial_position, t.initial_velocity, t.grid, t.x);
  const LagrangianInitialState init(s.model.lagrangian, t.initial_position, t.initial_velocity, t.x.at(0));
  const EchoRun run =
      run_echo(*s.model.hamiltonian, *t.cost, s.theta, init, t.grid, t.x, t.y, s.config.estimator.beta);
  write_signal_csv(out / "input.csv", t.x, "x");
  write_signal_csv(out / "target.csv", t.y, "y");
  write_trajectory_csv(out / "trajectory.csv", free);
  write_echo_run(out, run, s.model.hamiltonian->id());
  write_manifest(out / "export.json", "export", s.config,
                 Json{{"theta", to_json(s.theta.values())},
                      {"files", {"input.csv", "target.csv", "trajectory.csv", "forward.csv", "echo.csv"}}},
                 Json{{"seconds", clock.seconds()}});
  std::cout << "wrote " << free.size() << " samples to " << out.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"echoprop: trajectory gradient estimators for physical systems"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ECHOPROP_GIT_DESCRIBE));
  Options o;
  int (*handler)(const Options&) = nullptr;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "override the configured seed");
    sub->add_option("--estimator", o.estimator, "civp, cbvp, pfvp or rhel");
    sub->add_option("--beta", o.beta, "override the nudging strength");
  };

  auto* gradcheck = app.add_subcommand("gradcheck", "compare one estimator with the finite-difference oracle");
  common(gradcheck);
  gradcheck->add_flag("--assert", o.assert_mode, "exit 1 when the error exceeds the tolerance");
  gradcheck->callback([&] { handler = cmd_gradcheck; });

  auto* compare = app.add_subcommand("compare", "estimator x beta matrix against the oracle");
  common(compare);
  compare->callback([&] { handler = cmd_compare; });

  auto* trainer = app.add_subcommand("train", "gradient descent with the configured estimator");
  common(trainer);
  trainer->callback([&] { handler = cmd_train; });

  auto* retrace = app.add_subcommand("retrace", "echo fidelity report at beta = 0");
  common(retrace);
  retrace->add_flag("--assert", o.assert_mode, "exit 1 when the deviation exceeds the tolerance");
  retrace->callback([&] { handler = cmd_retrace; });

  auto* exporter = app.add_subcommand("export", "write inputs, targets and trajectories as CSV");
  common(exporter);
  exporter->add_option("--input", o.input, "re-serialize this trajectory CSV instead")->check(CLI::ExistingFile);
  exporter->callback([&] { handler = cmd_export; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    return handler(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
