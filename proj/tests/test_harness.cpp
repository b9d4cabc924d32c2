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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "echoprop.hpp"

namespace ep = echoprop;
using ep::Vec;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("echoprop_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

ep::ExperimentConfig small_config() {
  ep::ExperimentConfig c;
  c.task.horizon = 3.0;
  c.task.n_steps = 300;
  return c;
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

TEST(Config, SnapshotRoundTrips) {
  ep::ExperimentConfig c;
  c.seed = 17;
  c.task.kind = ep::TaskKind::step;
  c.estimator.cbvp_tau_step = 1e-4;
  c.compare.estimators = {ep::Method::cbvp, ep::Method::rhel};
  const ep::Json j = ep::to_json(c);
  EXPECT_EQ(ep::to_json(ep::config_from_json(j)), j);
}

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = ep::config_from_json(ep::Json::object());
  EXPECT_EQ(ep::to_json(c), ep::to_json(ep::ExperimentConfig{}));
}

TEST(Config, PartialSectionsOverrideOnlyNamedKeys) {
  const auto c = ep::config_from_json(ep::Json::parse(R"({"task": {"omega": 2.0}, "estimator": {"method": "pfvp"}})"));
  EXPECT_EQ(c.task.omega, 2.0);
  EXPECT_EQ(c.task.n_steps, ep::TaskConfig{}.n_steps);
  EXPECT_EQ(c.estimator.method, ep::Method::pfvp);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"modle": {}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"task": {"omgea": 1}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"task": {"n_steps": "many"}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"task": {"kind": "square"}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"estimator": {"beta": 0}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"estimator": {"method": "bptt"}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"task": {"output": [5]}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"({"train": {"epochs": 0}})")), ep::ConfigError);
  EXPECT_THROW(ep::config_from_json(ep::Json::parse(R"([1, 2])")), ep::ConfigError);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_THROW(ep::load_config(scratch("missing") / "nope.json"), ep::ConfigError);
}

// ---------------------------------------------------------------------------
// Tasks and models
// ---------------------------------------------------------------------------

TEST(MakeTask, SineShapesAndValues) {
  ep::TaskConfig t;
  t.omega = 2.0;
  t.amplitude = 0.7;
  const auto task = ep::make_task(t, 2, 1);
  EXPECT_EQ(task.x.dim(), 1);
  EXPECT_EQ(task.y.dim(), 1);
  EXPECT_TRUE(task.x.grid().aligned_with(task.grid));
  const int k = 123;
  const double tk = task.grid.time(k);
  EXPECT_DOUBLE_EQ(task.y.at(k)(0), 0.7 * std::sin(2.0 * tk));
  EXPECT_DOUBLE_EQ(task.x.at(k)(0), std::sin(2.0 * tk));
  EXPECT_EQ(task.initial_position, Vec::Zero(2));
}

TEST(MakeTask, StepIsZeroBeforeOnset) {
  ep::TaskConfig t;
  t.kind = ep::TaskKind::step;
  t.step_time = 1.0;
  const auto task = ep::make_task(t, 2, 1);
  for (int k = 0; k <= task.grid.n_steps(); ++k) {
    if (task.grid.time(k) < 1.0) {
      EXPECT_EQ(task.x.at(k)(0), 0.0);
      EXPECT_EQ(task.y.at(k)(0), 0.0);
    } else {
      EXPECT_EQ(task.x.at(k)(0), 1.0);
      EXPECT_GE(task.y.at(k)(0), 0.0);
      EXPECT_LT(task.y.at(k)(0), 1.0);
    }
  }
}

TEST(MakeTask, TwoSinesIsSumOfComponents) {
  ep::TaskConfig t;
  t.kind = ep::TaskKind::two_sines;
  const auto task = ep::make_task(t, 2, 1);
  const double tk = task.grid.time(77);
  EXPECT_NEAR(task.y.at(77)(0), std::sin(tk) + 0.5 * std::sin(2.3 * tk + 0.4), 1e-15);
}

TEST(MakeTask, SelectorOutOfRangeThrows) {
  ep::TaskConfig t;
  t.output = {2};
  EXPECT_THROW(ep::make_task(t, 2, 1), ep::DimensionError);
}

TEST(MakeModel, InputOnlyOnDrivenOscillators) {
  const auto m = ep::make_model(ep::ModelConfig{});
  const ep::ParamVector th = ep::initial_theta(m, 0, 0.0);
  const ep::Mat b = m.network->input_weights(th);
  EXPECT_NE(b(0, 0), 0.0);
  EXPECT_EQ(b(1, 0), 0.0);
  EXPECT_LE(m.param_dim(), 16);
}

TEST(InitialTheta, DeterministicPerSeed) {
  const auto m = ep::make_model(ep::ModelConfig{});
  EXPECT_EQ(ep::initial_theta(m, 5, 0.3), ep::initial_theta(m, 5, 0.3));
  EXPECT_FALSE(ep::initial_theta(m, 5, 0.3) == ep::initial_theta(m, 6, 0.3));
  EXPECT_EQ(ep::initial_theta(m, 5, 0.0), ep::reference_theta(*m.network));
}

// ---------------------------------------------------------------------------
// Estimator dispatch
// ---------------------------------------------------------------------------

TEST(Compatibility, StaticEpRejectedOnTrajectoryTasks) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  EXPECT_THROW(ep::check_compatible(m, task, ep::Method::static_ep), ep::CompatibilityError);
  EXPECT_NO_THROW(ep::check_compatible(m, task, ep::Method::rhel));
}

TEST(Compatibility, PfvpRejectsMomentumCost) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  auto task = ep::make_task(c.task, 2, 1);
  task.cost = std::make_shared<const ep::L2Cost>(std::vector<int>{0}, 1.0, 0.5);
  EXPECT_THROW(ep::check_compatible(m, task, ep::Method::pfvp), ep::CompatibilityError);
  EXPECT_NO_THROW(ep::check_compatible(m, task, ep::Method::rhel));
}

TEST(EstimateGradient, FdOracleMethodMatchesOracle) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  const auto th = ep::initial_theta(m, 1, 0.2);
  const auto a = ep::estimate_gradient(m, task, th, ep::Method::fd_oracle, 1.0, ep::Nudging::symmetric);
  EXPECT_EQ(a.value, ep::oracle_gradient(m, task, th, ep::Method::civp).value);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TEST(Train, ZeroLearningRateKeepsLossConstant) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  auto tc = ep::train_config_from(c);
  tc.learning_rate = 0.0;
  tc.epochs = 5;
  const auto rec = ep::train(m, task, tc);
  ASSERT_EQ(rec.loss.size(), 5u);
  for (double l : rec.loss) EXPECT_EQ(l, rec.loss.front());
  EXPECT_EQ(rec.theta_final, rec.theta_initial);
}

TEST(Train, IdenticalSeedsGiveIdenticalRecords) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  auto tc = ep::train_config_from(c);
  tc.epochs = 10;
  tc.seed = 9;
  const auto a = ep::train(m, task, tc);
  const auto b = ep::train(m, task, tc);
  EXPECT_TRUE(a.same_payload(b));
  EXPECT_EQ(a.payload_json().dump(), b.payload_json().dump());
  tc.seed = 10;
  EXPECT_FALSE(a.same_payload(ep::train(m, task, tc)));
}

TEST(Train, RecordLengthsMatchEpochs) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  auto tc = ep::train_config_from(c);
  tc.epochs = 7;
  tc.estimator = ep::Method::pfvp;
  const auto rec = ep::train(m, task, tc);
  EXPECT_EQ(rec.loss.size(), 7u);
  EXPECT_EQ(rec.grad_norm.size(), 7u);
  EXPECT_EQ(rec.epoch_seconds.size(), 7u);
  std::ostringstream csv;
  rec.write_csv(csv);
  EXPECT_EQ(count_lines(csv.str()), 8);
  EXPECT_EQ(csv.str().substr(0, 21), "epoch,loss,grad_norm\n");
}

TEST(Train, RhelHalvesSineTrackingLoss) {
  const ep::ExperimentConfig c;
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, c.model.dim, c.model.input_dim);
  const auto rec = ep::train(m, task, ep::train_config_from(c));
  ASSERT_EQ(rec.loss.size(), 200u);
  EXPECT_LE(rec.loss.back(), 0.5 * rec.loss.front());
}

TEST(Train, RejectsBadConfig) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  auto tc = ep::train_config_from(c);
  tc.epochs = 0;
  EXPECT_THROW(ep::train(m, task, tc), ep::PreconditionError);
  tc = ep::train_config_from(c);
  tc.estimator = ep::Method::static_ep;
  EXPECT_THROW(ep::train(m, task, tc), ep::CompatibilityError);
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

class Compare : public ::testing::Test {
 protected:
  ep::ExperimentConfig c = small_config();
  ep::ModelPair m = ep::make_model(c.model);
  ep::Task task = ep::make_task(c.task, 2, 1);
  ep::ParamVector theta = ep::initial_theta(m, 3, 0.2);
  std::vector<double> betas{1e-2, 1e-3, 1e-4};
  std::vector<ep::Method> methods{ep::Method::civp, ep::Method::pfvp, ep::Method::rhel};
  ep::ComparisonTable table = ep::compare_estimators(m, task, theta, betas, methods);
};

TEST_F(Compare, RowCountIsProduct) {
  EXPECT_EQ(table.rows.size(), betas.size() * methods.size());
  std::ostringstream csv;
  table.write_csv(csv);
  EXPECT_EQ(count_lines(csv.str()), static_cast<int>(betas.size() * methods.size()) + 1);
}

TEST_F(Compare, RhelMatchesPfvpAtEveryBeta) {
  for (double b : betas) {
    EXPECT_LE(table.row(ep::Method::rhel, b).rhel_pfvp, 1e-6);
    EXPECT_TRUE(std::isnan(table.row(ep::Method::civp, b).rhel_pfvp));
  }
}

TEST_F(Compare, ErrorShrinksWithBeta) {
  for (auto mt : methods) {
    EXPECT_LE(table.row(mt, 1e-3).rel_error, table.row(mt, 1e-2).rel_error);
    EXPECT_LE(table.row(mt, 1e-4).rel_error, table.row(mt, 1e-3).rel_error);
    EXPECT_LE(table.row(mt, 1e-4).rel_error, 1e-3);
  }
}

TEST_F(Compare, PayloadExcludesTimings) {
  const std::string payload = table.payload_json().dump();
  EXPECT_EQ(payload.find("seconds"), std::string::npos);
  EXPECT_EQ(table.timings_json()["cells"].size(), table.rows.size());
}

TEST_F(Compare, RejectsOracleAsRow) {
  EXPECT_THROW(ep::compare_estimators(m, task, theta, betas, {ep::Method::fd_oracle}), ep::PreconditionError);
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

TEST(Io, SignalCsvRoundTripIsExact) {
  const auto g = ep::TimeGrid::over(1.3, 17);
  const auto s = ep::Signal::sample(g, 2, [](double t) {
    Vec v(2);
    v << std::sin(3.1 * t) / 7.0, std::exp(-t) * 1e-9;
    return v;
  });
  std::stringstream ss;
  ep::write_signal_csv(ss, s);
  const auto back = ep::read_signal_csv(ss);
  ASSERT_EQ(back.grid().n_steps(), 17);
  for (int k = 0; k <= 17; ++k) EXPECT_EQ(back.at(k), s.at(k));
}

TEST(Io, TrajectoryCsvRoundTripIsExact) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  const auto th = ep::initial_theta(m, 0, 0.2);
  const auto tr = ep::integrate_lagrangian_ivp(*m.lagrangian, th, Vec::Constant(2, 0.1), Vec::Zero(2), task.grid, task.x);
  std::stringstream ss;
  ep::write_trajectory_csv(ss, tr, "forward");
  const auto back = ep::read_trajectory_csv(ss);
  EXPECT_EQ(back.kind(), tr.kind());
  ASSERT_EQ(back.size(), tr.size());
  for (int k = 0; k < static_cast<int>(tr.size()); ++k) {
    EXPECT_EQ(back.position(k), tr.position(k));
    EXPECT_EQ(back.rate(k), tr.rate(k));
  }
}

TEST(Io, MalformedCsvThrows) {
  std::stringstream bad_header("time,x_0\n0,1\n1,2\n");
  EXPECT_THROW(ep::read_signal_csv(bad_header), ep::IoError);
  std::stringstream ragged("t,x_0\n0,1\n1\n");
  EXPECT_THROW(ep::read_signal_csv(ragged), ep::IoError);
  std::stringstream nan_cell("t,x_0\n0,1\n1,abc\n");
  EXPECT_THROW(ep::read_signal_csv(nan_cell), ep::IoError);
}

TEST(Io, GradientJsonRoundTrip) {
  ep::GradientEstimate g(Vec::LinSpaced(3, -1.0, 2.0), ep::Method::rhel, 1e-3, ep::Nudging::symmetric);
  const auto back = ep::gradient_from_json(ep::Json::parse(ep::to_json(g).dump()));
  EXPECT_EQ(back.value, g.value);
  EXPECT_EQ(back.method, g.method);
  EXPECT_EQ(back.beta, g.beta);
  EXPECT_EQ(back.nudging, g.nudging);
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(ep::hex64(ep::fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(ep::hex64(ep::fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Io, EchoRunFilesHaveNoNegativeTimes) {
  const auto c = small_config();
  const auto m = ep::make_model(c.model);
  const auto task = ep::make_task(c.task, 2, 1);
  const auto th = ep::initial_theta(m, 0, 0.2);
  const ep::LagrangianInitialState init(m.lagrangian, task.initial_position, task.initial_velocity, task.x.at(0));
  const auto run = ep::run_echo(*m.hamiltonian, *task.cost, th, init, task.grid, task.x, task.y, 1e-3);
  const auto dir = scratch("echo");
  ep::write_echo_run(dir, run, m.hamiltonian->id());
  for (const char* f : {"forward.csv", "echo.csv"}) {
    const auto tr = ep::read_trajectory_csv(dir / f);
    EXPECT_EQ(tr.size(), run.forward.size());
    EXPECT_GE(tr.grid().t_start(), 0.0);
  }
  EXPECT_EQ(ep::read_json(dir / "echo_manifest.json")["beta"].get<double>(), 1e-3);
  std::filesystem::remove_all(dir);
}
