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

// Estimator × β matrix against the finite-difference oracle.

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <vector>

#include "echoprop/harness/estimators.hpp"

namespace echoprop {

struct ComparisonRow {
  Method method = Method::fd_oracle;
  double beta = 0.0;
  Nudging nudging = Nudging::symmetric;
  Vec gradient;
  double rel_error = 0.0;
  /// ‖Δ_RHEL - Δ_PFVP‖ / ‖Δ_PFVP‖ at this β; NaN unless both were run.
  double rhel_pfvp = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  /// Oracle per boundary regime: "ivp" (CIVP, PFVP, RHEL) and "bvp" (CBVP).
  std::map<std::string, Vec> oracles;
  std::map<std::string, double> oracle_seconds;

  const ComparisonRow& row(Method m, double beta) const {
    for (const auto& r : rows) {
      if (r.method == m && r.beta == beta) return r;
    }
    throw PreconditionError("ComparisonTable: no row for " + std::string(to_string(m)));
  }

  /// Header: method,beta,nudging,rel_error,rhel_pfvp,g_0..g_{P-1}
  /// (rhel_pfvp is empty when not computed; timings are in timings_json).
  void write_csv(std::ostream& out) const {
    const Eigen::Index p = rows.empty() ? 0 : rows.front().gradient.size();
    out << "method,beta,nudging,rel_error,rhel_pfvp";
    for (Eigen::Index i = 0; i < p; ++i) out << ",g_" << i;
    out << '\n';
    for (const auto& r : rows) {
      out << to_string(r.method) << ',' << detail::fmt(r.beta) << ',' << to_string(r.nudging) << ','
          << detail::fmt(r.rel_error) << ',' << (std::isnan(r.rhel_pfvp) ? "" : detail::fmt(r.rhel_pfvp));
      for (Eigen::Index i = 0; i < r.gradient.size(); ++i) out << ',' << detail::fmt(r.gradient(i));
      out << '\n';
    }
  }

  /// Everything but timings.
  Json payload_json() const {
    Json rs = Json::array();
    for (const auto& r : rows) {
      rs.push_back(Json{{"method", std::string(to_string(r.method))},
                        {"beta", r.beta},
                        {"nudging", std::string(to_string(r.nudging))},
                        {"gradient", to_json(r.gradient)},
                        {"rel_error", r.rel_error},
                        {"rhel_pfvp", std::isnan(r.rhel_pfvp) ? Json(nullptr) : Json(r.rhel_pfvp)}});
    }
    Json os = Json::object();
    for (const auto& [k, v] : oracles) os[k] = to_json(v);
    return Json{{"rows", rs}, {"oracles", os}};
  }

  Json timings_json() const {
    Json cells = Json::array();
    for (const auto& r : rows) {
      cells.push_back(Json{{"method", std::string(to_string(r.method))}, {"beta", r.beta}, {"seconds", r.seconds}});
    }
    Json os = Json::object();
    for (const auto& [k, v] : oracle_seconds) os[k] = v;
    return Json{{"cells", cells}, {"oracles", os}};
  }
};

inline const char* oracle_regime(Method m) { return m == Method::cbvp ? "bvp" : "ivp"; }

/// One row per (β, method), β-major. Each row's error is against the oracle
/// of its own boundary regime.
inline ComparisonTable compare_estimators(const ModelPair& m, const Task& task, const ParamVector& theta,
                                          const std::vector<double>& betas, const std::vector<Method>& methods,
                                          Nudging nudging = Nudging::symmetric, const EstimatorSettings& s = {}) {
  detail::require(!betas.empty() && !methods.empty(), "compare_estimators: empty β or estimator list");
  for (Method mt : methods) {
    if (mt == Method::fd_oracle) throw PreconditionError("compare_estimators: FD_ORACLE is the reference, not a row");
    check_compatible(m, task, mt);
  }
  ComparisonTable table;
  for (Method mt : methods) {
    const std::string key = oracle_regime(mt);
    if (table.oracles.count(key)) continue;
    const GradientEstimate o = oracle_gradient(m, task, theta, mt, s);
    table.oracles[key] = o.value;
    table.oracle_seconds[key] = o.seconds;
  }
  for (double b : betas) {
    const std::size_t first = table.rows.size();
    for (Method mt : methods) {
      const GradientEstimate g = estimate_gradient(m, task, theta, mt, b, nudging, s);
      ComparisonRow r;
      r.method = mt;
      r.beta = b;
      r.nudging = nudging;
      r.gradient = g.value;
      r.rel_error = relative_error(g.value, table.oracles.at(oracle_regime(mt)));
      r.seconds = g.seconds;
      table.rows.push_back(std::move(r));
    }
    const ComparisonRow* rhel = nullptr;
    const ComparisonRow* pfvp = nullptr;
    for (std::size_t i = first; i < table.rows.size(); ++i) {
      if (table.rows[i].method == Method::rhel) rhel = &table.rows[i];
      if (table.rows[i].method == Method::pfvp) pfvp = &table.rows[i];
    }
    if (rhel && pfvp) {
      const double d = relative_error(rhel->gradient, pfvp->gradient);
      for (std::size_t i = first; i < table.rows.size(); ++i) {
        if (table.rows[i].method == Method::rhel || table.rows[i].method == Method::pfvp) table.rows[i].rhel_pfvp = d;
      }
    }
  }
  return table;
}

}  // namespace echoprop
