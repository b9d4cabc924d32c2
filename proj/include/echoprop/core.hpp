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

#pragma once

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace echoprop {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched vector/signal/model dimensions.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition does not hold (bad flag, bad argument).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or an iteration that blew up.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long step = -1)
      : Error(step >= 0 ? what + " (step " + std::to_string(step) + ")" : what),
        step_(step) {}

  /// Grid step at which the failure was detected, or -1.
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// An iterative solver ran out of iterations.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Singular velocity or momentum Hessian met during a Legendre transform.
class SingularHessianError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

namespace detail {

inline void require(bool cond, std::string_view msg) {
  if (!cond) throw PreconditionError(std::string(msg));
}

inline void require_dim(Eigen::Index got, Eigen::Index want, std::string_view what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                         ", got " + std::to_string(got));
  }
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

/// Scientific-notation rendering for diagnostics.
inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Time grid and signals
// ---------------------------------------------------------------------------

/// Uniform time grid with n_steps intervals, i.e. n_steps + 1 sample points.
class TimeGrid {
 public:
  TimeGrid(double t_start, double dt, int n_steps) : t_start_(t_start), dt_(dt), n_steps_(n_steps) {
    detail::require(std::isfinite(t_start), "TimeGrid: t_start must be finite");
    detail::require(std::isfinite(dt) && dt > 0.0, "TimeGrid: dt must be positive");
    detail::require(n_steps >= 1, "TimeGrid: n_steps must be >= 1");
    detail::require(std::isfinite(horizon()), "TimeGrid: horizon must be finite");
  }

  /// Grid covering [t_start, t_start + horizon] with n_steps intervals.
  static TimeGrid over(double horizon, int n_steps, double t_start = 0.0) {
    detail::require(n_steps >= 1, "TimeGrid: n_steps must be >= 1");
    return TimeGrid(t_start, horizon / n_steps, n_steps);
  }

  double t_start() const noexcept { return t_start_; }
  double dt() const noexcept { return dt_; }
  int n_steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(n_steps_) + 1; }
  double horizon() const noexcept { return n_steps_ * dt_; }
  double time(int k) const noexcept { return t_start_ + k * dt_; }

  /// Same spacing and length (start time may differ).
  bool aligned_with(const TimeGrid& other) const noexcept {
    return n_steps_ == other.n_steps_ && dt_ == other.dt_;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_start_;
  double dt_;
  int n_steps_;
};

/// Vector-valued samples on a TimeGrid, one per grid point.
class Signal {
 public:
  Signal(TimeGrid grid, std::vector<Vec> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw DimensionError("Signal: expected " + std::to_string(grid_.size()) + " samples, got " +
                           std::to_string(values_.size()));
    }
    dim_ = static_cast<int>(values_.front().size());
    for (const auto& v : values_) detail::require_dim(v.size(), dim_, "Signal sample");
  }

  static Signal zeros(TimeGrid grid, int dim) {
    return Signal(grid, std::vector<Vec>(grid.size(), Vec::Zero(dim)));
  }

  static Signal constant(TimeGrid grid, const Vec& value) {
    return Signal(grid, std::vector<Vec>(grid.size(), value));
  }

  /// Samples f(t) at every grid point.
  static Signal sample(TimeGrid grid, int dim, const std::function<Vec(double)>& f) {
    std::vector<Vec> v;
    v.reserve(grid.size());
    for (int k = 0; k <= grid.n_steps(); ++k) {
      v.push_back(f(grid.time(k)));
      detail::require_dim(v.back().size(), dim, "Signal::sample");
    }
    return Signal(grid, std::move(v));
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<Vec>& values() const noexcept { return values_; }

  const Vec& at(int k) const { return values_.at(static_cast<std::size_t>(k)); }

  /// Time-reversed read-out: reversed(k) = values[n_steps - k].
  const Vec& reversed(int k) const { return at(grid_.n_steps() - k); }

  /// Copy with samples in reverse order on the same grid.
  Signal time_reversed() const { return Signal(grid_, {values_.rbegin(), values_.rend()}); }

 private:
  TimeGrid grid_;
  std::vector<Vec> values_;
  int dim_ = 0;
};

// ---------------------------------------------------------------------------
// Parameters and states
// ---------------------------------------------------------------------------

/// Learnable parameters: a flat, finite real vector.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(Vec values) : values_(std::move(values)) {
    if (!values_.allFinite()) throw NumericalError("ParamVector: non-finite entry");
  }
  ParamVector(std::initializer_list<double> v) : ParamVector(Vec(Eigen::Map<const Vec>(v.begin(), static_cast<Eigen::Index>(v.size())))) {}

  int dim() const noexcept { return static_cast<int>(values_.size()); }
  const Vec& values() const noexcept { return values_; }
  double operator[](int i) const { return values_(i); }

  /// Copy with component i shifted by delta.
  ParamVector shifted(int i, double delta) const {
    Vec v = values_;
    v(i) += delta;
    return ParamVector(std::move(v));
  }

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Vec values_;
};

/// Canonical phase-space point (s, p).
struct PhaseState {
  Vec position;
  Vec momentum;

  PhaseState() = default;
  PhaseState(Vec s, Vec p) : position(std::move(s)), momentum(std::move(p)) {
    detail::require_dim(momentum.size(), position.size(), "PhaseState momentum");
  }

  int dim() const noexcept { return static_cast<int>(position.size()); }

  /// Stacked (s; p) in R^{2d}.
  Vec concat() const {
    Vec phi(2 * position.size());
    phi << position, momentum;
    return phi;
  }

  static PhaseState from_concat(const Vec& phi) {
    if (phi.size() % 2 != 0) throw DimensionError("PhaseState::from_concat: odd length");
    const auto d = phi.size() / 2;
    return {phi.head(d), phi.tail(d)};
  }

  friend bool operator==(const PhaseState& a, const PhaseState& b) {
    return a.position == b.position && a.momentum == b.momentum;
  }
};

enum class TrajectoryKind { lagrangian, hamiltonian };

/// Time-indexed states on a uniform grid. Lagrangian views carry (s, ṡ);
/// Hamiltonian views carry (s, p).
class Trajectory {
 public:
  Trajectory(TimeGrid grid, TrajectoryKind kind) : grid_(grid), kind_(kind) {
    positions_.reserve(grid.size());
    rates_.reserve(grid.size());
  }

  Trajectory(TimeGrid grid, TrajectoryKind kind, std::vector<Vec> positions, std::vector<Vec> rates)
      : grid_(grid), kind_(kind), positions_(std::move(positions)), rates_(std::move(rates)) {
    if (positions_.size() != grid_.size() || rates_.size() != grid_.size()) {
      throw DimensionError("Trajectory: state count does not match grid");
    }
    for (std::size_t k = 0; k < positions_.size(); ++k) {
      detail::require_dim(positions_[k].size(), dim(), "Trajectory position");
      detail::require_dim(rates_[k].size(), dim(), "Trajectory rate");
    }
  }

  void push_back(Vec position, Vec rate) {
    if (!positions_.empty()) {
      detail::require_dim(position.size(), dim(), "Trajectory position");
    }
    detail::require_dim(rate.size(), position.size(), "Trajectory rate");
    positions_.push_back(std::move(position));
    rates_.push_back(std::move(rate));
  }

  const TimeGrid& grid() const noexcept { return grid_; }
  TrajectoryKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return positions_.size(); }
  int dim() const noexcept { return positions_.empty() ? 0 : static_cast<int>(positions_.front().size()); }
  bool complete() const noexcept { return positions_.size() == grid_.size(); }

  const Vec& position(int k) const { return positions_.at(static_cast<std::size_t>(k)); }
  const Vec& velocity(int k) const {
    detail::require(kind_ == TrajectoryKind::lagrangian, "Trajectory::velocity on a Hamiltonian trajectory");
    return rates_.at(static_cast<std::size_t>(k));
  }
  const Vec& momentum(int k) const {
    detail::require(kind_ == TrajectoryKind::hamiltonian, "Trajectory::momentum on a Lagrangian trajectory");
    return rates_.at(static_cast<std::size_t>(k));
  }
  /// Second block regardless of kind (velocity or momentum).
  const Vec& rate(int k) const { return rates_.at(static_cast<std::size_t>(k)); }

  PhaseState phase(int k) const {
    detail::require(kind_ == TrajectoryKind::hamiltonian, "Trajectory::phase on a Lagrangian trajectory");
    return {position(k), rate(k)};
  }
  PhaseState back_phase() const { return phase(static_cast<int>(size()) - 1); }

  const std::vector<Vec>& positions() const noexcept { return positions_; }
  const std::vector<Vec>& rates() const noexcept { return rates_; }

 private:
  TimeGrid grid_;
  TrajectoryKind kind_;
  std::vector<Vec> positions_;
  std::vector<Vec> rates_;
};

// ---------------------------------------------------------------------------
// Gradient estimates
// ---------------------------------------------------------------------------

enum class Method { static_ep, civp, cbvp, pfvp, rhel, fd_oracle };
enum class Nudging { one_sided, symmetric };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::static_ep: return "STATIC_EP";
    case Method::civp: return "CIVP";
    case Method::cbvp: return "CBVP";
    case Method::pfvp: return "PFVP";
    case Method::rhel: return "RHEL";
    case Method::fd_oracle: return "FD_ORACLE";
  }
  return "?";
}

inline std::string_view to_string(Nudging n) {
  return n == Nudging::symmetric ? "symmetric" : "one_sided";
}

inline Method parse_method(std::string_view s) {
  for (Method m : {Method::static_ep, Method::civp, Method::cbvp, Method::pfvp, Method::rhel, Method::fd_oracle}) {
    std::string name(to_string(m));
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (s == name || s == lower) return m;
  }
  throw PreconditionError("unknown estimator '" + std::string(s) + "'");
}

inline Nudging parse_nudging(std::string_view s) {
  if (s == "symmetric") return Nudging::symmetric;
  if (s == "one_sided") return Nudging::one_sided;
  throw PreconditionError("unknown nudging mode '" + std::string(s) + "'");
}

/// θ-shaped gradient vector plus the metadata describing how it was made.
struct GradientEstimate {
  Vec value;
  Method method = Method::fd_oracle;
  double beta = 0.0;
  Nudging nudging = Nudging::one_sided;
  double seconds = 0.0;

  GradientEstimate() = default;
  GradientEstimate(Vec v, Method m, double b, Nudging n) : value(std::move(v)), method(m), beta(b), nudging(n) {
    if (m != Method::fd_oracle && b == 0.0) {
      throw PreconditionError("GradientEstimate: beta must be nonzero for " + std::string(to_string(m)));
    }
  }

  int dim() const noexcept { return static_cast<int>(value.size()); }
};

/// ||a - b|| / ||b||, falling back to ||a - b|| when b vanishes.
inline double relative_error(const Vec& a, const Vec& b) {
  const double denom = b.norm();
  const double diff = (a - b).norm();
  return denom > 0.0 ? diff / denom : diff;
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Trapezoid rule for sum_k w_k f(k) dt over k = 0..n_steps, vector valued.
template <typename F>
Vec trapezoid(const TimeGrid& grid, Eigen::Index dim, F&& f) {
  Vec acc = Vec::Zero(dim);
  const int n = grid.n_steps();
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * f(k);
  }
  return acc * grid.dt();
}

/// Scalar trapezoid rule.
template <typename F>
double trapezoid_scalar(const TimeGrid& grid, F&& f) {
  double acc = 0.0;
  const int n = grid.n_steps();
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 0.5 : 1.0;
    acc += w * f(k);
  }
  return acc * grid.dt();
}

}  // namespace echoprop
