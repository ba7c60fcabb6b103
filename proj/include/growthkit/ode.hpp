#pragma once

// Fixed-step and adaptive integrators for first-order autonomous systems
// dy/dt = f(y). Systems are any type exposing dimension() and a call operator
// (std::span<const double> y, std::span<double> dydt).

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "growthkit/error.hpp"

namespace growthkit {

template <class S>
concept AutonomousSystemLike = requires(const S& s, std::span<const double> y, std::span<double> dy) {
  { s.dimension() } -> std::convertible_to<std::size_t>;
  s(y, dy);
};

/// Type-erased autonomous system.
class AutonomousSystem {
 public:
  using Rhs = std::function<void(std::span<const double>, std::span<double>)>;

  AutonomousSystem(std::size_t dimension, Rhs rhs) : dimension_(dimension), rhs_(std::move(rhs)) {
    if (dimension_ == 0) throw DomainError("AutonomousSystem: dimension must be positive");
    if (!rhs_) throw DomainError("AutonomousSystem: empty right-hand side");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  void operator()(std::span<const double> y, std::span<double> dydt) const { rhs_(y, dydt); }

 private:
  std::size_t dimension_;
  Rhs rhs_;
};

/// Solution of an ODE system on a time grid. States are stored row-major.
class Trajectory {
 public:
  struct Meta {
    std::string solver;
    double step = 0.0;     // fixed step size, 0 for adaptive runs
    double rel_tol = 0.0;  // adaptive tolerances, 0 for fixed-step runs
    double abs_tol = 0.0;
    std::size_t rejected_steps = 0;
  };

  Trajectory() = default;
  Trajectory(std::size_t dimension, Meta meta) : dimension_(dimension), meta_(std::move(meta)) {}

  void append(double t, std::span<const double> y) {
    if (!times_.empty() && !(t > times_.back()))
      throw NumericalError("Trajectory: time grid must be strictly increasing");
    times_.push_back(t);
    states_.insert(states_.end(), y.begin(), y.end());
  }

  void set_rejected_steps(std::size_t n) noexcept { meta_.rejected_steps = n; }

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const Meta& meta() const noexcept { return meta_; }

  std::span<const double> state(std::size_t i) const {
    return {states_.data() + i * dimension_, dimension_};
  }
  std::span<const double> back() const { return state(size() - 1); }

  /// Component `k` across the whole grid.
  std::vector<double> component(std::size_t k) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = states_[i * dimension_ + k];
    return out;
  }

 private:
  std::size_t dimension_ = 0;
  Meta meta_;
  std::vector<double> times_;
  std::vector<double> states_;
};

/// Linear interpolation between grid points. First-order accurate only; the
/// integrators provide no dense output.
inline std::vector<double> interpolate(const Trajectory& traj, double t) {
  const auto& ts = traj.times();
  if (ts.empty()) throw DomainError("interpolate: empty trajectory");
  if (t < ts.front() || t > ts.back()) throw DomainError("interpolate: time outside trajectory span");
  auto it = std::lower_bound(ts.begin(), ts.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - ts.begin());
  if (hi == 0 || ts[hi] == t) {
    auto s = traj.state(hi);
    return {s.begin(), s.end()};
  }
  std::size_t lo = hi - 1;
  double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  auto a = traj.state(lo);
  auto b = traj.state(hi);
  std::vector<double> out(traj.dimension());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a[k] + w * (b[k] - a[k]);
  return out;
}

namespace detail {

inline std::string describe_state(double t, std::span<const double> y) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << " state=(";
  for (std::size_t i = 0; i < y.size(); ++i) os << (i ? ", " : "") << y[i];
  os << ")";
  return os.str();
}

template <AutonomousSystemLike System>
void eval_checked(const System& sys, double t, std::span<const double> y, std::span<double> dy) {
  sys(y, dy);
  for (double v : dy) {
    if (!std::isfinite(v))
      throw NonFiniteError("non-finite derivative at " + describe_state(t, y), t, {y.begin(), y.end()});
  }
}

inline void check_interval(double t0, double t1) {
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0))
    throw DomainError("integration interval must satisfy t1 > t0 with finite endpoints");
}

}  // namespace detail

/// Classical fourth-order Runge-Kutta with fixed step `dt`. The final step is
/// shortened so that the last grid point is exactly `t1`.
template <AutonomousSystemLike System>
Trajectory integrate_fixed(const System& sys, std::span<const double> y0, double t0, double t1, double dt) {
  detail::check_interval(t0, t1);
  if (!(dt > 0.0) || dt > (t1 - t0)) throw DomainError("integrate_fixed: need 0 < dt <= t1 - t0");
  const std::size_t n = sys.dimension();
  if (y0.size() != n) throw DomainError("integrate_fixed: initial state has wrong dimension");

  Trajectory traj(n, {.solver = "rk4", .step = dt});
  std::vector<double> y(y0.begin(), y0.end()), k1(n), k2(n), k3(n), k4(n), tmp(n);
  traj.append(t0, y);

  // Grid points are t0 + i*dt to avoid accumulating rounding in t.
  const double span = t1 - t0;
  const auto full_steps = static_cast<std::size_t>(std::floor(span / dt * (1.0 + 1e-12)));
  std::size_t i = 0;
  double t = t0;
  while (t < t1) {
    double t_next = (i + 1 <= full_steps) ? t0 + static_cast<double>(i + 1) * dt : t1;
    if (t_next > t1 || t1 - t_next < 1e-12 * span) t_next = t1;
    const double h = t_next - t;

    detail::eval_checked(sys, t, y, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k1[j];
    detail::eval_checked(sys, t + 0.5 * h, tmp, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + 0.5 * h * k2[j];
    detail::eval_checked(sys, t + 0.5 * h, tmp, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * k3[j];
    detail::eval_checked(sys, t + h, tmp, k4);
    for (std::size_t j = 0; j < n; ++j) y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

    t = t_next;
    ++i;
    traj.append(t, y);
  }
  return traj;
}

struct AdaptiveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double initial_step = 0.0;  // 0 selects a step automatically
  double max_step = 0.0;      // 0 means unbounded
  std::size_t max_steps = 10'000'000;
};

/// Dormand-Prince 5(4) embedded pair with a standard step-size controller.
/// A step is accepted when every component's error estimate is within
/// abs_tol + rel_tol * max(|y_old|, |y_new|).
template <AutonomousSystemLike System>
Trajectory integrate_adaptive(const System& sys, std::span<const double> y0, double t0, double t1,
                              const AdaptiveOptions& opt = {}) {
  detail::check_interval(t0, t1);
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) throw DomainError("integrate_adaptive: tolerances must be positive");
  const std::size_t n = sys.dimension();
  if (y0.size() != n) throw DomainError("integrate_adaptive: initial state has wrong dimension");

  // Dormand-Prince coefficients.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                   e6 = 22.0 / 525, e7 = -1.0 / 40;

  Trajectory traj(n, {.solver = "dopri5", .rel_tol = opt.rel_tol, .abs_tol = opt.abs_tol});
  std::vector<double> y(y0.begin(), y0.end()), ynew(n), tmp(n), err(n);
  std::array<std::vector<double>, 7> k;
  for (auto& v : k) v.assign(n, 0.0);
  traj.append(t0, y);

  const double span = t1 - t0;
  const double h_min = 1e-14 * span;
  double t = t0;

  auto error_norm = [&](std::span<const double> ya, std::span<const double> yb, std::span<const double> e) {
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(ya[j]), std::abs(yb[j]));
      worst = std::max(worst, std::abs(e[j]) / scale);
    }
    return worst;
  };

  detail::eval_checked(sys, t, y, k[0]);

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    // Hairer's starting-step heuristic.
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double sc = opt.abs_tol + opt.rel_tol * std::abs(y[j]);
      d0 = std::max(d0, std::abs(y[j]) / sc);
      d1 = std::max(d1, std::abs(k[0][j]) / sc);
    }
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, span);
  }
  if (opt.max_step > 0.0) h = std::min(h, opt.max_step);

  std::size_t steps = 0, rejected = 0;
  while (t < t1) {
    if (++steps > opt.max_steps)
      throw StiffnessError("integrate_adaptive: step budget exhausted at " + detail::describe_state(t, y), t, h);
    bool last = false;
    if (t + h >= t1 || (t1 - (t + h)) < h_min) {
      h = t1 - t;
      last = true;
    }

    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * a21 * k[0][j];
    detail::eval_checked(sys, t + c2 * h, tmp, k[1]);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * (a31 * k[0][j] + a32 * k[1][j]);
    detail::eval_checked(sys, t + c3 * h, tmp, k[2]);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = y[j] + h * (a41 * k[0][j] + a42 * k[1][j] + a43 * k[2][j]);
    detail::eval_checked(sys, t + c4 * h, tmp, k[3]);
    for (std::size_t j = 0; j < n; ++j)
      tmp[j] = y[j] + h * (a51 * k[0][j] + a52 * k[1][j] + a53 * k[2][j] + a54 * k[3][j]);
    detail::eval_checked(sys, t + c5 * h, tmp, k[4]);
    for (std::size_t j = 0; j < n; ++j)
      tmp[j] = y[j] + h * (a61 * k[0][j] + a62 * k[1][j] + a63 * k[2][j] + a64 * k[3][j] + a65 * k[4][j]);
    detail::eval_checked(sys, t + h, tmp, k[5]);
    for (std::size_t j = 0; j < n; ++j)
      ynew[j] = y[j] + h * (b1 * k[0][j] + b3 * k[2][j] + b4 * k[3][j] + b5 * k[4][j] + b6 * k[5][j]);
    detail::eval_checked(sys, t + h, ynew, k[6]);
    for (std::size_t j = 0; j < n; ++j)
      err[j] = h * (e1 * k[0][j] + e3 * k[2][j] + e4 * k[3][j] + e5 * k[4][j] + e6 * k[5][j] + e7 * k[6][j]);

    const double en = error_norm(y, ynew, err);
    if (en <= 1.0) {
      t = last ? t1 : t + h;
      y.swap(ynew);
      std::swap(k[0], k[6]);  // FSAL
      traj.append(t, y);
      double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
    }
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    if (t < t1 && h < h_min)
      throw StiffnessError("integrate_adaptive: step size underflow (suspected stiffness) at " +
                               detail::describe_state(t, y),
                           t, h);
  }

  traj.set_rejected_steps(rejected);
  return traj;
}

}  // namespace growthkit
