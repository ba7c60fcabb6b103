#pragma once

// Closed-form scalar growth laws:
//   power law            phi = a t^beta
//   saturating linear    dphi/dt = a - b phi,           phi(0) = 0
//   generalized logistic dphi/dt = phi (a - b phi^alpha), phi(0) = phi0
// Time is dimensionless; units are carried by the data layer.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "growthkit/error.hpp"
#include "growthkit/ode.hpp"

namespace growthkit {

struct PowerLawParams {
  double a = 1.0;
  double beta = 1.0;
};

struct SaturatingLinearParams {
  double a = 1.0;
  double b = 1.0;
};

struct GeneralizedLogisticParams {
  double a = 1.0;
  double b = 1.0;
  int alpha = 1;
  double phi0 = 1.0;
};

/// Value of a growth law that may be unbounded (alpha = 0 exponential growth,
/// or an exponential that overflowed double range). When `unbounded` is set,
/// `value` holds the largest finite double and must not be used as a number.
struct GrowthValue {
  double value = 0.0;
  bool unbounded = false;

  static GrowthValue finite(double v) { return {v, false}; }
  static GrowthValue infinite() { return {std::numeric_limits<double>::max(), true}; }
};

namespace detail {

inline std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline void check_time(double t, const char* who) {
  if (std::isnan(t) || t < 0.0) throw DomainError(std::string(who) + ": time must be >= 0, got " + fmt_num(t));
}

}  // namespace detail

/// Converts a real-valued exponent into a logistic alpha; only zero and the
/// positive integers are accepted.
inline int alpha_from_real(double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0 || std::floor(alpha) != alpha || alpha > 64.0)
    throw UnsupportedAlphaError("alpha must be zero or a positive integer, got " + detail::fmt_num(alpha));
  return static_cast<int>(alpha);
}

inline void validate(const PowerLawParams& p) {
  if (!(p.a > 0.0) || !std::isfinite(p.a)) throw ParameterError("power law: need a > 0, got a=" + detail::fmt_num(p.a));
  if (!std::isfinite(p.beta)) throw ParameterError("power law: beta must be finite");
}

inline void validate(const SaturatingLinearParams& p) {
  if (!(p.a > 0.0) || !std::isfinite(p.a))
    throw ParameterError("saturating linear: need a > 0, got a=" + detail::fmt_num(p.a));
  if (!(p.b > 0.0) || !std::isfinite(p.b))
    throw ParameterError("saturating linear: need b > 0, got b=" + detail::fmt_num(p.b));
}

/// Checks the growth regime a >= b*phi0^alpha. Equality is the fixed point and
/// is accepted.
inline void validate(const GeneralizedLogisticParams& p) {
  if (p.alpha < 0) throw UnsupportedAlphaError("alpha must be zero or a positive integer");
  if (!(p.a > 0.0) || !std::isfinite(p.a)) throw ParameterError("logistic: need a > 0, got a=" + detail::fmt_num(p.a));
  if (!(p.b > 0.0) || !std::isfinite(p.b)) throw ParameterError("logistic: need b > 0, got b=" + detail::fmt_num(p.b));
  if (!(p.phi0 >= 0.0) || !std::isfinite(p.phi0))
    throw ParameterError("logistic: need phi0 >= 0, got phi0=" + detail::fmt_num(p.phi0));
  const double damping = p.b * std::pow(p.phi0, p.alpha);
  if (p.a < damping)
    throw ParameterError("logistic: growth regime requires a > b*phi0^alpha (a=" + detail::fmt_num(p.a) +
                         ", b*phi0^alpha=" + detail::fmt_num(damping) + "); lower b or phi0, or raise a");
}

inline double eval_power_law(const PowerLawParams& p, double t) {
  validate(p);
  detail::check_time(t, "eval_power_law");
  if (t == 0.0 && p.beta < 0.0) throw DomainError("eval_power_law: t = 0 with negative beta is singular");
  return p.a * std::pow(t, p.beta);
}

inline double eval_saturating_linear(const SaturatingLinearParams& p, double t) {
  validate(p);
  detail::check_time(t, "eval_saturating_linear");
  return p.a / p.b * -std::expm1(-p.b * t);
}

inline double saturating_terminal_value(const SaturatingLinearParams& p) {
  validate(p);
  return p.a / p.b;
}

/// Linearized early-time behaviour phi ~ a t. The error against the exact
/// solution is bounded by (a b / 2) t^2.
inline double early_time_approx(const SaturatingLinearParams& p, double t) {
  validate(p);
  detail::check_time(t, "early_time_approx");
  return p.a * t;
}

/// Terminal value (a/b)^(1/alpha); unbounded for alpha = 0 unless the start
/// sits exactly on the fixed point a = b.
inline GrowthValue terminal_value(const GeneralizedLogisticParams& p) {
  validate(p);
  if (p.alpha == 0) {
    if (p.a == p.b || p.phi0 == 0.0) return GrowthValue::finite(p.phi0);
    return GrowthValue::infinite();
  }
  return GrowthValue::finite(std::pow(p.a / p.b, 1.0 / p.alpha));
}

/// Right-hand side of the generalized logistic ODE as a one-dimensional system.
struct LogisticSystem {
  GeneralizedLogisticParams params;

  std::size_t dimension() const noexcept { return 1; }
  void operator()(std::span<const double> y, std::span<double> dy) const {
    dy[0] = y[0] * (params.a - params.b * std::pow(y[0], params.alpha));
  }
};

struct SaturatingLinearSystem {
  SaturatingLinearParams params;

  std::size_t dimension() const noexcept { return 1; }
  void operator()(std::span<const double> y, std::span<double> dy) const { dy[0] = params.a - params.b * y[0]; }
};

namespace detail {

/// Closed forms without parameter validation. Outside the growth regime they
/// remain the exact ODE solution (decay toward (a/b)^(1/alpha)).
inline GrowthValue logistic_closed_form_raw(double a, double b, int alpha, double phi0, double t) {
  switch (alpha) {
    case 0: {
      if (phi0 == 0.0 || a == b) return GrowthValue::finite(phi0);
      const double log_phi = std::log(phi0) + (a - b) * t;
      if (!(log_phi < std::log(std::numeric_limits<double>::max()))) return GrowthValue::infinite();
      return GrowthValue::finite(phi0 * std::exp((a - b) * t));
    }
    case 1: {
      // a c / (b c + e^{-a t}), c = phi0 / (a - b phi0), multiplied through by
      // (a - b phi0) so that phi0 = 0 and a = b phi0 stay finite.
      const double decay = std::exp(-a * t);
      return GrowthValue::finite(a * phi0 / (b * phi0 + (a - b * phi0) * decay));
    }
    case 2: {
      // c k / sqrt(c^2 + e^{-2 a t}), c = phi0 / sqrt(k^2 - phi0^2), k^2 = a/b.
      const double k2 = a / b;
      const double decay = std::exp(-2.0 * a * t);
      const double denom = phi0 * phi0 + (k2 - phi0 * phi0) * decay;
      if (denom == 0.0) return GrowthValue::finite(0.0);
      return GrowthValue::finite(std::sqrt(k2) * phi0 / std::sqrt(denom));
    }
    default:
      throw UnsupportedAlphaError("no closed form for alpha=" + std::to_string(alpha) + "; only 0, 1, 2");
  }
}

}  // namespace detail

/// Closed forms for alpha in {0, 1, 2}.
inline GrowthValue eval_logistic_closed_form(const GeneralizedLogisticParams& p, double t) {
  if (p.alpha > 2)
    throw UnsupportedAlphaError("no closed form for alpha=" + std::to_string(p.alpha) + "; only 0, 1, 2");
  validate(p);
  detail::check_time(t, "eval_logistic_family");
  return detail::logistic_closed_form_raw(p.a, p.b, p.alpha, p.phi0, t);
}

namespace detail {

inline AdaptiveOptions logistic_ode_options() { return {.rel_tol = 1e-12, .abs_tol = 1e-14}; }

}  // namespace detail

/// Generalized logistic solution at time t. alpha in {0, 1, 2} uses the closed
/// forms; larger integer alpha is integrated numerically.
inline GrowthValue eval_logistic_family(const GeneralizedLogisticParams& p, double t) {
  if (p.alpha <= 2) return eval_logistic_closed_form(p, t);
  validate(p);
  detail::check_time(t, "eval_logistic_family");
  if (t == 0.0 || p.phi0 == 0.0 || p.a == p.b * std::pow(p.phi0, p.alpha)) return GrowthValue::finite(p.phi0);
  if (std::isinf(t)) return terminal_value(p);
  const double y0[] = {p.phi0};
  auto traj = integrate_adaptive(LogisticSystem{p}, y0, 0.0, t, detail::logistic_ode_options());
  return GrowthValue::finite(traj.back()[0]);
}

/// Evaluates the logistic solution at every requested time (sorted ascending).
/// For alpha > 2 a single integration pass covers the whole grid.
inline std::vector<GrowthValue> logistic_curve(const GeneralizedLogisticParams& p, std::span<const double> times) {
  std::vector<GrowthValue> out;
  out.reserve(times.size());
  if (p.alpha <= 2) {
    for (double t : times) out.push_back(eval_logistic_closed_form(p, t));
    return out;
  }
  validate(p);
  double t_prev = 0.0;
  double y = p.phi0;
  const bool frozen = p.phi0 == 0.0 || p.a == p.b * std::pow(p.phi0, p.alpha);
  for (double t : times) {
    detail::check_time(t, "logistic_curve");
    if (t < t_prev) throw DomainError("logistic_curve: times must be sorted ascending");
    if (!frozen && t > t_prev) {
      if (std::isinf(t)) {
        y = terminal_value(p).value;
      } else {
        const double y0[] = {y};
        y = integrate_adaptive(LogisticSystem{p}, y0, t_prev, t, detail::logistic_ode_options()).back()[0];
      }
    }
    t_prev = t;
    out.push_back(GrowthValue::finite(y));
  }
  return out;
}

}  // namespace growthkit
