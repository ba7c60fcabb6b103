#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <sstream>
#include <tuple>
#include <utility>

#include "growthkit/error.hpp"

namespace growthkit {

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Safeguarded Newton iteration inside a sign-changing bracket [lo, hi].
/// Newton steps that leave the bracket, or fail to halve it fast enough, are
/// replaced by bisection. `fdf(x)` returns the pair (f(x), f'(x)).
template <class FDF>
  requires std::invocable<FDF&, double>
RootResult solve_bracketed(FDF&& fdf, double lo, double hi, double x_tol = 1e-15, std::size_t max_iter = 200) {
  const double flo = fdf(lo).first;
  const double fhi = fdf(hi).first;
  if (flo == 0.0) return {lo, 0.0, 0};
  if (fhi == 0.0) return {hi, 0.0, 0};
  if (std::isnan(flo) || std::isnan(fhi) || (flo > 0) == (fhi > 0)) {
    std::ostringstream os;
    os.precision(17);
    os << "no sign change in bracket [" << lo << ", " << hi << "]: f(lo)=" << flo << ", f(hi)=" << fhi;
    throw RootNotFoundError(os.str());
  }
  // Orient so that f(a) < 0 < f(b).
  double a = lo, b = hi;
  if (flo > 0) std::swap(a, b);

  double x = 0.5 * (lo + hi);
  double dx_old = std::abs(hi - lo);
  double dx = dx_old;
  auto [fx, dfx] = fdf(x);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    if (fx == 0.0) return {x, 0.0, it};
    if (std::isnan(fx)) throw RootNotFoundError("bracketed root search hit a NaN function value");
    if (fx < 0) a = x; else b = x;

    const double newton = x - fx / dfx;
    const bool newton_ok = std::isfinite(newton) && dfx != 0.0 && (newton - a) * (newton - b) < 0.0 &&
                           std::abs(2.0 * fx) < std::abs(dx_old * dfx);
    dx_old = dx;
    double x_next;
    if (newton_ok) {
      x_next = newton;
    } else {
      x_next = 0.5 * (a + b);
    }
    dx = x_next - x;
    x = x_next;
    std::tie(fx, dfx) = fdf(x);
    if (std::abs(dx) <= x_tol * (1.0 + std::abs(x)) || std::abs(b - a) <= x_tol * (1.0 + std::abs(x)))
      return {x, fx, it};
  }
  std::ostringstream os;
  os.precision(17);
  os << "bracketed root search did not converge in " << max_iter << " iterations (last x=" << x << ")";
  throw RootNotFoundError(os.str());
}

}  // namespace growthkit
