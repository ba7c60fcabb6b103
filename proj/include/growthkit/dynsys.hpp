#pragma once

// Equilibria and linear stability of planar autonomous systems, plus the
// two-species competition model and its exclusion verdict.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "growthkit/error.hpp"
#include "growthkit/ode.hpp"

namespace growthkit {

/// Equilibrium of a planar system. The state order follows the system: the
/// first coordinate is R (revenue-like), the second S (resource-like).
struct FixedPoint2D {
  std::array<double, 2> point{};
  double residual_norm = 0.0;
  std::size_t iterations = 0;

  double r_c() const noexcept { return point[0]; }
  double s_c() const noexcept { return point[1]; }
};

/// Jacobian entries at an equilibrium: A = dρ/dR, B = dρ/dS, C = dσ/dR, D = dσ/dS
/// for dR/dt = ρ(R, S), dS/dt = σ(R, S).
struct Jacobian2 {
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;

  double trace() const noexcept { return A + D; }
  double determinant() const noexcept { return A * D - B * C; }
};

enum class Classification { stable_node, unstable_node, saddle, stable_focus, unstable_focus, center, degenerate };

inline std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::stable_node: return "stable node";
    case Classification::unstable_node: return "unstable node";
    case Classification::saddle: return "saddle";
    case Classification::stable_focus: return "stable focus";
    case Classification::unstable_focus: return "unstable focus";
    case Classification::center: return "center";
    case Classification::degenerate: return "degenerate";
  }
  return "unknown";
}

struct Eigenpair {
  std::complex<double> lambda1;
  std::complex<double> lambda2;
};

struct StabilityReport {
  std::optional<FixedPoint2D> fixed_point;  // absent when only a Jacobian was classified
  Jacobian2 jacobian;
  Eigenpair eigenvalues;
  Classification classification = Classification::degenerate;
};

inline constexpr double kDeterminantZeroTol = 1e-12;
inline constexpr double kRepeatedEigenTol = 1e-9;

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

template <AutonomousSystemLike System>
std::array<double, 2> eval2(const System& sys, std::array<double, 2> x) {
  std::array<double, 2> f{};
  sys(std::span<const double>(x), std::span<double>(f));
  return f;
}

inline void require_planar(std::size_t n, const char* who) {
  if (n != 2) throw DomainError(std::string(who) + ": system must be two-dimensional");
}

}  // namespace detail

/// Central-difference Jacobian. Each coordinate is perturbed by
/// h * (1 + |coordinate|).
template <AutonomousSystemLike System>
Jacobian2 linearize(const System& sys, const std::array<double, 2>& at, double h = 1e-6) {
  detail::require_planar(sys.dimension(), "linearize");
  if (!(h > 0.0)) throw DomainError("linearize: finite-difference step must be positive");
  std::array<std::array<double, 2>, 2> cols{};
  for (std::size_t k = 0; k < 2; ++k) {
    const double step = h * (1.0 + std::abs(at[k]));
    auto xp = at, xm = at;
    xp[k] += step;
    xm[k] -= step;
    const auto fp = detail::eval2(sys, xp);
    const auto fm = detail::eval2(sys, xm);
    // Use the actually representable spacing.
    const double width = xp[k] - xm[k];
    for (std::size_t i = 0; i < 2; ++i) {
      if (!std::isfinite(fp[i]) || !std::isfinite(fm[i]))
        throw NonFiniteError("linearize: non-finite right-hand side near the point", 0.0, {at[0], at[1]});
      cols[k][i] = (fp[i] - fm[i]) / width;
    }
  }
  return {cols[0][0], cols[1][0], cols[0][1], cols[1][1]};
}

template <AutonomousSystemLike System>
Jacobian2 linearize(const System& sys, const FixedPoint2D& at, double h = 1e-6) {
  return linearize(sys, at.point, h);
}

/// Damped Newton iteration on f(x) = 0 with a finite-difference Jacobian.
/// Each step is halved (up to 30 times) until the residual norm decreases.
template <AutonomousSystemLike System>
FixedPoint2D find_fixed_point(const System& sys, std::array<double, 2> guess, double tol = 1e-12,
                              std::size_t max_iter = 100) {
  detail::require_planar(sys.dimension(), "find_fixed_point");
  if (!(tol > 0.0)) throw DomainError("find_fixed_point: tolerance must be positive");
  auto x = guess;
  auto f = detail::eval2(sys, x);
  double res = detail::norm2(f);
  if (!std::isfinite(res)) throw DomainError("find_fixed_point: right-hand side is not finite at the initial guess");

  for (std::size_t it = 0; it < max_iter; ++it) {
    if (res <= tol) return {x, res, it};
    const Jacobian2 J = linearize(sys, x);
    const double det = J.determinant();
    const double scale = std::max({std::abs(J.A), std::abs(J.B), std::abs(J.C), std::abs(J.D)});
    if (scale == 0.0 || std::abs(det) <= 1e-14 * scale * scale)
      throw ConvergenceError("find_fixed_point: singular Jacobian at iterate", ConvergenceError::Reason::singular_jacobian,
                             {x[0], x[1]}, res);
    // Newton direction solves J dx = -f.
    std::array<double, 2> dx{(-f[0] * J.D + f[1] * J.B) / det, (-f[1] * J.A + f[0] * J.C) / det};

    bool improved = false;
    double lambda = 1.0;
    for (int halvings = 0; halvings <= 30; ++halvings, lambda *= 0.5) {
      std::array<double, 2> trial{x[0] + lambda * dx[0], x[1] + lambda * dx[1]};
      auto ft = detail::eval2(sys, trial);
      const double rt = detail::norm2(ft);
      if (std::isfinite(rt) && rt < res) {
        x = trial;
        f = ft;
        res = rt;
        improved = true;
        break;
      }
    }
    if (!improved) {
      if (res <= tol) break;
      throw ConvergenceError("find_fixed_point: damped Newton step failed to reduce the residual",
                             ConvergenceError::Reason::stalled, {x[0], x[1]}, res);
    }
  }
  if (res <= tol) return {x, res, max_iter};
  throw ConvergenceError("find_fixed_point: no convergence within " + std::to_string(max_iter) + " iterations",
                         ConvergenceError::Reason::max_iterations, {x[0], x[1]}, res);
}

/// Eigenvalues of the 2x2 matrix and the trace-determinant classification.
/// Repeated eigenvalues of a scalar matrix (star node) count as a node; a
/// repeated eigenvalue with a Jordan block, or a vanishing determinant, is
/// degenerate.
inline StabilityReport classify(const Jacobian2& J) {
  for (double v : {J.A, J.B, J.C, J.D})
    if (!std::isfinite(v)) throw DomainError("classify: Jacobian entries must be finite");

  const double tr = J.trace();
  const double det = J.determinant();
  const double disc = tr * tr - 4.0 * det;
  const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
  StabilityReport rep;
  rep.jacobian = J;
  rep.eigenvalues = {0.5 * (tr + root), 0.5 * (tr - root)};

  const auto& l1 = rep.eigenvalues.lambda1;
  const auto& l2 = rep.eigenvalues.lambda2;
  const bool repeated = std::abs(l1 - l2) <= kRepeatedEigenTol;
  const bool scalar_matrix = J.B == 0.0 && J.C == 0.0 && J.A == J.D;

  if (std::abs(det) <= kDeterminantZeroTol || (repeated && !scalar_matrix)) {
    rep.classification = Classification::degenerate;
  } else if (det < 0.0) {
    rep.classification = Classification::saddle;
  } else if (disc >= 0.0 || repeated) {
    rep.classification = tr < 0.0 ? Classification::stable_node : Classification::unstable_node;
  } else if (std::abs(tr) <= kDeterminantZeroTol) {
    rep.classification = Classification::center;
  } else {
    rep.classification = tr < 0.0 ? Classification::stable_focus : Classification::unstable_focus;
  }
  return rep;
}

/// Locates the equilibrium from `guess`, linearizes there and classifies it.
template <AutonomousSystemLike System>
StabilityReport analyze_equilibrium(const System& sys, std::array<double, 2> guess, double tol = 1e-12) {
  auto fp = find_fixed_point(sys, guess, tol);
  auto rep = classify(linearize(sys, fp));
  rep.fixed_point = fp;
  return rep;
}

// ---------------------------------------------------------------------------
// Demo coupled-logistic pair (not a model from the literature; a convenient
// planar system with a known interior equilibrium):
//   dR/dt = R (aR - bR R + eRS S)
//   dS/dt = S (aS - bS S + eSR R)

struct CoupledLogisticParams {
  double a_r = 1.0, b_r = 1.0, e_rs = 0.5;
  double a_s = 1.0, b_s = 1.0, e_sr = 0.5;
};

struct CoupledLogisticSystem {
  CoupledLogisticParams p;

  std::size_t dimension() const noexcept { return 2; }
  void operator()(std::span<const double> y, std::span<double> dy) const {
    const double R = y[0], S = y[1];
    dy[0] = R * (p.a_r - p.b_r * R + p.e_rs * S);
    dy[1] = S * (p.a_s - p.b_s * S + p.e_sr * R);
  }
};

// ---------------------------------------------------------------------------
// Two-species competition for one resource:
//   dφ1/dt = [a1 - d1 (b φ1 + c φ2)] φ1
//   dφ2/dt = [a2 - d2 (b φ1 + c φ2)] φ2

struct CompetitionParams {
  double a1 = 1.0, a2 = 1.0;
  double d1 = 1.0, d2 = 1.0;
  double b = 1.0, c = 1.0;
};

inline void validate(const CompetitionParams& p) {
  for (double v : {p.a1, p.a2, p.d1, p.d2, p.b, p.c})
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("competition: all six parameters must be positive");
}

struct CompetitionSystem {
  CompetitionParams p;

  std::size_t dimension() const noexcept { return 2; }
  void operator()(std::span<const double> y, std::span<double> dy) const {
    const double load = p.b * y[0] + p.c * y[1];
    dy[0] = (p.a1 - p.d1 * load) * y[0];
    dy[1] = (p.a2 - p.d2 * load) * y[1];
  }
};

enum class Survivor { species1, species2, marginal };

inline std::string_view to_string(Survivor s) {
  switch (s) {
    case Survivor::species1: return "species-1-survives";
    case Survivor::species2: return "species-2-survives";
    case Survivor::marginal: return "marginal";
  }
  return "unknown";
}

struct ExclusionVerdict {
  Survivor survivor = Survivor::marginal;
  std::optional<double> limit;  // survivor's limiting population a_i / (d_i w)

  /// Equilibrium (φ1, φ2) the system settles on; only defined for a strict winner.
  std::optional<std::array<double, 2>> equilibrium() const {
    if (!limit) return std::nullopt;
    if (survivor == Survivor::species1) return std::array<double, 2>{*limit, 0.0};
    return std::array<double, 2>{0.0, *limit};
  }
};

/// Species 1 wins iff a1 d2 > a2 d1. Ties within 1e-12 relative are marginal.
inline ExclusionVerdict exclusion_verdict(const CompetitionParams& p) {
  validate(p);
  const double lhs = p.a1 * p.d2, rhs = p.a2 * p.d1;
  if (std::abs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs)) return {Survivor::marginal, std::nullopt};
  if (lhs > rhs) return {Survivor::species1, p.a1 / (p.d1 * p.b)};
  return {Survivor::species2, p.a2 / (p.d2 * p.c)};
}

}  // namespace growthkit
