#pragma once

// Spatial growth fields on a half line:
//   diffusion  dφ/dt = Δ d²φ/dx²   (point-source Gaussian solution)
//   advection  dφ/dt + φ dφ/dx = -V'(x),  V(x) = -1/x   (pressure-free Euler)
// The advection field is available three ways: the implicit characteristic
// relation, its terminal profile, and a first-order upwind evolution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "growthkit/error.hpp"
#include "growthkit/growth_models.hpp"
#include "growthkit/ode.hpp"
#include "growthkit/roots.hpp"

namespace growthkit {

struct DiffusionParams {
  double delta = 1.0;
};

/// Gaussian spreading of a unit point source released at x = 0, t = 0.
inline double diffusion_point_source(const DiffusionParams& p, double x, double t) {
  if (!(p.delta > 0.0)) throw ParameterError("diffusion: need delta > 0");
  if (!(t > 0.0)) throw DomainError("diffusion_point_source: need t > 0, got t=" + detail::fmt_num(t));
  const double four_dt = 4.0 * p.delta * t;
  return std::exp(-x * x / four_dt) / std::sqrt(std::numbers::pi * four_dt);
}

enum class Forcing { newtonian, none };

struct AdvectionSetup {
  double c = 1.0;     // characteristic energy constant, used by the implicit relation
  double phi0 = 0.0;  // flat initial level
  double x_min = 1.0;
  double x_max = 200.0;
  std::size_t n_cells = 1024;
  double cfl = 0.8;
  Forcing forcing = Forcing::newtonian;
};

inline void validate(const AdvectionSetup& s) {
  if (!(s.x_min > 0.0) || !(s.x_max > s.x_min) || !std::isfinite(s.x_max))
    throw ParameterError("advection: need 0 < x_min < x_max");
  if (s.n_cells < 16) throw ParameterError("advection: need n_cells >= 16");
  if (!(s.cfl > 0.0) || s.cfl > 0.9) throw ParameterError("advection: need 0 < cfl <= 0.9");
  if (!(s.c > 0.0) || !std::isfinite(s.c)) throw ParameterError("advection: need c > 0");
  if (!(s.phi0 >= 0.0) || !std::isfinite(s.phi0)) throw ParameterError("advection: need phi0 >= 0");
}

/// Potential V(x) and the force -V'(x) per unit "mass".
inline double potential(Forcing f, double x) { return f == Forcing::newtonian ? -1.0 / x : 0.0; }
inline double force(Forcing f, double x) { return f == Forcing::newtonian ? -1.0 / (x * x) : 0.0; }

/// φ²/2 + V(x), constant along a characteristic.
inline double characteristic_energy(Forcing f, double x, double phi) { return 0.5 * phi * phi + potential(f, x); }

/// Long-time profile sqrt(phi0² + 2/x) of the Newtonian-forced field.
inline double euler_terminal_profile(const AdvectionSetup& setup, double x) {
  if (!(x > 0.0)) throw DomainError("euler_terminal_profile: need x > 0, got x=" + detail::fmt_num(x));
  if (std::isinf(x)) return setup.phi0;
  return std::sqrt(setup.phi0 * setup.phi0 - 2.0 * potential(setup.forcing, x));
}

/// Root of the implicit relation
///   φ² - (2/x) [1 - (φ/c + 1)^-2 exp(c φ x - c³ t)] = 0
/// on the growing branch [0, sqrt(2/x)]. The smallest root in the bracket is
/// returned, which makes the result nondecreasing in t.
inline double euler_characteristic_phi(const AdvectionSetup& setup, double x, double t) {
  validate(setup);
  if (!(x >= setup.x_min && x <= setup.x_max))
    throw DomainError("euler_characteristic_phi: x=" + detail::fmt_num(x) + " outside [x_min, x_max]");
  if (std::isnan(t) || t < 0.0) throw DomainError("euler_characteristic_phi: need t >= 0");
  const double c = setup.c;
  const double top = std::sqrt(2.0 / x);
  if (t == 0.0) return 0.0;
  if (std::isinf(t)) return top;

  auto fdf = [&](double phi) {
    const double e = c * phi * x - c * c * c * t - 2.0 * std::log1p(phi / c);
    const double em1 = std::expm1(e);
    const double f = phi * phi + 2.0 / x * em1;
    const double df = 2.0 * phi + 2.0 / x * (em1 + 1.0) * (c * x - 2.0 / (c + phi));
    return std::pair{f, df};
  };

  const double f0 = fdf(0.0).first;
  if (!(f0 < 0.0)) {
    if (f0 == 0.0) return 0.0;
    throw RootNotFoundError("euler_characteristic_phi: no sign change on the growing branch at x=" +
                            detail::fmt_num(x) + ", t=" + detail::fmt_num(t));
  }
  // March to the first sign change, then refine.
  constexpr int kScan = 512;
  double lo = 0.0;
  for (int i = 1; i <= kScan; ++i) {
    const double hi = top * i / kScan;
    const double fh = fdf(hi).first;
    if (std::isnan(fh)) break;
    if (fh >= 0.0) return solve_bracketed(fdf, lo, hi, 1e-15).root;
    // At the top F = (2/x) e^E > 0 exactly; a non-positive value there is
    // rounding once the exponential has underflowed against phi^2.
    if (i == kScan && !std::isnan(fh) && std::abs(fh) <= 1e-12 * top * top) return top;
    lo = hi;
  }
  throw RootNotFoundError("euler_characteristic_phi: no sign change in [0, sqrt(2/x)] at x=" + detail::fmt_num(x) +
                          ", t=" + detail::fmt_num(t) + "; parameters are outside the solution branch");
}

/// Path of a single fluid element: dx/dt = φ, dφ/dt = -V'(x). State is (x, φ).
inline Trajectory particle_path(Forcing forcing, double x0, double phi0, double t_end, double tol = 1e-12) {
  if (!(x0 > 0.0)) throw DomainError("particle_path: need x0 > 0");
  AutonomousSystem sys(2, [forcing](std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = force(forcing, y[0]);
  });
  const double y0[] = {x0, phi0};
  return integrate_adaptive(sys, y0, 0.0, t_end, {.rel_tol = tol, .abs_tol = tol});
}

struct FieldSnapshot {
  std::vector<double> x_grid;
  std::vector<double> phi;
  double t = 0.0;

  /// Linear interpolation of φ between cell centres.
  double probe(double x) const {
    if (x <= x_grid.front()) return phi.front();
    if (x >= x_grid.back()) return phi.back();
    auto it = std::upper_bound(x_grid.begin(), x_grid.end(), x);
    const auto hi = static_cast<std::size_t>(it - x_grid.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - x_grid[lo]) / (x_grid[hi] - x_grid[lo]);
    return phi[lo] + w * (phi[hi] - phi[lo]);
  }
};

struct AdvectionRunStats {
  std::size_t steps = 0;
  double min_dt = 0.0;
  double max_dt = 0.0;
};

inline constexpr double kVelocityFloor = 1e-12;

/// Cell centres x_min + (i + 1/2) dx.
inline std::vector<double> advection_grid(const AdvectionSetup& s) {
  const double dx = (s.x_max - s.x_min) / static_cast<double>(s.n_cells);
  std::vector<double> x(s.n_cells);
  for (std::size_t i = 0; i < s.n_cells; ++i) x[i] = s.x_min + (static_cast<double>(i) + 0.5) * dx;
  return x;
}

/// First-order upwind evolution of dφ/dt + φ dφ/dx = -V'(x) from the flat
/// start φ = phi0. The upwind side follows the sign of φ in each cell.
///
/// Boundaries are Dirichlet. The inflow end (right end when the flow is
/// inward, left end when phi0 > 0) holds the far-field energy level
/// |φ| = sqrt(phi0² - 2V), so fluid enters as if arriving from an unbounded
/// domain; the outflow end holds phi0. Time steps keep the distance travelled
/// in one step, including the velocity gained from the force, below cfl*dx.
inline std::vector<FieldSnapshot> evolve_advection_fd(const AdvectionSetup& setup, double t_end,
                                                      std::span<const double> snapshot_times,
                                                      AdvectionRunStats* stats = nullptr) {
  validate(setup);
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("evolve_advection_fd: need finite t_end >= 0");
  for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
    const double ts = snapshot_times[i];
    if (!(ts >= 0.0 && ts <= t_end)) throw DomainError("evolve_advection_fd: snapshot times must lie in [0, t_end]");
    if (i > 0 && ts < snapshot_times[i - 1]) throw DomainError("evolve_advection_fd: snapshot times must be sorted");
  }

  const std::size_t n = setup.n_cells;
  const double dx = (setup.x_max - setup.x_min) / static_cast<double>(n);
  const std::vector<double> x = advection_grid(setup);
  std::vector<double> source(n);
  double max_source = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    source[i] = force(setup.forcing, x[i]);
    if (i > 0 && i + 1 < n) max_source = std::max(max_source, std::abs(source[i]));
  }

  std::vector<double> phi(n, setup.phi0), next(n);
  // Direction of the bulk flow: the initial level if nonzero, else the force.
  const double direction = setup.phi0 > 0.0 ? 1.0 : (setup.forcing == Forcing::newtonian ? -1.0 : 0.0);
  auto far_field = [&](double xb) { return std::sqrt(setup.phi0 * setup.phi0 - 2.0 * potential(setup.forcing, xb)); };
  if (direction > 0.0) {
    phi.front() = far_field(x.front());
  } else if (direction < 0.0) {
    phi.back() = -far_field(x.back());
  }

  std::vector<FieldSnapshot> out;
  out.reserve(snapshot_times.size());
  std::size_t next_snap = 0;
  double t = 0.0;
  AdvectionRunStats st;
  st.min_dt = std::numeric_limits<double>::infinity();

  auto emit_due = [&] {
    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= t) {
      out.push_back({x, phi, snapshot_times[next_snap]});
      ++next_snap;
    }
  };
  emit_due();

  while (t < t_end) {
    double vmax = kVelocityFloor;
    for (double v : phi) vmax = std::max(vmax, std::abs(v));
    // Largest dt with (vmax + max_source*dt) * dt <= cfl*dx.
    const double reach = setup.cfl * dx;
    double dt = max_source > 0.0 ? 2.0 * reach / (vmax + std::sqrt(vmax * vmax + 4.0 * max_source * reach))
                                 : reach / vmax;
    double target = t_end;
    if (next_snap < snapshot_times.size()) target = std::min(target, snapshot_times[next_snap]);
    bool landed = false;
    if (t + dt >= target) {
      dt = target - t;
      landed = true;
    }
    if (vmax * dt > dx * (1.0 + 1e-12))
      throw NumericalError("evolve_advection_fd: CFL condition violated at t=" + detail::fmt_num(t));

    next.front() = phi.front();
    next.back() = phi.back();
    const double courant = dt / dx;
    double checksum = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double v = phi[i];
      const double grad = v > 0.0 ? (v - phi[i - 1]) : (phi[i + 1] - v);
      next[i] = v - courant * v * grad + dt * source[i];
      checksum += next[i];
    }
    if (!std::isfinite(checksum)) {
      std::size_t bad = 1;
      while (bad + 1 < n && std::isfinite(next[bad])) ++bad;
      throw NonFiniteError("evolve_advection_fd: non-finite field at x=" + detail::fmt_num(x[bad]) +
                               ", t=" + detail::fmt_num(t + dt),
                           t + dt, {});
    }
    phi.swap(next);
    t = landed ? target : t + dt;
    ++st.steps;
    st.min_dt = std::min(st.min_dt, dt);
    st.max_dt = std::max(st.max_dt, dt);
    emit_due();
  }
  if (stats) {
    if (st.steps == 0) st.min_dt = 0.0;
    *stats = st;
  }
  return out;
}

}  // namespace growthkit
