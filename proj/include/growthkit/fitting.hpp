#pragma once

// Least-squares estimation of growth-law parameters from time series, an
// early-growth classifier (exponential vs power law), and the model-based
// saturation onset.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "growthkit/data_io.hpp"
#include "growthkit/error.hpp"
#include "growthkit/growth_models.hpp"
#include "growthkit/ode.hpp"
#include "growthkit/roots.hpp"

namespace growthkit {

enum class ModelFamily { power_law, saturating_linear, logistic };

struct ModelSpec {
  ModelFamily family = ModelFamily::logistic;
  int alpha = 1;  // logistic only
};

inline std::string_view to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::power_law: return "power-law";
    case ModelFamily::saturating_linear: return "saturating-linear";
    case ModelFamily::logistic: return "logistic";
  }
  return "unknown";
}

inline ModelFamily parse_model_family(std::string_view s) {
  if (s == "power" || s == "power-law") return ModelFamily::power_law;
  if (s == "saturating" || s == "saturating-linear" || s == "stokes") return ModelFamily::saturating_linear;
  if (s == "logistic" || s == "logistic-family") return ModelFamily::logistic;
  throw DomainError("unknown model '" + std::string(s) + "' (expected power, saturating or logistic)");
}

inline std::vector<std::string> parameter_names(const ModelSpec& m) {
  switch (m.family) {
    case ModelFamily::power_law: return {"a", "beta"};
    case ModelFamily::saturating_linear: return {"a", "b"};
    case ModelFamily::logistic: return {"a", "b", "phi0"};
  }
  return {};
}

enum class LossSpace { linear, log };

struct FitProblem {
  TimeSeries series;
  ModelSpec model;
  LossSpace loss_space = LossSpace::log;
  std::vector<double> initial_guess;  // empty: data-driven default
  std::vector<double> lower;          // empty: defaults
  std::vector<double> upper;
  /// Series time corresponding to model time zero. Defaults to the first
  /// sample for saturating/logistic models and to 0 for the power law.
  std::optional<double> time_origin;
};

struct FitOptions {
  double tol = 1e-10;
  std::size_t max_iter = 200;
  std::size_t starts = 8;
  std::uint64_t seed = 0x5eed'2011;
};

struct FitResult {
  ModelSpec model;
  std::vector<std::string> names;
  std::vector<double> params;
  double rmse = 0.0;  // in loss space
  std::size_t iterations = 0;
  bool converged = false;
  /// max_j |J_j . r| / (||J_j|| sqrt(m)): residual projected onto each
  /// normalized Jacobian column, in loss-space units.
  double gradient_norm = 0.0;
  double jacobian_condition = 0.0;
  std::optional<GrowthValue> terminal_forecast;
  bool regime_violation = false;  // logistic fit with a < b*phi0^alpha
  double time_origin = 0.0;
  std::size_t start_index = 0;
  std::size_t starts_converged = 0;

  double param(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return params[i];
    throw DomainError("FitResult: no parameter named '" + std::string(name) + "'");
  }
};

// ---------------------------------------------------------------------------
// Model evaluation

namespace detail {

inline std::vector<double> logistic_numeric_raw(double a, double b, int alpha, double phi0, std::span<const double> taus) {
  GeneralizedLogisticParams p{a, b, alpha, phi0};
  std::vector<double> out(taus.size());
  double t_prev = 0.0, y = phi0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (taus[i] > t_prev && phi0 > 0.0) {
      const double y0[] = {y};
      y = integrate_adaptive(LogisticSystem{p}, y0, t_prev, taus[i], logistic_ode_options()).back()[0];
      t_prev = taus[i];
    }
    out[i] = y;
  }
  return out;
}

}  // namespace detail

/// Model values at model times `taus` (sorted, >= 0 except for the power law
/// with positive times). No parameter validation; used inside the optimizer.
inline std::vector<double> model_values(const ModelSpec& m, std::span<const double> params, std::span<const double> taus) {
  std::vector<double> out(taus.size());
  switch (m.family) {
    case ModelFamily::power_law:
      for (std::size_t i = 0; i < taus.size(); ++i) out[i] = params[0] * std::pow(taus[i], params[1]);
      break;
    case ModelFamily::saturating_linear:
      for (std::size_t i = 0; i < taus.size(); ++i) out[i] = params[0] / params[1] * -std::expm1(-params[1] * taus[i]);
      break;
    case ModelFamily::logistic:
      if (m.alpha <= 2) {
        for (std::size_t i = 0; i < taus.size(); ++i)
          out[i] = detail::logistic_closed_form_raw(params[0], params[1], m.alpha, params[2], taus[i]).value;
      } else {
        out = detail::logistic_numeric_raw(params[0], params[1], m.alpha, params[2], taus);
      }
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simple regression helper

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least-squares line. R^2 is 0 when y has no variance.
inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("fit_line: need at least two paired points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: abscissa has no spread");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// Levenberg-Marquardt core

namespace detail {

struct Residuals {
  const ModelSpec& model;
  std::span<const double> taus;
  std::span<const double> targets;  // y or log(y)
  LossSpace loss;

  Eigen::VectorXd operator()(std::span<const double> p) const {
    const auto mv = model_values(model, p, taus);
    Eigen::VectorXd r(static_cast<Eigen::Index>(mv.size()));
    for (std::size_t i = 0; i < mv.size(); ++i) {
      double v = mv[i];
      if (loss == LossSpace::log) v = std::log(std::max(v, std::numeric_limits<double>::min()));
      r[static_cast<Eigen::Index>(i)] = v - targets[i];
    }
    return r;
  }
};

struct LmOutcome {
  std::vector<double> params;
  double rmse = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  double gradient_norm = std::numeric_limits<double>::infinity();
  double condition = std::numeric_limits<double>::infinity();
};

inline Eigen::MatrixXd jacobian(const Residuals& res, const std::vector<double>& p, const Eigen::VectorXd& r0,
                                std::span<const double> lo, std::span<const double> hi) {
  const auto m = r0.size();
  Eigen::MatrixXd J(m, static_cast<Eigen::Index>(p.size()));
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(p[j]), 1e-6);
    auto pp = p, pm = p;
    pp[j] += h;
    pm[j] -= h;
    Eigen::VectorXd col;
    if (pm[j] < lo[j]) {
      col = (res(pp) - r0) / (pp[j] - p[j]);
    } else if (pp[j] > hi[j]) {
      col = (r0 - res(pm)) / (p[j] - pm[j]);
    } else {
      col = (res(pp) - res(pm)) / (pp[j] - pm[j]);
    }
    J.col(static_cast<Eigen::Index>(j)) = col;
  }
  return J;
}

inline double scaled_gradient(const Eigen::MatrixXd& J, const Eigen::VectorXd& r) {
  const double sqrt_m = std::sqrt(static_cast<double>(r.size()));
  double g = 0.0;
  for (Eigen::Index j = 0; j < J.cols(); ++j) {
    const double cn = J.col(j).norm();
    if (cn > 0.0) g = std::max(g, std::abs(J.col(j).dot(r)) / (cn * sqrt_m));
  }
  return g;
}

inline double condition_number(const Eigen::MatrixXd& J) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[s.size() - 1] == 0.0) return std::numeric_limits<double>::infinity();
  return s[0] / s[s.size() - 1];
}

inline LmOutcome levenberg_marquardt(const Residuals& res, std::vector<double> p, std::span<const double> lo,
                                     std::span<const double> hi, double tol, std::size_t max_iter) {
  const auto n = static_cast<Eigen::Index>(p.size());
  auto clamp_all = [&](std::vector<double>& q) {
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = std::clamp(q[j], lo[j], hi[j]);
  };
  clamp_all(p);
  Eigen::VectorXd r = res(p);
  double cost = 0.5 * r.squaredNorm();
  LmOutcome out;
  out.params = p;
  if (!std::isfinite(cost)) return out;

  double mu = -1.0, nu = 2.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd J = jacobian(res, p, r, lo, hi);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    out.gradient_norm = scaled_gradient(J, r);

    // Undamped Gauss-Newton step, used for the convergence test.
    Eigen::VectorXd gn = JtJ.ldlt().solve(-g);
    double rel_gn = std::numeric_limits<double>::infinity();
    if (gn.allFinite()) {
      rel_gn = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        rel_gn = std::max(rel_gn, std::abs(gn[j]) / (std::abs(p[static_cast<std::size_t>(j)]) + tol));
    }
    if (out.gradient_norm <= tol && rel_gn <= tol) {
      out.converged = true;
      break;
    }

    if (mu < 0.0) mu = 1e-3 * JtJ.diagonal().maxCoeff();
    bool accepted = false;
    for (int inner = 0; inner < 60 && !accepted; ++inner) {
      Eigen::MatrixXd A = JtJ;
      for (Eigen::Index j = 0; j < n; ++j) A(j, j) += mu * std::max(JtJ(j, j), 1e-30);
      Eigen::VectorXd step = A.ldlt().solve(-g);
      if (!step.allFinite()) {
        mu *= nu;
        nu *= 2.0;
        continue;
      }
      std::vector<double> trial = p;
      for (Eigen::Index j = 0; j < n; ++j) trial[static_cast<std::size_t>(j)] += step[j];
      clamp_all(trial);
      Eigen::VectorXd actual_step(n);
      for (Eigen::Index j = 0; j < n; ++j)
        actual_step[j] = trial[static_cast<std::size_t>(j)] - p[static_cast<std::size_t>(j)];
      const Eigen::VectorXd rt = res(trial);
      const double cost_t = 0.5 * rt.squaredNorm();
      const double predicted = -(g.dot(actual_step) + 0.5 * actual_step.dot(JtJ * actual_step));
      const double rho = predicted > 0.0 ? (cost - cost_t) / predicted : -1.0;
      if (std::isfinite(cost_t) && cost_t < cost && rho > 0.0) {
        p = std::move(trial);
        r = rt;
        cost = cost_t;
        mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
        nu = 2.0;
        accepted = true;
      } else {
        mu *= nu;
        nu *= 2.0;
      }
    }
    if (!accepted) {
      // No descent direction left at working precision.
      out.converged = out.gradient_norm <= tol;
      break;
    }
  }
  out.params = p;
  out.rmse = std::sqrt(2.0 * cost / static_cast<double>(r.size()));
  const Eigen::MatrixXd Jf = jacobian(res, p, r, lo, hi);
  out.gradient_norm = scaled_gradient(Jf, r);
  out.condition = condition_number(Jf);
  return out;
}

inline std::vector<double> default_guess(const ModelSpec& m, std::span<const double> taus, std::span<const double> y) {
  const std::size_t n = taus.size();
  const double ymax = *std::max_element(y.begin(), y.end());
  switch (m.family) {
    case ModelFamily::power_law: {
      std::vector<double> lx, ly;
      for (std::size_t i = 0; i < n; ++i)
        if (taus[i] > 0.0 && y[i] > 0.0) {
          lx.push_back(std::log(taus[i]));
          ly.push_back(std::log(y[i]));
        }
      if (lx.size() >= 2) {
        const auto f = fit_line(lx, ly);
        return {std::exp(f.intercept), f.slope};
      }
      return {std::max(ymax, 1e-6), 1.0};
    }
    case ModelFamily::saturating_linear: {
      const double slope = n >= 2 ? (y[1] - y[0]) / (taus[1] - taus[0]) : ymax;
      const double a = std::max(slope, 1e-6);
      return {a, a / std::max(ymax, 1e-12)};
    }
    case ModelFamily::logistic: {
      const double phi0 = std::max(y[0], 1e-12);
      // Early exponential rate from samples below half the observed maximum.
      std::vector<double> tx, ly;
      for (std::size_t i = 0; i < n; ++i) {
        if (y[i] > 0.0 && (y[i] < 0.5 * ymax || tx.size() < 2)) {
          tx.push_back(taus[i]);
          ly.push_back(std::log(y[i]));
        }
      }
      double rate = 1.0;
      if (tx.size() >= 2) rate = fit_line(tx, ly).slope;
      const double a = std::max(rate, 1e-6);
      const double b = a / std::pow(std::max(ymax, 1e-12), m.alpha);
      return {a, b, phi0};
    }
  }
  return {};
}

}  // namespace detail

/// Damped Gauss-Newton (Levenberg-Marquardt) fit with multi-start. Start 0 is
/// the supplied (or default) guess; the remaining starts perturb it with a
/// fixed-seed generator, so results are deterministic. The best converged
/// start by final residual wins; ties go to the earlier start.
inline FitResult fit(const FitProblem& problem, const FitOptions& opt = {}) {
  const auto& s = problem.series;
  validate(s);
  const auto names = parameter_names(problem.model);
  const std::size_t np = names.size();
  if (problem.model.family == ModelFamily::logistic && problem.model.alpha < 0)
    throw UnsupportedAlphaError("alpha must be zero or a positive integer");
  if (s.size() < 2 * np)
    throw DomainError("fit: need at least " + std::to_string(2 * np) + " samples for " + std::to_string(np) +
                      " parameters, got " + std::to_string(s.size()));
  if (!(opt.tol > 0.0) || opt.max_iter == 0 || opt.starts == 0) throw DomainError("fit: invalid options");

  const auto [vmin, vmax] = std::minmax_element(s.values.begin(), s.values.end());
  if (*vmax - *vmin <= 1e-12 * std::max(std::abs(*vmax), std::abs(*vmin)))
    throw RankDeficiencyError("fit: series is constant; growth rates are not identifiable");

  const double origin = problem.time_origin.value_or(
      problem.model.family == ModelFamily::power_law ? 0.0 : s.times.front());
  std::vector<double> taus(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    taus[i] = s.times[i] - origin;
    if (taus[i] < 0.0) throw DomainError("fit: samples precede the time origin");
  }

  std::vector<double> targets = s.values;
  if (problem.loss_space == LossSpace::log) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (!(targets[i] > 0.0))
        throw DomainError("fit: log loss requires strictly positive values (index " + std::to_string(i) + ")");
      targets[i] = std::log(targets[i]);
    }
  }

  std::vector<double> lo = problem.lower, hi = problem.upper;
  if (lo.empty()) {
    lo.assign(np, 1e-12);
    if (problem.model.family == ModelFamily::power_law) lo[1] = -1e12;
  }
  if (hi.empty()) hi.assign(np, 1e12);
  if (lo.size() != np || hi.size() != np) throw DomainError("fit: bounds must have one entry per parameter");
  for (std::size_t j = 0; j < np; ++j)
    if (!(lo[j] < hi[j])) throw DomainError("fit: lower bound must be below upper bound for " + names[j]);

  std::vector<double> guess = problem.initial_guess;
  if (guess.empty()) guess = detail::default_guess(problem.model, taus, s.values);
  if (guess.size() != np) throw DomainError("fit: initial guess must have one entry per parameter");
  for (std::size_t j = 0; j < np; ++j) guess[j] = std::clamp(guess[j], lo[j], hi[j]);

  detail::Residuals res{problem.model, taus, targets, problem.loss_space};
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 0.5);

  std::optional<detail::LmOutcome> best_conv, best_any;
  std::size_t best_conv_idx = 0, n_conv = 0;
  for (std::size_t k = 0; k < opt.starts; ++k) {
    std::vector<double> start = guess;
    if (k > 0) {
      for (std::size_t j = 0; j < np; ++j) {
        const bool additive = problem.model.family == ModelFamily::power_law && j == 1;
        start[j] = additive ? start[j] + normal(rng) : start[j] * std::exp(normal(rng));
      }
    }
    detail::LmOutcome o;
    try {
      o = detail::levenberg_marquardt(res, start, lo, hi, opt.tol, opt.max_iter);
    } catch (const NumericalError&) {
      continue;
    }
    if (!std::isfinite(o.rmse)) continue;
    if (!best_any || o.rmse < best_any->rmse) best_any = o;
    if (o.converged) {
      ++n_conv;
      if (!best_conv || o.rmse < best_conv->rmse * (1.0 - 1e-12)) {
        best_conv = o;
        best_conv_idx = k;
      }
    }
  }
  if (!best_conv) {
    std::string msg = "fit: no start converged";
    if (best_any) {
      msg += " (best rmse " + format_double(best_any->rmse) + ")";
      throw ConvergenceError(msg, ConvergenceError::Reason::max_iterations, best_any->params, best_any->rmse);
    }
    throw ConvergenceError(msg, ConvergenceError::Reason::max_iterations, guess,
                           std::numeric_limits<double>::infinity());
  }

  FitResult r;
  r.model = problem.model;
  r.names = names;
  r.params = best_conv->params;
  r.rmse = best_conv->rmse;
  r.iterations = best_conv->iterations;
  r.converged = true;
  r.gradient_norm = best_conv->gradient_norm;
  r.jacobian_condition = best_conv->condition;
  r.time_origin = origin;
  r.start_index = best_conv_idx;
  r.starts_converged = n_conv;
  if (!std::isfinite(r.jacobian_condition) || r.jacobian_condition > 1e14)
    throw RankDeficiencyError("fit: Jacobian is rank deficient at the solution (condition " +
                              format_double(r.jacobian_condition) + ")");

  switch (problem.model.family) {
    case ModelFamily::power_law: break;
    case ModelFamily::saturating_linear:
      r.terminal_forecast = GrowthValue::finite(saturating_terminal_value({r.params[0], r.params[1]}));
      break;
    case ModelFamily::logistic: {
      const GeneralizedLogisticParams lp{r.params[0], r.params[1], problem.model.alpha, r.params[2]};
      r.regime_violation = lp.a < lp.b * std::pow(lp.phi0, lp.alpha);
      if (!r.regime_violation) {
        r.terminal_forecast = terminal_value(lp);
      } else {
        r.terminal_forecast = lp.alpha == 0 ? GrowthValue::finite(0.0)
                                            : GrowthValue::finite(std::pow(lp.a / lp.b, 1.0 / lp.alpha));
      }
      break;
    }
  }
  return r;
}

/// Evaluates a fitted model at series times.
inline std::vector<double> fitted_curve(const FitResult& r, std::span<const double> times) {
  std::vector<double> taus(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) taus[i] = times[i] - r.time_origin;
  return model_values(r.model, r.params, taus);
}

// ---------------------------------------------------------------------------
// Early growth classification

enum class EarlyGrowth { exponential, power_law, indeterminate };

inline std::string_view to_string(EarlyGrowth g) {
  switch (g) {
    case EarlyGrowth::exponential: return "exponential";
    case EarlyGrowth::power_law: return "power-law";
    case EarlyGrowth::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

struct EarlyGrowthVerdict {
  EarlyGrowth verdict = EarlyGrowth::indeterminate;
  double exponential_rate = 0.0;  // slope of ln y against t
  double exponential_r2 = 0.0;
  double power_exponent = 0.0;    // slope of ln y against ln t
  double power_r2 = -std::numeric_limits<double>::infinity();
  std::size_t points = 0;
};

inline constexpr double kClassifierMargin = 0.02;

/// Compares straight-line fits of (t, ln y) and (ln t, ln y) over the leading
/// `window` fraction of the observed time span. The power-law fit only uses
/// samples with t > 0.
inline EarlyGrowthVerdict early_growth_classifier(const TimeSeries& series, double window) {
  validate(series);
  if (!(window > 0.0 && window <= 1.0)) throw DomainError("early_growth_classifier: window must lie in (0, 1]");
  if (series.empty()) throw DomainError("early_growth_classifier: empty series");
  const double t_first = series.times.front();
  const double cutoff = t_first + window * (series.times.back() - t_first);
  const double slack = 1e-12 * std::max(std::abs(cutoff), 1.0);
  std::size_t count = 0;
  while (count < series.size() && series.times[count] <= cutoff + slack) ++count;
  if (count < 8)
    throw DomainError("early_growth_classifier: need at least 8 samples in the window, got " + std::to_string(count));

  std::vector<double> t, ly, lt, ly_pos;
  for (std::size_t i = 0; i < count; ++i) {
    const double y = series.values[i];
    if (!(y > 0.0))
      throw DomainError("early_growth_classifier: non-positive value " + format_double(y) + " at index " +
                        std::to_string(i) + " cannot be logged");
    t.push_back(series.times[i]);
    ly.push_back(std::log(y));
    if (series.times[i] > 0.0) {
      lt.push_back(std::log(series.times[i]));
      ly_pos.push_back(std::log(y));
    }
  }

  EarlyGrowthVerdict v;
  v.points = count;
  const auto e = fit_line(t, ly);
  v.exponential_rate = e.slope;
  v.exponential_r2 = e.r2;
  if (lt.size() >= 3) {
    const auto p = fit_line(lt, ly_pos);
    v.power_exponent = p.slope;
    v.power_r2 = p.r2;
  }
  if (std::abs(v.exponential_r2 - v.power_r2) < kClassifierMargin) {
    v.verdict = EarlyGrowth::indeterminate;
  } else {
    v.verdict = v.exponential_r2 > v.power_r2 ? EarlyGrowth::exponential : EarlyGrowth::power_law;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Saturation onset

struct SaturationOnset {
  double half_terminal_time = 0.0;    // series time at which the fit reaches half its terminal value
  std::optional<double> crude_scale;  // 1/b for the saturating-linear model
  double terminal_value = 0.0;
  bool within_observed_span = false;
};

/// Time at which the fitted model reaches half its terminal value. If the
/// model already starts above that level, the time origin is returned.
inline SaturationOnset saturation_onset(const TimeSeries& series, const FitResult& fitted) {
  validate(series);
  SaturationOnset out;
  double tau = 0.0;
  switch (fitted.model.family) {
    case ModelFamily::power_law:
      throw NotApplicableError("saturation_onset: the power law has no terminal value");
    case ModelFamily::saturating_linear: {
      const double a = fitted.params[0], b = fitted.params[1];
      out.terminal_value = a / b;
      out.crude_scale = 1.0 / b;
      tau = std::log(2.0) / b;
      break;
    }
    case ModelFamily::logistic: {
      const int alpha = fitted.model.alpha;
      if (alpha == 0) throw NotApplicableError("saturation_onset: alpha = 0 growth is unbounded");
      const double a = fitted.params[0], b = fitted.params[1], phi0 = fitted.params[2];
      const double K = std::pow(a / b, 1.0 / alpha);
      out.terminal_value = K;
      const double half = 0.5 * K;
      if (phi0 >= half || phi0 <= 0.0) {
        tau = 0.0;
        break;
      }
      auto value_at = [&](double t) {
        const double tt[] = {t};
        return model_values(fitted.model, fitted.params, tt)[0];
      };
      double hi = 1.0 / a;
      while (value_at(hi) < half) {
        hi *= 2.0;
        if (hi > 1e12 / a) throw RootNotFoundError("saturation_onset: model never reaches half its terminal value");
      }
      auto fdf = [&](double t) {
        const double v = value_at(t);
        return std::pair{v - half, v * (a - b * std::pow(v, alpha))};
      };
      tau = solve_bracketed(fdf, 0.0, hi, 1e-14).root;
      break;
    }
  }
  out.half_terminal_time = fitted.time_origin + tau;
  out.within_observed_span =
      !series.empty() && out.half_terminal_time >= series.times.front() && out.half_terminal_time <= series.times.back();
  return out;
}

}  // namespace growthkit
