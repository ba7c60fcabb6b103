// growthkit command-line front end: simulate, fit, analyze, compete, pde,
// classify-early. Every run writes a JSON report (schema 1) and, where there
// is something to draw, plot data in CSV or JSON.

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "growthkit/growthkit.hpp"

namespace gk = growthkit;
using json = nlohmann::ordered_json;

namespace {

constexpr int kSchema = 1;

struct Common {
  std::string out_dir;
  std::string name;
  std::string format = "csv";
  std::string axes = "linear";
};

void add_common(CLI::App* sub, Common& c) {
  const char* env = std::getenv("GROWTHKIT_OUT_DIR");
  c.out_dir = env && *env ? env : ".";
  c.name = sub->get_name();
  sub->add_option("--out-dir", c.out_dir, "Output directory (default: $GROWTHKIT_OUT_DIR or .)");
  sub->add_option("--name", c.name, "Base name for output files")->capture_default_str();
  sub->add_option("--format", c.format, "Plot data format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  sub->add_option("--axes", c.axes, "Plot axes")
      ->check(CLI::IsMember({"linear", "log-x", "log-y", "log-log"}))
      ->capture_default_str();
}

// Config files hold plain key=value lines; keys outside a [section] are
// applied to whichever subcommand is running.
class SubcommandConfig : public CLI::ConfigINI {
 public:
  explicit SubcommandConfig(const CLI::App* app) : app_(app) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    const auto subs = app_->get_subcommands();
    if (!subs.empty())
      for (auto& item : items)
        if (item.parents.empty()) item.parents = {subs.front()->get_name()};
    return items;
  }

 private:
  const CLI::App* app_;
};

// ---------------------------------------------------------------------------
// small helpers

double parse_real(std::string_view text, const std::string& flag) {
  const auto s = gk::detail::trim(text);
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
    throw gk::ParameterError(flag + ": cannot parse '" + std::string(s) + "' as a number");
  return v;
}

// Multi-value flags arrive as lists of strings: comma separated on the command
// line, or as an array in a config file.
using List = std::vector<std::string>;

std::vector<double> parse_list(const List& items, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : items)
    for (auto field : gk::detail::split_fields(item, ',')) out.push_back(parse_real(field, flag));
  if (out.empty()) throw gk::ParameterError(flag + ": expected at least one value");
  return out;
}

json number_or_unbounded(const gk::GrowthValue& v) {
  if (v.unbounded) return "unbounded";
  return v.value;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

std::vector<double> geomspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * static_cast<double>(i) / static_cast<double>(n - 1));
  v.front() = a;
  v.back() = b;
  return v;
}

std::filesystem::path prepare_dir(const Common& c) {
  std::filesystem::path dir(c.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw gk::IoError("cannot create output directory '" + c.out_dir + "'");
  return dir;
}

gk::PlotFormat plot_format(const Common& c) { return c.format == "json" ? gk::PlotFormat::json : gk::PlotFormat::csv; }

std::string plot_path(const Common& c, const std::string& suffix = "plot") {
  return (std::filesystem::path(c.out_dir) / (c.name + "_" + suffix + "." + c.format)).string();
}

void write_report(const Common& c, json& report) {
  const auto path = (std::filesystem::path(c.out_dir) / (c.name + ".json")).string();
  const std::string text = report.dump(2) + "\n";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw gk::IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw gk::IoError("write failure on '" + path + "'");
  std::cout << text;
}

json header(const std::string& command) {
  json r;
  r["schema"] = kSchema;
  r["command"] = command;
  return r;
}

std::string kv(const std::string& k, double v) { return k + "=" + gk::format_double(v); }

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  Common common;
  std::string model;
  List a{"1"}, b{"1"}, beta{"1"}, alpha{"1"}, phi0{"1"};
  double t_start = 0.0, t_end = 12.0;
  std::size_t points = 241;
  std::string grid = "auto";
};

struct Curve {
  std::string label;
  json params;
  gk::GrowthValue terminal;
  std::vector<double> values;
};

int run_simulate(const SimulateArgs& args) {
  const auto family = gk::parse_model_family(args.model);
  const auto axes = gk::parse_axes(args.common.axes);
  if (!(args.t_end > args.t_start) || args.t_start < 0.0)
    throw gk::DomainError("--t-start/--t-end: need 0 <= t-start < t-end");
  if (args.points < 2) throw gk::DomainError("--points: need at least 2");

  const bool log_grid = args.grid == "log" || (args.grid == "auto" && gk::log_x(axes));
  const double start = log_grid && args.t_start == 0.0 ? args.t_end * 1e-4 : args.t_start;
  const auto grid = log_grid ? geomspace(start, args.t_end, args.points) : linspace(start, args.t_end, args.points);

  const auto as = parse_list(args.a, "--a"), bs = parse_list(args.b, "--b");
  std::vector<Curve> curves;
  // Validate every combination before computing anything.
  switch (family) {
    case gk::ModelFamily::power_law:
      for (double a : as)
        for (double beta : parse_list(args.beta, "--beta")) {
          gk::validate(gk::PowerLawParams{a, beta});
          curves.push_back({kv("a", a) + " " + kv("beta", beta), {{"a", a}, {"beta", beta}}, {}, {}});
        }
      break;
    case gk::ModelFamily::saturating_linear:
      for (double a : as)
        for (double b : bs) {
          gk::validate(gk::SaturatingLinearParams{a, b});
          curves.push_back({kv("a", a) + " " + kv("b", b), {{"a", a}, {"b", b}}, {}, {}});
        }
      break;
    case gk::ModelFamily::logistic:
      for (double a : as)
        for (double b : bs)
          for (double al : parse_list(args.alpha, "--alpha"))
            for (double p0 : parse_list(args.phi0, "--phi0")) {
              const int alpha = gk::alpha_from_real(al);
              gk::validate(gk::GeneralizedLogisticParams{a, b, alpha, p0});
              curves.push_back({kv("a", a) + " " + kv("b", b) + " " + kv("alpha", al) + " " + kv("phi0", p0),
                                {{"a", a}, {"b", b}, {"alpha", alpha}, {"phi0", p0}},
                                {},
                                {}});
            }
      break;
  }

  std::vector<gk::PlotSeries> series;
  json jcurves = json::array();
  for (auto& c : curves) {
    std::vector<double> xs;
    std::size_t truncated = 0;
    switch (family) {
      case gk::ModelFamily::power_law: {
        const gk::PowerLawParams p{c.params["a"], c.params["beta"]};
        for (double t : grid) c.values.push_back(gk::eval_power_law(p, t));
        xs = grid;
        c.terminal = p.beta > 0.0 ? gk::GrowthValue::infinite() : gk::GrowthValue::finite(p.beta == 0.0 ? p.a : 0.0);
        break;
      }
      case gk::ModelFamily::saturating_linear: {
        const gk::SaturatingLinearParams p{c.params["a"], c.params["b"]};
        for (double t : grid) c.values.push_back(gk::eval_saturating_linear(p, t));
        xs = grid;
        c.terminal = gk::GrowthValue::finite(gk::saturating_terminal_value(p));
        break;
      }
      case gk::ModelFamily::logistic: {
        const gk::GeneralizedLogisticParams p{c.params["a"], c.params["b"], c.params["alpha"], c.params["phi0"]};
        // Unbounded points (alpha = 0 overflow) end the emitted curve.
        for (const auto& v : gk::logistic_curve(p, grid)) {
          if (v.unbounded) {
            ++truncated;
            continue;
          }
          if (truncated) continue;
          xs.push_back(grid[c.values.size()]);
          c.values.push_back(v.value);
        }
        c.terminal = gk::terminal_value(p);
        break;
      }
    }
    series.push_back({c.label, xs, c.values});
    json jc;
    jc["label"] = c.label;
    jc["params"] = c.params;
    jc["terminal_value"] = number_or_unbounded(c.terminal);
    jc["points"] = c.values.size();
    jc["final_time"] = xs.empty() ? json(nullptr) : json(xs.back());
    jc["final_value"] = c.values.empty() ? json(nullptr) : json(c.values.back());
    if (truncated) jc["unbounded_points_dropped"] = truncated;
    jcurves.push_back(std::move(jc));
  }

  prepare_dir(args.common);
  const auto path = plot_path(args.common);
  gk::emit_plot_series_file(series, axes, path, plot_format(args.common));

  json r = header("simulate");
  r["model"] = std::string(gk::to_string(family));
  r["axes"] = args.common.axes;
  r["grid"] = {{"start", grid.front()}, {"end", grid.back()}, {"points", grid.size()},
               {"spacing", log_grid ? "log" : "linear"}};
  r["curves"] = std::move(jcurves);
  r["plot_file"] = path;
  write_report(args.common, r);
  return 0;
}

// ---------------------------------------------------------------------------
// input series shared by fit and classify-early

struct InputArgs {
  std::string path;
  std::size_t time_column = 0, value_column = 1;
  std::string delimiter = ",";
  bool cumulative = false;
  std::optional<double> accumulate_from;
};

void add_input(CLI::App* sub, InputArgs& in) {
  sub->add_option("--input", in.path, "CSV file with time,value rows")->required();
  sub->add_option("--time-column", in.time_column, "Zero-based time column")->capture_default_str();
  sub->add_option("--value-column", in.value_column, "Zero-based value column")->capture_default_str();
  sub->add_option("--delimiter", in.delimiter, "Field delimiter")->capture_default_str();
  sub->add_flag("--cumulative,!--no-cumulative", in.cumulative, "Work on running prefix sums of the values");
  sub->add_option("--accumulate-from", in.accumulate_from, "Drop samples before this time (accumulation start)");
}

gk::TimeSeries load_input(const InputArgs& in) {
  if (in.delimiter.size() != 1) throw gk::ParameterError("--delimiter: expected a single character");
  gk::CsvSchema schema;
  schema.time_column = in.time_column;
  schema.value_column = in.value_column;
  schema.delimiter = in.delimiter[0];
  auto s = gk::read_csv_file(in.path, schema);
  if (s.label.empty()) s.label = "data";
  if (in.accumulate_from) s = gk::slice_from(s, *in.accumulate_from);
  if (in.cumulative) s = gk::cumulate(s);
  return s;
}

json describe_input(const InputArgs& in, const gk::TimeSeries& s) {
  json j;
  j["path"] = in.path;
  j["rows"] = s.size();
  j["first_time"] = s.times.front();
  j["last_time"] = s.times.back();
  j["cumulative"] = in.cumulative;
  j["accumulate_from"] = in.accumulate_from ? json(*in.accumulate_from) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  Common common;
  InputArgs input;
  std::string model;
  double alpha = 1.0;
  std::string loss = "log";
  std::optional<double> time_origin;
  List guess;
  double tol = 1e-10;
  std::size_t max_iter = 200;
  std::size_t starts = 8;
  std::size_t curve_points = 200;
};

int run_fit(const FitArgs& args) {
  const auto family = gk::parse_model_family(args.model);
  const auto axes = gk::parse_axes(args.common.axes);
  gk::ModelSpec model{family, family == gk::ModelFamily::logistic ? gk::alpha_from_real(args.alpha) : 1};
  const auto s = load_input(args.input);

  // The data must be drawable before any fitting work is done.
  auto data = gk::to_plot_series(s);
  try {
    gk::check_plottable(data, axes);
  } catch (const gk::DomainError& e) {
    throw gk::DomainError(std::string("input data cannot be plotted on ") + std::string(gk::to_string(axes)) +
                          " axes: " + e.what());
  }

  gk::FitProblem problem;
  problem.series = s;
  problem.model = model;
  problem.loss_space = args.loss == "linear" ? gk::LossSpace::linear : gk::LossSpace::log;
  problem.time_origin = args.time_origin;
  if (!args.guess.empty()) problem.initial_guess = parse_list(args.guess, "--guess");
  gk::FitOptions opt;
  opt.tol = args.tol;
  opt.max_iter = args.max_iter;
  opt.starts = args.starts;
  const auto r = gk::fit(problem, opt);

  // Overlay: data plus the fitted curve on a dense grid over the data span.
  double lo = s.times.front();
  if (gk::log_x(axes)) lo = *std::find_if(s.times.begin(), s.times.end(), [](double t) { return t > 0.0; });
  lo = std::max(lo, r.time_origin);
  const auto grid = gk::log_x(axes) ? geomspace(lo, s.times.back(), args.curve_points)
                                    : linspace(lo, s.times.back(), args.curve_points);
  std::vector<gk::PlotSeries> series{data, {"fit", grid, gk::fitted_curve(r, grid)}};

  prepare_dir(args.common);
  const auto path = plot_path(args.common);
  gk::emit_plot_series_file(series, axes, path, plot_format(args.common));

  json rep = header("fit");
  rep["input"] = describe_input(args.input, s);
  rep["model"] = std::string(gk::to_string(family));
  if (family == gk::ModelFamily::logistic) rep["alpha"] = model.alpha;
  rep["loss_space"] = args.loss;
  json params;
  for (std::size_t i = 0; i < r.names.size(); ++i) params[r.names[i]] = r.params[i];
  rep["params"] = params;
  rep["rmse"] = r.rmse;
  rep["iterations"] = r.iterations;
  rep["converged"] = r.converged;
  rep["gradient_norm"] = r.gradient_norm;
  rep["jacobian_condition"] = r.jacobian_condition;
  rep["terminal_forecast"] = r.terminal_forecast ? number_or_unbounded(*r.terminal_forecast) : json(nullptr);
  rep["regime_violation"] = r.regime_violation;
  rep["time_origin"] = r.time_origin;
  rep["start_index"] = r.start_index;
  rep["starts_converged"] = r.starts_converged;
  const bool has_onset = family == gk::ModelFamily::saturating_linear ||
                         (family == gk::ModelFamily::logistic && model.alpha >= 1 && !r.regime_violation);
  if (has_onset) {
    const auto on = gk::saturation_onset(s, r);
    json jo;
    jo["half_terminal_time"] = on.half_terminal_time;
    jo["crude_scale"] = on.crude_scale ? json(*on.crude_scale) : json(nullptr);
    jo["terminal_value"] = on.terminal_value;
    jo["within_observed_span"] = on.within_observed_span;
    rep["saturation_onset"] = jo;
  } else {
    rep["saturation_onset"] = nullptr;
  }
  rep["plot_file"] = path;
  write_report(args.common, rep);
  return 0;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  Common common;
  std::string demo = "coupled-logistic";
  gk::CoupledLogisticParams p;
  List guess;
  List jacobian;
  double t_end = 10.0;
};

json describe(const gk::StabilityReport& rep) {
  json j;
  if (rep.fixed_point) {
    j["fixed_point"] = {{"r_c", rep.fixed_point->r_c()},
                        {"s_c", rep.fixed_point->s_c()},
                        {"residual_norm", rep.fixed_point->residual_norm},
                        {"iterations", rep.fixed_point->iterations}};
  }
  const auto& J = rep.jacobian;
  j["jacobian"] = {{"A", J.A}, {"B", J.B}, {"C", J.C}, {"D", J.D}};
  j["trace"] = J.trace();
  j["determinant"] = J.determinant();
  j["eigenvalues"] = json::array({{{"re", rep.eigenvalues.lambda1.real()}, {"im", rep.eigenvalues.lambda1.imag()}},
                                  {{"re", rep.eigenvalues.lambda2.real()}, {"im", rep.eigenvalues.lambda2.imag()}}});
  j["classification"] = std::string(gk::to_string(rep.classification));
  return j;
}

int run_analyze(const AnalyzeArgs& args) {
  json rep = header("analyze");
  if (!args.jacobian.empty()) {
    const auto v = parse_list(args.jacobian, "--jacobian");
    if (v.size() != 4) throw gk::ParameterError("--jacobian: expected four values A,B,C,D");
    rep["system"] = "jacobian";
    rep.update(describe(gk::classify({v[0], v[1], v[2], v[3]})));
    prepare_dir(args.common);
    write_report(args.common, rep);
    return 0;
  }

  const auto& p = args.p;
  for (double v : {p.a_r, p.b_r, p.e_rs, p.a_s, p.b_s, p.e_sr})
    if (!std::isfinite(v)) throw gk::ParameterError("analyze: parameters must be finite");
  std::array<double, 2> guess{1.0, 1.0};
  if (!args.guess.empty()) {
    const auto g = parse_list(args.guess, "--guess");
    if (g.size() != 2) throw gk::ParameterError("--guess: expected two values R,S");
    guess = {g[0], g[1]};
  } else {
    // Interior equilibrium of the two linear nullclines, when it exists.
    const double det = p.b_r * p.b_s - p.e_rs * p.e_sr;
    if (std::abs(det) > 1e-12) {
      const double r = (p.a_r * p.b_s + p.e_rs * p.a_s) / det;
      const double s = (p.b_r * p.a_s + p.e_sr * p.a_r) / det;
      if (r > 0.0 && s > 0.0) guess = {r, s};
    }
  }
  const gk::CoupledLogisticSystem sys{p};
  const auto st = gk::analyze_equilibrium(sys, guess);
  rep["system"] = args.demo;
  rep["params"] = {{"a_r", p.a_r}, {"b_r", p.b_r}, {"e_rs", p.e_rs}, {"a_s", p.a_s}, {"b_s", p.b_s}, {"e_sr", p.e_sr}};
  rep["guess"] = guess;
  rep.update(describe(st));

  // Phase-plane trajectories from four points around the equilibrium.
  const auto fp = st.fixed_point->point;
  std::vector<gk::PlotSeries> series;
  for (auto [fr, fs] : {std::pair{0.5, 0.5}, {1.5, 0.5}, {0.5, 1.5}, {1.5, 1.5}}) {
    const double y0[] = {std::max(fp[0], 0.1) * fr, std::max(fp[1], 0.1) * fs};
    const auto traj = gk::integrate_adaptive(sys, y0, 0.0, args.t_end, {.max_step = args.t_end / 200.0});
    series.push_back({"R0=" + gk::format_double(y0[0]) + " S0=" + gk::format_double(y0[1]), traj.component(0),
                      traj.component(1)});
  }
  prepare_dir(args.common);
  const auto path = plot_path(args.common);
  gk::emit_plot_series_file(series, gk::parse_axes(args.common.axes), path, plot_format(args.common), "R");
  rep["plot_file"] = path;
  write_report(args.common, rep);
  return 0;
}

// ---------------------------------------------------------------------------
// compete

struct CompeteArgs {
  Common common;
  gk::CompetitionParams p;
  double phi1 = 0.1, phi2 = 0.1;
  std::optional<double> t_end;
  double rel_tol = 1e-10;
};

int run_compete(const CompeteArgs& args) {
  const auto& p = args.p;
  gk::validate(p);
  if (!(args.phi1 > 0.0) || !(args.phi2 > 0.0)) throw gk::ParameterError("--phi1/--phi2: need positive populations");
  const double t_end = args.t_end.value_or(50.0 / std::min(p.a1, p.a2));
  if (!(t_end > 0.0)) throw gk::ParameterError("--t-end: need a positive horizon");
  const auto verdict = gk::exclusion_verdict(p);
  const double y0[] = {args.phi1, args.phi2};
  const auto traj = gk::integrate_adaptive(gk::CompetitionSystem{p}, y0, 0.0, t_end,
                                           {.rel_tol = args.rel_tol, .abs_tol = args.rel_tol * 1e-3,
                                            .max_step = t_end / 500.0});

  std::vector<gk::PlotSeries> series{{"phi1", traj.times(), traj.component(0)},
                                     {"phi2", traj.times(), traj.component(1)}};
  prepare_dir(args.common);
  const auto path = plot_path(args.common);
  gk::emit_plot_series_file(series, gk::parse_axes(args.common.axes), path, plot_format(args.common));

  json rep = header("compete");
  rep["params"] = {{"a1", p.a1}, {"a2", p.a2}, {"d1", p.d1}, {"d2", p.d2}, {"b", p.b}, {"c", p.c}};
  rep["ratio"] = p.a1 * p.d2 / (p.a2 * p.d1);
  rep["verdict"] = std::string(gk::to_string(verdict.survivor));
  rep["limit"] = verdict.limit ? json(*verdict.limit) : json(nullptr);
  if (const auto eq = verdict.equilibrium()) rep["equilibrium"] = *eq;
  else rep["equilibrium"] = nullptr;
  rep["t_end"] = t_end;
  const auto last = traj.back();
  rep["final_state"] = {last[0], last[1]};
  rep["final_fraction_of_initial"] = {last[0] / args.phi1, last[1] / args.phi2};
  rep["steps"] = traj.size() - 1;
  rep["plot_file"] = path;
  write_report(args.common, rep);
  return 0;
}

// ---------------------------------------------------------------------------
// pde

struct PdeArgs {
  Common common;
  gk::AdvectionSetup setup;
  std::string forcing = "newtonian";
  List probes{"50"};
  std::string t_end = "long";
  std::size_t samples = 121;
};

int run_pde(PdeArgs args) {
  auto& s = args.setup;
  s.forcing = args.forcing == "none" ? gk::Forcing::none : gk::Forcing::newtonian;
  gk::validate(s);
  const auto probes = parse_list(args.probes, "--probe-x");
  for (double x : probes)
    if (!(x > s.x_min && x < s.x_max)) throw gk::DomainError("--probe-x: " + gk::format_double(x) + " outside the grid");
  const double t_end = args.t_end == "long" ? 100.0 * std::pow(s.x_max, 1.5) : parse_real(args.t_end, "--t-end");
  if (!(t_end > 0.0)) throw gk::DomainError("--t-end: need a positive time");
  if (args.samples < 2) throw gk::DomainError("--samples: need at least 2");

  const auto times = geomspace(t_end * 1e-6, t_end, args.samples);
  gk::AdvectionRunStats stats;
  const auto snaps = gk::evolve_advection_fd(s, t_end, times, &stats);

  // Probe series in |phi| together with the horizontal asymptote at each probe.
  std::vector<gk::PlotSeries> series;
  json jprobes = json::array();
  for (double x : probes) {
    std::vector<double> mag;
    for (const auto& snap : snaps) mag.push_back(std::abs(snap.probe(x)));
    const double terminal = gk::euler_terminal_profile(s, x);
    const std::string tag = "x=" + gk::format_double(x);
    series.push_back({"|phi| " + tag, times, mag});
    series.push_back({"asymptote " + tag, times, std::vector<double>(times.size(), terminal)});

    // Early log-log slope over the first decade of the probe series.
    std::vector<double> lt, lp;
    for (std::size_t i = 0; i < times.size() && times[i] <= 10.0 * times.front(); ++i) {
      if (mag[i] > 0.0) {
        lt.push_back(std::log(times[i]));
        lp.push_back(std::log(mag[i]));
      }
    }
    json jp;
    jp["x"] = x;
    jp["terminal_profile"] = terminal;
    jp["final_abs_phi"] = mag.back();
    jp["relative_gap"] = std::abs(mag.back() - terminal) / terminal;
    jp["early_loglog_slope"] = lt.size() >= 2 ? json(gk::fit_line(lt, lp).slope) : json(nullptr);
    jprobes.push_back(std::move(jp));
  }

  // Terminal-profile comparison table over interior points.
  gk::PlotSeries fd_profile{"fd |phi|", {}, {}}, exact_profile{"terminal profile", {}, {}};
  json table = json::array();
  for (double x : geomspace(s.x_min * 2.0, s.x_max * 0.9, 12)) {
    const double fd = std::abs(snaps.back().probe(x));
    const double want = gk::euler_terminal_profile(s, x);
    fd_profile.x.push_back(x);
    fd_profile.y.push_back(fd);
    exact_profile.x.push_back(x);
    exact_profile.y.push_back(want);
    table.push_back({{"x", x}, {"fd_abs_phi", fd}, {"terminal_profile", want}, {"relative_gap", std::abs(fd - want) / want}});
  }

  prepare_dir(args.common);
  const auto axes = gk::parse_axes(args.common.axes);
  const auto path = plot_path(args.common);
  gk::emit_plot_series_file(series, axes, path, plot_format(args.common));
  const std::vector<gk::PlotSeries> prof{fd_profile, exact_profile};
  const auto prof_path = plot_path(args.common, "profile");
  gk::emit_plot_series_file(prof, axes, prof_path, plot_format(args.common), "x");

  json rep = header("pde");
  rep["setup"] = {{"c", s.c},         {"phi0", s.phi0},   {"x_min", s.x_min}, {"x_max", s.x_max},
                  {"n_cells", s.n_cells}, {"cfl", s.cfl}, {"forcing", args.forcing}};
  rep["t_end"] = t_end;
  rep["probes"] = std::move(jprobes);
  rep["terminal_profile_table"] = std::move(table);
  rep["steps"] = stats.steps;
  rep["min_dt"] = stats.min_dt;
  rep["max_dt"] = stats.max_dt;
  rep["plot_file"] = path;
  rep["profile_file"] = prof_path;
  write_report(args.common, rep);
  return 0;
}

// ---------------------------------------------------------------------------
// classify-early

struct ClassifyArgs {
  Common common;
  InputArgs input;
  double window = 0.25;
};

int run_classify(const ClassifyArgs& args) {
  const auto s = load_input(args.input);
  const auto v = gk::early_growth_classifier(s, args.window);
  json rep = header("classify-early");
  rep["input"] = describe_input(args.input, s);
  rep["window"] = args.window;
  rep["points"] = v.points;
  rep["verdict"] = std::string(gk::to_string(v.verdict));
  rep["exponential_rate"] = v.exponential_rate;
  rep["exponential_r2"] = v.exponential_r2;
  rep["power_exponent"] = v.power_exponent;
  rep["power_r2"] = std::isfinite(v.power_r2) ? json(v.power_r2) : json(nullptr);
  prepare_dir(args.common);
  write_report(args.common, rep);
  return 0;
}

int exit_code(const gk::Error& e) {
  switch (e.kind()) {
    case gk::ErrorKind::validation: return 2;
    case gk::ErrorKind::numerical: return 3;
    case gk::ErrorKind::io: return 4;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growthkit: growth-law simulation, fitting and stability analysis"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file supplying option values (command-line flags win)");
  app.config_formatter(std::make_shared<SubcommandConfig>(&app));
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Evaluate growth laws on a time grid");
  add_common(c_sim, sim.common);
  c_sim->add_option("--model", sim.model, "power, saturating or logistic")->required();
  c_sim->add_option("--a", sim.a, "Growth rate(s), comma separated")->capture_default_str()->delimiter(',');
  c_sim->add_option("--b", sim.b, "Damping coefficient(s)")->capture_default_str()->delimiter(',');
  c_sim->add_option("--beta", sim.beta, "Power-law exponent(s)")->capture_default_str()->delimiter(',');
  c_sim->add_option("--alpha", sim.alpha, "Logistic exponent(s): 0 or positive integers")->capture_default_str()->delimiter(',');
  c_sim->add_option("--phi0", sim.phi0, "Logistic initial value(s)")->capture_default_str()->delimiter(',');
  c_sim->add_option("--t-start", sim.t_start)->capture_default_str();
  c_sim->add_option("--t-end", sim.t_end)->capture_default_str();
  c_sim->add_option("--points", sim.points)->capture_default_str();
  c_sim->add_option("--grid", sim.grid, "Time grid spacing; auto is log on log-x axes")
      ->check(CLI::IsMember({"auto", "linear", "log"}))
      ->capture_default_str();

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Fit a growth law to a CSV time series");
  add_common(c_fit, fit.common);
  add_input(c_fit, fit.input);
  c_fit->add_option("--model", fit.model, "power, saturating or logistic")->required();
  c_fit->add_option("--alpha", fit.alpha, "Logistic exponent")->capture_default_str();
  c_fit->add_option("--loss", fit.loss, "Residual space")->check(CLI::IsMember({"log", "linear"}))->capture_default_str();
  c_fit->add_option("--time-origin", fit.time_origin, "Series time taken as model time zero");
  c_fit->add_option("--guess", fit.guess, "Initial parameters, comma separated")->delimiter(',');
  c_fit->add_option("--tol", fit.tol)->capture_default_str();
  c_fit->add_option("--max-iter", fit.max_iter)->capture_default_str();
  c_fit->add_option("--starts", fit.starts)->capture_default_str();
  c_fit->add_option("--curve-points", fit.curve_points)->check(CLI::Range(2, 1000000))->capture_default_str();

  AnalyzeArgs an;
  auto* c_an = app.add_subcommand("analyze", "Locate and classify an equilibrium of a planar system");
  add_common(c_an, an.common);
  c_an->add_option("--demo", an.demo, "Named demo system")
      ->check(CLI::IsMember({"coupled-logistic"}))
      ->capture_default_str();
  c_an->add_option("--a-r", an.p.a_r)->capture_default_str();
  c_an->add_option("--b-r", an.p.b_r)->capture_default_str();
  c_an->add_option("--e-rs", an.p.e_rs)->capture_default_str();
  c_an->add_option("--a-s", an.p.a_s)->capture_default_str();
  c_an->add_option("--b-s", an.p.b_s)->capture_default_str();
  c_an->add_option("--e-sr", an.p.e_sr)->capture_default_str();
  c_an->add_option("--guess", an.guess, "Newton starting point R,S")->delimiter(',');
  c_an->add_option("--jacobian", an.jacobian, "Classify the matrix A,B,C,D directly")->delimiter(',');
  c_an->add_option("--t-end", an.t_end, "Length of the phase-plane trajectories")->capture_default_str();

  CompeteArgs cp;
  auto* c_cp = app.add_subcommand("compete", "Two species competing for one resource");
  add_common(c_cp, cp.common);
  c_cp->add_option("--a1", cp.p.a1)->capture_default_str();
  c_cp->add_option("--a2", cp.p.a2)->capture_default_str();
  c_cp->add_option("--d1", cp.p.d1)->capture_default_str();
  c_cp->add_option("--d2", cp.p.d2)->capture_default_str();
  c_cp->add_option("--b", cp.p.b)->capture_default_str();
  c_cp->add_option("--c", cp.p.c)->capture_default_str();
  c_cp->add_option("--phi1", cp.phi1, "Initial population of species 1")->capture_default_str();
  c_cp->add_option("--phi2", cp.phi2, "Initial population of species 2")->capture_default_str();
  c_cp->add_option("--t-end", cp.t_end, "Horizon (default 50/min(a1, a2))");
  c_cp->add_option("--rel-tol", cp.rel_tol)->capture_default_str();

  PdeArgs pde;
  auto* c_pde = app.add_subcommand("pde", "Upwind evolution of the forced advection equation");
  add_common(c_pde, pde.common);
  pde.common.axes = "log-log";
  c_pde->get_option("--axes")->default_str("log-log");
  c_pde->add_option("--phi0", pde.setup.phi0, "Flat initial level")->capture_default_str();
  c_pde->add_option("--c", pde.setup.c, "Characteristic constant")->capture_default_str();
  c_pde->add_option("--x-min", pde.setup.x_min)->capture_default_str();
  c_pde->add_option("--x-max", pde.setup.x_max)->capture_default_str();
  c_pde->add_option("--cells", pde.setup.n_cells)->capture_default_str();
  c_pde->add_option("--cfl", pde.setup.cfl)->capture_default_str();
  c_pde->add_option("--forcing", pde.forcing)->check(CLI::IsMember({"newtonian", "none"}))->capture_default_str();
  c_pde->add_option("--probe-x", pde.probes, "Probe position(s), comma separated")->capture_default_str()->delimiter(',');
  c_pde->add_option("--t-end", pde.t_end, "End time, or 'long' for 100*x_max^1.5")->capture_default_str();
  c_pde->add_option("--samples", pde.samples, "Log-spaced probe samples")->capture_default_str();

  ClassifyArgs cl;
  auto* c_cl = app.add_subcommand("classify-early", "Exponential or power-law early growth");
  add_common(c_cl, cl.common);
  add_input(c_cl, cl.input);
  c_cl->add_option("--window", cl.window, "Leading fraction of the time span")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_fit->parsed()) return run_fit(fit);
    if (c_an->parsed()) return run_analyze(an);
    if (c_cp->parsed()) return run_compete(cp);
    if (c_pde->parsed()) return run_pde(pde);
    if (c_cl->parsed()) return run_classify(cl);
  } catch (const gk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
