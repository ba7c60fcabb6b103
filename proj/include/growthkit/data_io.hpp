#pragma once

// Time-series ingestion (CSV), the cumulative transform, and plot-ready output
// in CSV or JSON. Plot coordinates on log axes are base-10 logarithms.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "growthkit/error.hpp"

namespace growthkit {

enum class SeriesKind { generic, annual, cumulative };

inline std::string_view to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::generic: return "generic";
    case SeriesKind::annual: return "annual";
    case SeriesKind::cumulative: return "cumulative";
  }
  return "generic";
}

struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::string label;
  std::string units;
  SeriesKind kind = SeriesKind::generic;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// Throws DomainError unless the series has matching lengths, strictly
/// increasing times and finite values.
inline void validate(const TimeSeries& s) {
  if (s.times.size() != s.values.size()) throw DomainError("time series: times and values differ in length");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s.times[i]) || !std::isfinite(s.values[i]))
      throw DomainError("time series '" + s.label + "': non-finite entry at index " + std::to_string(i));
    if (i > 0 && !(s.times[i] > s.times[i - 1]))
      throw DomainError("time series '" + s.label + "': times must be strictly increasing (index " +
                        std::to_string(i) + ")");
  }
}

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("format_double: conversion failed");
  return {buf, end};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\xEF' ||
                        s.front() == '\xBB' || s.front() == '\xBF'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

enum class HeaderMode { autodetect, present, absent };

/// Column mapping for read_csv.
struct CsvSchema {
  std::size_t time_column = 0;
  std::size_t value_column = 1;
  HeaderMode header = HeaderMode::autodetect;
  char delimiter = ',';
  SeriesKind kind = SeriesKind::annual;
  std::string label;  // defaults to the value column's header name, if any
  std::string units;
};

/// Parses `time,value` rows. Blank lines and lines starting with '#' are
/// skipped. In autodetect mode the first data line is a header when its time
/// field is not numeric. Missing years are allowed; only strict monotonicity
/// is enforced.
inline TimeSeries read_csv(std::istream& in, const CsvSchema& schema = {}) {
  TimeSeries s;
  s.kind = schema.kind;
  s.label = schema.label;
  s.units = schema.units;
  const std::size_t need = std::max(schema.time_column, schema.value_column) + 1;

  std::string line;
  std::size_t line_no = 0;
  bool seen_first = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = detail::split_fields(body, schema.delimiter);

    if (!seen_first) {
      seen_first = true;
      bool is_header = schema.header == HeaderMode::present;
      if (schema.header == HeaderMode::autodetect)
        is_header = fields.size() > schema.time_column && !detail::parse_number(fields[schema.time_column]);
      if (is_header) {
        if (s.label.empty() && fields.size() > schema.value_column) s.label = std::string(fields[schema.value_column]);
        continue;
      }
    }

    if (fields.size() < need)
      throw ParseError("line " + std::to_string(line_no) + ": expected at least " + std::to_string(need) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no);
    const auto t = detail::parse_number(fields[schema.time_column]);
    const auto v = detail::parse_number(fields[schema.value_column]);
    if (!t || !v || !std::isfinite(*t) || !std::isfinite(*v))
      throw ParseError("line " + std::to_string(line_no) + ": could not parse numeric time/value from '" +
                           std::string(body) + "'",
                       line_no);
    if (!s.times.empty()) {
      if (*t == s.times.back())
        throw ParseError("line " + std::to_string(line_no) + ": duplicate time " + format_double(*t), line_no);
      if (*t < s.times.back())
        throw ParseError("line " + std::to_string(line_no) + ": non-monotone time " + format_double(*t) +
                             " after " + format_double(s.times.back()),
                         line_no);
    }
    s.times.push_back(*t);
    s.values.push_back(*v);
  }
  if (in.bad()) throw IoError("read_csv: stream read failure");
  if (s.empty()) throw ParseError("read_csv: no data rows", line_no);
  return s;
}

inline TimeSeries read_csv_file(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(in, schema);
}

/// Samples at or after `start` (the accumulation start for cumulative indices).
inline TimeSeries slice_from(const TimeSeries& s, double start) {
  TimeSeries out = s;
  out.times.clear();
  out.values.clear();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.times[i] >= start) {
      out.times.push_back(s.times[i]);
      out.values.push_back(s.values[i]);
    }
  }
  if (out.empty()) throw DomainError("slice_from: no samples at or after " + format_double(start));
  return out;
}

/// Running prefix sums of an annual series. Gaps in the time grid are not
/// interpolated; observations are summed as given.
inline TimeSeries cumulate(const TimeSeries& s) {
  if (s.kind != SeriesKind::annual)
    throw DomainError("cumulate: expected an annual series, got " + std::string(to_string(s.kind)));
  validate(s);
  TimeSeries out = s;
  out.kind = SeriesKind::cumulative;
  double running = 0.0;
  for (double& v : out.values) {
    running += v;
    v = running;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plot output

enum class Axes { linear, log_x, log_y, log_log };

inline std::string_view to_string(Axes a) {
  switch (a) {
    case Axes::linear: return "linear";
    case Axes::log_x: return "log-x";
    case Axes::log_y: return "log-y";
    case Axes::log_log: return "log-log";
  }
  return "linear";
}

inline Axes parse_axes(std::string_view s) {
  if (s == "linear") return Axes::linear;
  if (s == "log-x") return Axes::log_x;
  if (s == "log-y") return Axes::log_y;
  if (s == "log-log") return Axes::log_log;
  throw DomainError("unknown axes mode '" + std::string(s) + "' (expected linear, log-x, log-y or log-log)");
}

inline bool log_x(Axes a) { return a == Axes::log_x || a == Axes::log_log; }
inline bool log_y(Axes a) { return a == Axes::log_y || a == Axes::log_log; }

enum class PlotFormat { csv, json };

/// One curve to plot: either observed data or a model evaluated on a grid.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

inline PlotSeries to_plot_series(const TimeSeries& s) { return {s.label, s.times, s.values}; }

/// Throws DomainError naming the series and index of the first value that
/// cannot be drawn on the requested axes.
inline void check_plottable(const PlotSeries& s, Axes axes) {
  if (s.x.size() != s.y.size()) throw DomainError("series '" + s.label + "': x and y differ in length");
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
      throw DomainError("series '" + s.label + "' index " + std::to_string(i) + ": non-finite coordinate");
    if (log_x(axes) && !(s.x[i] > 0.0))
      throw DomainError("series '" + s.label + "' index " + std::to_string(i) + ": non-positive x=" +
                        format_double(s.x[i]) + " on a log axis");
    if (log_y(axes) && !(s.y[i] > 0.0))
      throw DomainError("series '" + s.label + "' index " + std::to_string(i) + ": non-positive value " +
                        format_double(s.y[i]) + " on a log axis");
  }
}

namespace detail {

inline std::vector<double> transform(const std::vector<double>& v, bool use_log) {
  if (!use_log) return v;
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return std::log10(x); });
  return out;
}

inline std::string column_name(const std::string& base, bool use_log) {
  return use_log ? "log10(" + base + ")" : base;
}

}  // namespace detail

/// Writes the series in plot coordinates. CSV output groups series sharing an
/// identical abscissa into one block with a single x column; distinct groups
/// are separated by a blank line. JSON output is
///   {"axes": ..., "series": [{"label", "axes", "x", "y"}, ...]}.
inline void emit_plot_series(std::span<const PlotSeries> series, Axes axes, std::ostream& out, PlotFormat format,
                             const std::string& x_label = "t") {
  for (const auto& s : series) check_plottable(s, axes);
  const bool lx = log_x(axes), ly = log_y(axes);

  if (format == PlotFormat::json) {
    nlohmann::ordered_json doc;
    doc["axes"] = std::string(to_string(axes));
    doc["series"] = nlohmann::ordered_json::array();
    for (const auto& s : series) {
      nlohmann::ordered_json js;
      js["label"] = s.label;
      js["axes"] = std::string(to_string(axes));
      js["x"] = detail::transform(s.x, lx);
      js["y"] = detail::transform(s.y, ly);
      doc["series"].push_back(std::move(js));
    }
    out << doc.dump(2) << '\n';
    return;
  }

  std::vector<bool> done(series.size(), false);
  bool first_block = true;
  for (std::size_t g = 0; g < series.size(); ++g) {
    if (done[g]) continue;
    std::vector<std::size_t> members;
    for (std::size_t j = g; j < series.size(); ++j) {
      if (!done[j] && series[j].x == series[g].x) {
        members.push_back(j);
        done[j] = true;
      }
    }
    if (!first_block) out << '\n';
    first_block = false;
    out << detail::column_name(x_label, lx);
    for (auto j : members) out << ',' << detail::column_name(series[j].label, ly);
    out << '\n';
    const auto xs = detail::transform(series[g].x, lx);
    std::vector<std::vector<double>> ys;
    for (auto j : members) ys.push_back(detail::transform(series[j].y, ly));
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out << format_double(xs[i]);
      for (const auto& col : ys) out << ',' << format_double(col[i]);
      out << '\n';
    }
  }
  if (!out) throw IoError("emit_plot_series: write failure");
}

inline void emit_plot_series_file(std::span<const PlotSeries> series, Axes axes, const std::string& path,
                                  PlotFormat format, const std::string& x_label = "t") {
  std::ostringstream buf;
  emit_plot_series(series, axes, buf, format, x_label);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << buf.str();
  if (!f) throw IoError("write failure on '" + path + "'");
}

}  // namespace growthkit
