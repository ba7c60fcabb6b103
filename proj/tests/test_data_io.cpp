#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "growthkit/data_io.hpp"
#include "growthkit/growth_models.hpp"

using namespace growthkit;

namespace {
TimeSeries parse(const std::string& text, CsvSchema schema = {}) {
  std::istringstream in(text);
  return read_csv(in, schema);
}
}  // namespace

TEST_CASE("csv parsing", "[io][csv]") {
  SECTION("minimal") {
    const auto s = parse("1914,100\n1915,120\n");
    REQUIRE(s.size() == 2);
    CHECK(s.times == std::vector<double>{1914, 1915});
    CHECK(s.values == std::vector<double>{100, 120});
    CHECK(s.kind == SeriesKind::annual);
  }

  SECTION("header is detected and names the series") {
    const auto s = parse("year,revenue\n1914,100\n1915,120\n");
    CHECK(s.size() == 2);
    CHECK(s.label == "revenue");
  }

  SECTION("comments, blank lines, whitespace and gaps") {
    const auto s = parse("# annual data\n\n 1914 , 100 \n1917,130\r\n");
    CHECK(s.times == std::vector<double>{1914, 1917});
    CHECK(s.values == std::vector<double>{100, 130});
  }

  SECTION("column mapping and delimiter") {
    CsvSchema schema;
    schema.time_column = 2;
    schema.value_column = 0;
    schema.delimiter = ';';
    schema.header = HeaderMode::absent;
    const auto s = parse("5;x;1\n6;y;2\n", schema);
    CHECK(s.times == std::vector<double>{1, 2});
    CHECK(s.values == std::vector<double>{5, 6});
  }

  SECTION("errors carry line numbers") {
    try {
      parse("1915,120\n1914,100\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("non-monotone") != std::string::npos);
    }
    try {
      parse("t,v\n1,2\n2,abc\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse("1,2\n1,3\n"), ParseError);
    CHECK_THROWS_AS(parse("1\n"), ParseError);
    CHECK_THROWS_AS(parse("# nothing\n"), ParseError);
    CHECK_THROWS_AS(read_csv_file("/nonexistent/series.csv"), IoError);
  }
}

TEST_CASE("cumulation", "[io][cumulate]") {
  TimeSeries s{{1, 2, 3}, {10, 20, 30}, "r", "", SeriesKind::annual};
  const auto c = cumulate(s);
  CHECK(c.values == std::vector<double>{10, 30, 60});
  CHECK(c.kind == SeriesKind::cumulative);

  CHECK(cumulate(TimeSeries{{1}, {5}, "", "", SeriesKind::annual}).values == std::vector<double>{5});
  CHECK(cumulate(TimeSeries{{1, 2, 3}, {0, 0, 0}, "", "", SeriesKind::annual}).values ==
        std::vector<double>{0, 0, 0});

  SECTION("prefix sums of non-negative data are monotone") {
    TimeSeries r{{}, {}, "", "", SeriesKind::annual};
    for (int i = 0; i < 50; ++i) {
      r.times.push_back(1900 + i);
      r.values.push_back(std::fmod(i * 7.3, 5.0));
    }
    const auto cr = cumulate(r);
    for (std::size_t i = 1; i < cr.size(); ++i) CHECK(cr.values[i] >= cr.values[i - 1]);
  }

  CHECK_THROWS_AS(cumulate(c), DomainError);
  const auto tail = slice_from(s, 2);
  CHECK(tail.times == std::vector<double>{2, 3});
  CHECK_THROWS_AS(slice_from(s, 10), DomainError);
}

TEST_CASE("plot output", "[io][plot]") {
  SECTION("log-log columns of the saturating curve") {
    PlotSeries curve{"phi", {}, {}};
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
      curve.x.push_back(t);
      curve.y.push_back(eval_saturating_linear({1.0, 1.0}, t));
    }
    std::ostringstream out;
    emit_plot_series(std::span(&curve, 1), Axes::log_log, out, PlotFormat::csv);
    std::istringstream lines(out.str());
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header == "log10(t),log10(phi)");
    CHECK(first.substr(0, 3) == "-2,");
    CHECK(std::stod(first.substr(3)) == Catch::Approx(std::log10(curve.y[0])));
  }

  SECTION("zero on a log axis names series and index") {
    PlotSeries s{"revenue", {1, 2, 3}, {1, 0, 2}};
    std::ostringstream out;
    try {
      emit_plot_series(std::span(&s, 1), Axes::log_y, out, PlotFormat::csv);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("revenue") != std::string::npos);
      CHECK(msg.find("index 1") != std::string::npos);
    }
    CHECK(out.str().empty());
  }

  SECTION("two series on one grid share a block with three columns") {
    const PlotSeries two[] = {{"a", {1, 2}, {3, 4}}, {"b", {1, 2}, {5, 6}}};
    std::ostringstream out;
    emit_plot_series(two, Axes::linear, out, PlotFormat::csv);
    CHECK(out.str() == "t,a,b\n1,3,5\n2,4,6\n");
  }

  SECTION("different grids make separate blocks") {
    const PlotSeries two[] = {{"a", {1, 2}, {3, 4}}, {"b", {1, 3}, {5, 6}}};
    std::ostringstream out;
    emit_plot_series(two, Axes::linear, out, PlotFormat::csv);
    CHECK(out.str() == "t,a\n1,3\n2,4\n\nt,b\n1,5\n3,6\n");
  }

  SECTION("json round trip") {
    const PlotSeries one[] = {{"a", {1, 10}, {0.1, 100}}};
    std::ostringstream out;
    emit_plot_series(one, Axes::log_log, out, PlotFormat::json);
    const auto doc = nlohmann::json::parse(out.str());
    CHECK(doc["axes"] == "log-log");
    CHECK(doc["series"][0]["label"] == "a");
    CHECK(doc["series"][0]["x"][1].get<double>() == 1.0);
    CHECK(doc["series"][0]["y"][0].get<double>() == Catch::Approx(-1.0));
  }

  CHECK(parse_axes("log-x") == Axes::log_x);
  CHECK_THROWS_AS(parse_axes("semilog"), DomainError);
}

TEST_CASE("number formatting round-trips", "[io]") {
  for (double v : {0.1, 1.0 / 3.0, 2.2360679774997898, 1e-300, -5.5, 1e21})
    CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("data-io properties", "[io][property]") {
  SECTION("emit then read reproduces the series exactly") {
    TimeSeries s{{}, {}, "value", "", SeriesKind::annual};
    for (int i = 0; i < 30; ++i) {
      s.times.push_back(1914.0 + i);
      s.values.push_back(std::exp(0.173 * i) / 3.0);
    }
    const PlotSeries ps = to_plot_series(s);
    std::stringstream buf;
    emit_plot_series(std::span(&ps, 1), Axes::linear, buf, PlotFormat::csv);
    const auto back = read_csv(buf);
    CHECK(back.times == s.times);
    CHECK(back.values == s.values);
    CHECK(back.label == "value");
  }

  SECTION("cumulate is linear") {
    TimeSeries s1{{}, {}, "", "", SeriesKind::annual}, s2 = s1, sum = s1;
    for (int i = 0; i < 25; ++i) {
      s1.times.push_back(i);
      s2.times.push_back(i);
      sum.times.push_back(i);
      s1.values.push_back(i * 0.5);
      s2.values.push_back(std::sqrt(i + 1.0));
      sum.values.push_back(s1.values.back() + s2.values.back());
    }
    const auto c1 = cumulate(s1), c2 = cumulate(s2), cs = cumulate(sum);
    for (std::size_t i = 0; i < cs.size(); ++i) CHECK(cs.values[i] == Catch::Approx(c1.values[i] + c2.values[i]));
  }
}
