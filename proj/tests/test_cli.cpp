#include <catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / ("growthkit_cli_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Run run(const std::string& args, const std::string& env = "") {
  const auto err_file = scratch() / "stderr.txt";
  const std::string cmd = env + " '" GROWTHKIT_CLI_PATH "' " + args + " 2>'" + err_file.string() + "'";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_file);
  return r;
}

std::string out_dir(const std::string& name) { return (scratch() / name).string(); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
}

std::string logistic_csv(bool annual) {
  // a = 0.3, b = 0.06, phi0 = 1 sampled yearly; annual = differences.
  std::ostringstream s;
  s.precision(17);
  s << "year,value\n";
  double prev = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double v = 5.0 / (1.0 + 4.0 * std::exp(-0.3 * i));
    s << 1950 + i << ',' << (annual ? (i == 0 ? v : v - prev) : v) << '\n';
    prev = v;
  }
  return s.str();
}

}  // namespace

TEST_CASE("simulate fans out comma lists", "[cli][simulate]") {
  const auto dir = out_dir("sim1");
  const auto r = run("simulate --model saturating --a 1 --b 1,2,3 --axes log-log --out-dir " + dir);
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep["schema"] == 1);
  REQUIRE(rep["curves"].size() == 3);
  CHECK(rep["curves"][0]["terminal_value"].get<double>() == 1.0);
  CHECK(rep["curves"][1]["terminal_value"].get<double>() == 0.5);
  CHECK(rep["curves"][2]["terminal_value"].get<double>() == Catch::Approx(1.0 / 3.0));
  CHECK(json::parse(slurp(fs::path(dir) / "simulate.json")) == rep);

  std::istringstream csv(slurp(fs::path(dir) / "simulate_plot.csv"));
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "log10(t),log10(a=1 b=1),log10(a=1 b=2),log10(a=1 b=3)");
  // Same early behaviour: the first row agrees to well under 0.1%.
  double cols[4];
  CHECK(std::sscanf(first.c_str(), "%lf,%lf,%lf,%lf", &cols[0], &cols[1], &cols[2], &cols[3]) == 4);
  CHECK(std::abs(cols[1] - cols[3]) < 1e-3);
}

TEST_CASE("simulate logistic family ordering", "[cli][simulate]") {
  const auto dir = out_dir("sim2");
  const auto r = run("simulate --model logistic --a 5 --b 1 --alpha 0,1,2 --phi0 1 --t-end 3 --format json --out-dir " +
                     dir);
  REQUIRE(r.code == 0);
  const auto plot = json::parse(slurp(fs::path(dir) / "simulate_plot.json"));
  REQUIRE(plot["series"].size() == 3);
  const auto& y0 = plot["series"][0]["y"];
  const auto& y1 = plot["series"][1]["y"];
  const auto& y2 = plot["series"][2]["y"];
  for (std::size_t i = 1; i < y2.size(); ++i) {
    CHECK(y0[i].get<double>() >= y1[i].get<double>());
    CHECK(y1[i].get<double>() >= y2[i].get<double>());
  }
  const auto rep = json::parse(r.out);
  CHECK(rep["curves"][0]["terminal_value"] == "unbounded");
  CHECK(rep["curves"][2]["terminal_value"].get<double>() == Catch::Approx(std::sqrt(5.0)));
}

TEST_CASE("validation errors exit with code 2", "[cli][errors]") {
  const auto dir = out_dir("bad");
  auto r = run("simulate --model logistic --a 1 --b 2 --phi0 1 --alpha 1 --out-dir " + dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("a > b*phi0^alpha") != std::string::npos);
  CHECK_FALSE(fs::exists(fs::path(dir) / "simulate.json"));
  CHECK(run("simulate --model logistic --alpha 1.5 --out-dir " + dir).code == 2);
  CHECK(run("simulate --model gompertz --out-dir " + dir).code == 2);
  CHECK(run("simulate --model saturating --b x --out-dir " + dir).code == 2);
  CHECK(run("simulate --out-dir " + dir).code == 2);
  CHECK(run("").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("fit subcommand", "[cli][fit]") {
  const auto dir = out_dir("fit");
  const auto csv = scratch() / "logistic.csv";
  write_file(csv, logistic_csv(false));

  SECTION("recovers the generator") {
    const auto r = run("fit --input " + csv.string() + " --model logistic --alpha 1 --out-dir " + dir);
    REQUIRE(r.code == 0);
    const auto rep = json::parse(r.out);
    CHECK(rep["params"]["a"].get<double>() == Catch::Approx(0.3).epsilon(0.05));
    CHECK(rep["params"]["b"].get<double>() == Catch::Approx(0.06).epsilon(0.05));
    CHECK(rep["terminal_forecast"].get<double>() == Catch::Approx(5.0).epsilon(0.05));
    CHECK(rep["converged"] == true);
    CHECK(rep["saturation_onset"]["half_terminal_time"].get<double>() ==
          Catch::Approx(1950.0 + std::log(4.0) / 0.3).epsilon(1e-6));
    CHECK(fs::exists(fs::path(dir) / "fit_plot.csv"));
  }

  SECTION("cumulative flag fits prefix sums") {
    const auto annual = scratch() / "annual.csv";
    write_file(annual, logistic_csv(true));
    const auto r = run("fit --input " + annual.string() + " --cumulative --model logistic --format json --out-dir " + dir);
    REQUIRE(r.code == 0);
    const auto rep = json::parse(r.out);
    CHECK(rep["input"]["cumulative"] == true);
    CHECK(rep["params"]["a"].get<double>() == Catch::Approx(0.3).epsilon(0.05));
    const auto plot = json::parse(slurp(fs::path(dir) / "fit_plot.json"));
    const auto& y = plot["series"][1]["y"];
    for (std::size_t i = 1; i < y.size(); ++i) CHECK(y[i].get<double>() >= y[i - 1].get<double>());
  }

  SECTION("zero value on a log axis names the row") {
    const auto zero = scratch() / "zero.csv";
    write_file(zero, "year,revenue\n1,1\n2,0\n3,4\n4,5\n5,6\n6,7\n7,8\n");
    const auto r = run("fit --input " + zero.string() + " --model logistic --axes log-y --out-dir " + dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("index 1") != std::string::npos);
    CHECK(r.err.find("revenue") != std::string::npos);
  }

  SECTION("io and numerical failures") {
    CHECK(run("fit --input /nonexistent.csv --model logistic --out-dir " + dir).code == 4);
    const auto bad = scratch() / "bad.csv";
    write_file(bad, "1,2\n3,x\n");
    const auto r = run("fit --input " + bad.string() + " --model logistic --out-dir " + dir);
    CHECK(r.code == 4);
    CHECK(r.err.find("line 2") != std::string::npos);
    CHECK(run("fit --input " + csv.string() + " --model logistic --max-iter 1 --starts 1 --out-dir " + dir).code == 3);
  }
}

TEST_CASE("analyze, compete and pde", "[cli][dynamics]") {
  SECTION("analyze demo") {
    const auto r = run("analyze --demo coupled-logistic --out-dir " + out_dir("an"));
    REQUIRE(r.code == 0);
    const auto rep = json::parse(r.out);
    CHECK(rep["classification"] == "stable node");
    CHECK(rep["eigenvalues"][0]["re"].get<double>() == Catch::Approx(-1.0).margin(1e-6));
    CHECK(rep["eigenvalues"][1]["re"].get<double>() == Catch::Approx(-3.0).margin(1e-6));
    CHECK(rep["fixed_point"]["r_c"].get<double>() == Catch::Approx(2.0));
  }

  SECTION("analyze a supplied Jacobian") {
    const auto r = run("analyze --jacobian 2,0,0,-3 --out-dir " + out_dir("an"));
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["classification"] == "saddle");
  }

  SECTION("compete") {
    const auto dir = out_dir("cp");
    const auto r = run("compete --a1 2 --a2 1 --d1 1 --d2 1 --b 1 --c 1 --out-dir " + dir);
    REQUIRE(r.code == 0);
    const auto rep = json::parse(r.out);
    CHECK(rep["verdict"] == "species-1-survives");
    CHECK(rep["limit"].get<double>() == 2.0);
    CHECK(rep["final_state"][0].get<double>() == Catch::Approx(2.0).epsilon(1e-6));
    CHECK(fs::exists(fs::path(dir) / "compete_plot.csv"));
    CHECK(run("compete --a1 -1 --out-dir " + dir).code == 2);
  }

  SECTION("pde probe approaches the asymptote") {
    const auto dir = out_dir("pde");
    const auto r = run("pde --probe-x 50 --phi0 0 --t-end long --out-dir " + dir);
    REQUIRE(r.code == 0);
    const auto rep = json::parse(r.out);
    CHECK(rep["probes"][0]["final_abs_phi"].get<double>() == Catch::Approx(0.2).epsilon(0.02));
    CHECK(rep["probes"][0]["early_loglog_slope"].get<double>() == Catch::Approx(1.0).margin(0.05));
    std::istringstream csv(slurp(fs::path(dir) / "pde_plot.csv"));
    std::string header;
    std::getline(csv, header);
    CHECK(header == "log10(t),log10(|phi| x=50),log10(asymptote x=50)");
    CHECK(fs::exists(fs::path(dir) / "pde_profile.csv"));
    CHECK(run("pde --probe-x 500 --out-dir " + dir).code == 2);
  }
}

TEST_CASE("classify-early", "[cli][classify]") {
  const auto csv = scratch() / "exp.csv";
  std::ostringstream s;
  s.precision(17);
  for (int i = 0; i < 20; ++i) s << i << ',' << std::exp(0.3 * i) << '\n';
  write_file(csv, s.str());
  const auto r = run("classify-early --input " + csv.string() + " --window 1 --out-dir " + out_dir("cl"));
  REQUIRE(r.code == 0);
  const auto rep = json::parse(r.out);
  CHECK(rep["verdict"] == "exponential");
  CHECK(rep["exponential_rate"].get<double>() == Catch::Approx(0.3).margin(1e-6));
}

TEST_CASE("determinism, config files and output directory", "[cli][plumbing]") {
  SECTION("byte-identical reruns") {
    const std::string args = "simulate --model logistic --a 5 --b 1 --alpha 0,1,2,3 --phi0 1 --out-dir ";
    REQUIRE(run(args + out_dir("d1")).code == 0);
    REQUIRE(run(args + out_dir("d2")).code == 0);
    CHECK(slurp(fs::path(out_dir("d1")) / "simulate_plot.csv") == slurp(fs::path(out_dir("d2")) / "simulate_plot.csv"));
    const auto rep1 = slurp(fs::path(out_dir("d1")) / "simulate.json");
    auto rep2 = slurp(fs::path(out_dir("d2")) / "simulate.json");
    // Only the echoed plot path differs.
    const auto p = rep2.find("d2");
    REQUIRE(p != std::string::npos);
    rep2.replace(p, 2, "d1");
    CHECK(rep1 == rep2);
  }

  SECTION("config file supplies values and flags override it") {
    const auto cfg = scratch() / "run.ini";
    write_file(cfg, "# baseline set\nmodel = logistic\na = 5\nb = 1\nalpha = 0,1,2\nphi0 = 1\n");
    auto r = run("simulate --config " + cfg.string() + " --out-dir " + out_dir("cfg"));
    REQUIRE(r.code == 0);
    auto rep = json::parse(r.out);
    REQUIRE(rep["curves"].size() == 3);
    CHECK(rep["curves"][1]["label"] == "a=5 b=1 alpha=1 phi0=1");

    r = run("simulate --config " + cfg.string() + " --alpha 2 --out-dir " + out_dir("cfg"));
    REQUIRE(r.code == 0);
    rep = json::parse(r.out);
    REQUIRE(rep["curves"].size() == 1);
    CHECK(rep["curves"][0]["params"]["alpha"] == 2);

    const auto bad = scratch() / "bad.ini";
    write_file(bad, "bogus = 1\n");
    CHECK(run("simulate --model saturating --config " + bad.string() + " --out-dir " + out_dir("cfg")).code == 2);
    CHECK(run("simulate --model saturating --config /nonexistent.ini").code == 2);
  }

  SECTION("output directory from the environment") {
    const auto dir = out_dir("envdir");
    const auto r = run("compete --a1 1 --a2 3 --d1 2 --d2 1 --b 1 --c 2", "GROWTHKIT_OUT_DIR='" + dir + "'");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["verdict"] == "species-2-survives");
    CHECK(json::parse(r.out)["limit"].get<double>() == 1.5);
    CHECK(fs::exists(fs::path(dir) / "compete.json"));
  }
}
