#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "growthkit/dynsys.hpp"
#include "oracles.hpp"

using namespace growthkit;
using Catch::Approx;

namespace {

struct LogisticPair {
  std::size_t dimension() const { return 2; }
  void operator()(std::span<const double> y, std::span<double> dy) const {
    dy[0] = y[0] * (1.0 - y[0]);
    dy[1] = y[1] * (1.0 - y[1]);
  }
};

const CompetitionParams kTwoOne{.a1 = 2.0, .a2 = 1.0};

}  // namespace

TEST_CASE("fixed points", "[dynsys][newton]") {
  SECTION("logistic pair") {
    auto fp = find_fixed_point(LogisticPair{}, {0.9, 0.9});
    CHECK(std::abs(fp.r_c() - 1.0) < 1e-10);
    CHECK(std::abs(fp.s_c() - 1.0) < 1e-10);
    CHECK(fp.residual_norm <= 1e-12);
  }

  SECTION("competition boundary equilibrium") {
    auto fp = find_fixed_point(CompetitionSystem{kTwoOne}, {1.9, 0.05});
    CHECK(fp.point[0] == Approx(2.0).margin(1e-10));
    CHECK(fp.point[1] == Approx(0.0).margin(1e-10));
    // Substitution into the stationary equations.
    double dy[2];
    const double y[] = {2.0, 0.0};
    CompetitionSystem{kTwoOne}(y, dy);
    CHECK(dy[0] == 0.0);
    CHECK(dy[1] == 0.0);
  }

  SECTION("constant field has no fixed point") {
    AutonomousSystem drift(2, [](std::span<const double>, std::span<double> dy) {
      dy[0] = 1.0;
      dy[1] = 0.0;
    });
    try {
      find_fixed_point(drift, {0.3, 0.4});
      FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
      CHECK(e.best_iterate().size() == 2);
      CHECK(e.best_residual() == Approx(1.0));
    }
  }

  SECTION("wrong dimension") {
    AutonomousSystem one(1, [](std::span<const double>, std::span<double> dy) { dy[0] = 0.0; });
    CHECK_THROWS_AS(find_fixed_point(one, {0.0, 0.0}), DomainError);
  }
}

TEST_CASE("linearization", "[dynsys][jacobian]") {
  SECTION("linear system is its own Jacobian") {
    AutonomousSystem lin(2, [](std::span<const double> y, std::span<double> dy) {
      dy[0] = 1.7 * y[0];
      dy[1] = -0.4 * y[1];
    });
    const auto J = linearize(lin, std::array<double, 2>{0.0, 0.0});
    CHECK(J.A == Approx(1.7).margin(1e-8));
    CHECK(J.B == Approx(0.0).margin(1e-8));
    CHECK(J.C == Approx(0.0).margin(1e-8));
    CHECK(J.D == Approx(-0.4).margin(1e-8));
  }

  SECTION("logistic pair at (1, 1)") {
    const auto J = linearize(LogisticPair{}, std::array<double, 2>{1.0, 1.0});
    CHECK(J.A == Approx(-1.0).margin(1e-6));
    CHECK(J.B == Approx(0.0).margin(1e-6));
    CHECK(J.C == Approx(0.0).margin(1e-6));
    CHECK(J.D == Approx(-1.0).margin(1e-6));
  }

  SECTION("competition at (2, 0)") {
    const auto J = linearize(CompetitionSystem{kTwoOne}, std::array<double, 2>{2.0, 0.0});
    CHECK(J.A == Approx(-2.0).margin(1e-6));
    CHECK(J.B == Approx(-2.0).margin(1e-6));
    CHECK(J.C == Approx(0.0).margin(1e-6));
    CHECK(J.D == Approx(-1.0).margin(1e-6));
    CHECK(classify(J).classification == Classification::stable_node);
  }
}

TEST_CASE("classification", "[dynsys][classify]") {
  struct Row {
    Jacobian2 J;
    Classification want;
  };
  const Row rows[] = {
      {{-2, 1, 1, -2}, Classification::stable_node},
      {{1, 0, 0, 1}, Classification::unstable_node},
      {{2, 0, 0, -3}, Classification::saddle},
      {{-1, 2, -2, -1}, Classification::stable_focus},
      {{0.5, -3, 3, 0.5}, Classification::unstable_focus},
      {{0, 1, -1, 0}, Classification::center},
      {{1, 2, 2, 4}, Classification::degenerate},
      {{-1, 1, 0, -1}, Classification::degenerate},
  };
  for (const auto& row : rows) {
    const auto rep = classify(row.J);
    INFO(to_string(row.want));
    CHECK(rep.classification == row.want);
    const auto sum = rep.eigenvalues.lambda1 + rep.eigenvalues.lambda2;
    const auto prod = rep.eigenvalues.lambda1 * rep.eigenvalues.lambda2;
    CHECK(std::abs(sum - row.J.trace()) < 1e-9);
    CHECK(std::abs(prod - row.J.determinant()) < 1e-9);
  }

  SECTION("specific eigenvalues") {
    auto rot = classify({0, 1, -1, 0});
    CHECK(std::abs(rot.eigenvalues.lambda1 - std::complex<double>(0, 1)) < 1e-15);
    CHECK(std::abs(rot.eigenvalues.lambda2 - std::complex<double>(0, -1)) < 1e-15);
    auto sad = classify({2, 0, 0, -3});
    CHECK(sad.eigenvalues.lambda1.real() == Approx(2.0));
    CHECK(sad.eigenvalues.lambda2.real() == Approx(-3.0));
    auto id = classify({1, 0, 0, 1});
    CHECK(id.eigenvalues.lambda1.real() == 1.0);
    CHECK(id.eigenvalues.lambda2.real() == 1.0);
  }

  SECTION("random matrices respect trace and determinant") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 500; ++i) {
      const Jacobian2 J{u(rng), u(rng), u(rng), u(rng)};
      const auto rep = classify(J);
      CHECK(std::abs(rep.eigenvalues.lambda1 + rep.eigenvalues.lambda2 - J.trace()) < 1e-9);
      CHECK(std::abs(rep.eigenvalues.lambda1 * rep.eigenvalues.lambda2 - J.determinant()) < 1e-9);
      if (J.determinant() < -1e-9) CHECK(rep.classification == Classification::saddle);
    }
  }

  CHECK_THROWS_AS(classify({NAN, 0, 0, 1}), DomainError);
}

TEST_CASE("coupled logistic demo equilibrium", "[dynsys][demo]") {
  const auto rep = analyze_equilibrium(CoupledLogisticSystem{}, {1.5, 1.5});
  REQUIRE(rep.fixed_point);
  CHECK(rep.fixed_point->r_c() == Approx(2.0).margin(1e-10));
  CHECK(rep.fixed_point->s_c() == Approx(2.0).margin(1e-10));
  CHECK(rep.jacobian.A == Approx(-2.0).margin(1e-6));
  CHECK(rep.jacobian.B == Approx(1.0).margin(1e-6));
  CHECK(rep.jacobian.C == Approx(1.0).margin(1e-6));
  CHECK(rep.jacobian.D == Approx(-2.0).margin(1e-6));
  CHECK(rep.eigenvalues.lambda1.real() == Approx(-1.0).margin(1e-6));
  CHECK(rep.eigenvalues.lambda2.real() == Approx(-3.0).margin(1e-6));
  CHECK(rep.classification == Classification::stable_node);
}

TEST_CASE("competitive exclusion", "[dynsys][competition]") {
  SECTION("species 1 wins") {
    const auto v = exclusion_verdict(kTwoOne);
    CHECK(v.survivor == Survivor::species1);
    CHECK(*v.limit == 2.0);
    CHECK(to_string(v.survivor) == "species-1-survives");
    const double start[] = {0.1, 0.1};
    auto traj = integrate_adaptive(CompetitionSystem{kTwoOne}, start, 0.0, 200.0);
    CHECK(traj.back()[0] == Approx(2.0).epsilon(1e-6));
  }

  SECTION("symmetric is marginal") {
    const auto v = exclusion_verdict({});
    CHECK(v.survivor == Survivor::marginal);
    CHECK_FALSE(v.limit);
    CHECK_FALSE(v.equilibrium());
  }

  SECTION("species 2 wins") {
    const CompetitionParams p{.a1 = 1, .a2 = 3, .d1 = 2, .d2 = 1, .b = 1, .c = 2};
    const auto v = exclusion_verdict(p);
    CHECK(v.survivor == Survivor::species2);
    CHECK(*v.limit == 1.5);
    const double start[] = {0.2, 0.2};
    auto traj = integrate_fixed(CompetitionSystem{p}, start, 0.0, 200.0, 0.01);
    CHECK(traj.back()[1] == Approx(1.5).epsilon(1e-8));
    CHECK(traj.back()[0] < 1e-12);
  }

  SECTION("verdict is invariant under common rescaling of d") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int i = 0; i < 200; ++i) {
      CompetitionParams p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
      const double k = u(rng);
      CompetitionParams q = p;
      q.d1 *= k;
      q.d2 *= k;
      CHECK(exclusion_verdict(p).survivor == exclusion_verdict(q).survivor);
    }
  }

  CHECK_THROWS_AS(exclusion_verdict({.a1 = -1.0}), ParameterError);
}
