#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "carnot/builtins.hpp"
#include "carnot/distance.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

namespace {

GroupPoint origin(const StructureConstants& sc) { return GroupPoint::zero(sc.m(), sc.d2()); }

}  // namespace

TEST_CASE("distance of a point to itself is zero") {
  const StructureConstants sc = heisenberg();
  Rng rng(1);
  const GroupPoint p(rng.normal_vector(2), rng.normal_vector(1));
  const DistanceEstimate est = distance(sc, p, p);
  CHECK(est.value() == 0.0);
}

TEST_CASE("pure first-layer targets are straight lines") {
  for (const StructureConstants& sc : {heisenberg(), gk_member(2)}) {
    Rng rng(2);
    for (int trial = 0; trial < 3; ++trial) {
      GroupPoint q = origin(sc);
      q.xi = rng.normal_vector(sc.m());
      const DistanceEstimate est = distance(sc, origin(sc), q, DistanceMethod::Both);
      REQUIRE(est.shooting_value.has_value());
      REQUIRE(est.control_value.has_value());
      CHECK(*est.shooting_value == Catch::Approx(q.xi.norm()).margin(1e-6));
      CHECK(*est.control_value == Catch::Approx(q.xi.norm()).margin(1e-6));
    }
  }
}

TEST_CASE("Heisenberg center point distance hits the circle value") {
  // Reaching (0, 0, z) costs a full circle of enclosed area z: 2 sqrt(pi z).
  const StructureConstants sc = heisenberg();
  GroupPoint q = origin(sc);
  q.u[0] = 1.0;
  const DistanceEstimate est = distance(sc, origin(sc), q, DistanceMethod::Both);
  const double exact = 2.0 * std::sqrt(M_PI);
  REQUIRE(est.shooting_value.has_value());
  REQUIRE(est.control_value.has_value());
  CHECK(*est.shooting_value == Catch::Approx(exact).epsilon(5e-3));
  CHECK(*est.control_value == Catch::Approx(exact).epsilon(1e-2));
  CHECK(est.relative_gap() < 0.01);
}

TEST_CASE("solvers cross-validate on generic targets") {
  for (const StructureConstants& sc : {heisenberg(), gk_member(2)}) {
    Rng rng(7);
    for (int trial = 0; trial < 3; ++trial) {
      const GroupPoint q(rng.uniform_vector(sc.m(), -1.0, 1.0),
                         rng.uniform_vector(sc.d2(), -0.5, 0.5));
      DistanceOptions opt;
      opt.shooting.seed = 40 + static_cast<std::uint64_t>(trial);
      const DistanceEstimate est = distance(sc, origin(sc), q, DistanceMethod::Both, opt);
      REQUIRE(est.shooting_value.has_value());
      REQUIRE(est.control_value.has_value());
      CHECK(est.relative_gap() < 0.01);
      // Control is an upper bound; shooting cannot undercut it materially.
      CHECK(*est.shooting_value >= *est.control_value - 0.01 * (1.0 + *est.control_value));
    }
  }
}

TEST_CASE("distance respects dilations and left translation") {
  const StructureConstants sc = heisenberg();
  Rng rng(21);
  const GroupPoint p(rng.normal_vector(2), rng.normal_vector(1));
  const GroupPoint q(rng.normal_vector(2), rng.normal_vector(1));
  const double base = distance(sc, p, q, DistanceMethod::Shooting).value();

  for (double lam : {0.5, 2.0}) {
    const double scaled =
        distance(sc, dilation(sc, lam, p), dilation(sc, lam, q), DistanceMethod::Shooting).value();
    CHECK(std::abs(scaled - lam * base) <= 2e-3 * lam * base);
  }
  const GroupPoint shift(rng.normal_vector(2), rng.normal_vector(1));
  const double moved =
      distance(sc, group_mul(sc, shift, p), group_mul(sc, shift, q), DistanceMethod::Shooting)
          .value();
  CHECK(std::abs(moved - base) <= 2e-3 * base);
}

TEST_CASE("triangle inequality within solver noise") {
  const StructureConstants sc = gk_member(2);
  Rng rng(33);
  for (int trial = 0; trial < 2; ++trial) {
    const GroupPoint a(0.5 * rng.normal_vector(4), 0.3 * rng.normal_vector(3));
    const GroupPoint b(0.5 * rng.normal_vector(4), 0.3 * rng.normal_vector(3));
    const GroupPoint c(0.5 * rng.normal_vector(4), 0.3 * rng.normal_vector(3));
    const double ab = distance(sc, a, b, DistanceMethod::Shooting).value();
    const double bc = distance(sc, b, c, DistanceMethod::Shooting).value();
    const double ac = distance(sc, a, c, DistanceMethod::Shooting).value();
    CHECK(ac <= ab + bc + 2e-3 * (ab + bc));
  }
}

TEST_CASE("shooting reports inconclusive when starved") {
  const StructureConstants sc = heisenberg();
  GroupPoint q = origin(sc);
  q.u[0] = 1.0;  // needs vertical momentum, so the straight start cannot converge
  DistanceOptions opt;
  opt.shooting.starts = 1;
  opt.shooting.max_iterations = 2;
  const DistanceEstimate est = distance(sc, origin(sc), q, DistanceMethod::Shooting, opt);
  CHECK(est.inconclusive);
  CHECK(est.best_residual > 0.0);
  CHECK_THROWS_AS(est.value(), NumericalError);
}

TEST_CASE("minimizing filter accepts lines and rejects past-cut arcs") {
  const StructureConstants sc = heisenberg();
  const Covector straight(Eigen::Vector2d(0.7, -0.2), Eigen::VectorXd::Zero(1));
  CHECK(minimizing_check(sc, straight));
  CHECK(minimizing_check(sc, Covector::zero(2, 1)));

  // |u0| = pi: cut time 2pi/|u0| = 2 > 1, still minimizing at time one.
  const Covector before(Eigen::Vector2d(1, 0), Eigen::VectorXd::Constant(1, M_PI));
  CHECK(minimizing_check(sc, before));

  // |u0| = 3pi: the time-one endpoint lies past the cut point.
  const Covector past(Eigen::Vector2d(1, 0), Eigen::VectorXd::Constant(1, 3.0 * M_PI));
  CHECK_FALSE(minimizing_check(sc, past));
}
