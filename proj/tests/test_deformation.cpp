#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "carnot/deformation.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

TEST_CASE("family members carry the declared table") {
  const GroupFamily fam = gk_family();
  const StructureConstants g1 = fam.member(1);
  // [X_1, X_3] = -(1/k) Y_2 at k = 1.
  CHECK(g1.c(1, 3, 1) == -1.0);
  CHECK(g1.c(0, 1, 0) == 1.0);

  const StructureConstants inf = fam.limit();
  CHECK(inf.c(1, 2, 2) == 0.0);
  CHECK(inf.c(1, 3, 1) == 0.0);
  CHECK(inf.c(2, 3, 0) == 0.0);
  CHECK(inf.c(0, 3, 2) == 1.0);
}

TEST_CASE("family shares one stratification and converges at rate 1/k") {
  const GroupFamily fam = gk_family();
  const StructureConstants inf = fam.limit();
  for (long k : {1L, 2L, 8L, 64L}) {
    const StructureConstants sc = fam.member(k);
    CHECK(sc.m() == inf.m());
    CHECK(sc.d2() == inf.d2());
    double max_diff = 0.0;
    for (int l = 0; l < 3; ++l)
      max_diff = std::max(max_diff,
                          (sc.layer_matrix(l) - inf.layer_matrix(l)).cwiseAbs().maxCoeff());
    CHECK(max_diff == Catch::Approx(1.0 / static_cast<double>(k)).epsilon(1e-12));
  }
}

TEST_CASE("bracket convergence is uniformly 1/k on random arguments") {
  const GroupFamily fam = gk_family();
  const StructureConstants inf = fam.limit();
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const GroupPoint a(rng.normal_vector(4), rng.normal_vector(3));
    const GroupPoint b(rng.normal_vector(4), rng.normal_vector(3));
    const double base = bracket(inf, a, b).u.norm();
    double fitted_c = 0.0;
    for (long k : {1L, 4L, 16L, 64L}) {
      const double diff = (bracket(fam.member(k), a, b).u - bracket(inf, a, b).u).norm();
      fitted_c = std::max(fitted_c, diff * static_cast<double>(k));
    }
    // The 1/k envelope is tight: C is bounded by the argument size, not by k.
    CHECK(fitted_c <= 2.0 * (1.0 + a.xi.norm() * b.xi.norm() + base));
    for (long k : {1L, 4L, 16L, 64L}) {
      const double diff = (bracket(fam.member(k), a, b).u - bracket(inf, a, b).u).norm();
      CHECK(diff <= fitted_c / static_cast<double>(k) + 1e-12);
    }
  }
}

TEST_CASE("every finite member passes the Metivier test") {
  const GroupFamily fam = gk_family();
  for (long k : {1L, 2L, 4L, 64L})
    CHECK(metivier_check(fam.member(k), 8, 0).status == MetivierStatus::Metivier);
}

TEST_CASE("distance convergence on first-layer pairs is exact") {
  // Straight-line geodesics never see the deformed brackets.
  const GroupFamily fam = gk_family();
  std::vector<std::pair<GroupPoint, GroupPoint>> pairs;
  GroupPoint p = GroupPoint::zero(4, 3), q = GroupPoint::zero(4, 3);
  q.xi << 0.4, -0.2, 0.3, 0.1;
  pairs.emplace_back(p, q);
  const ConvergenceReport rep = convergence_report(fam, pairs, {1, 8});
  REQUIRE(rep.cells.size() == 2);
  for (const auto& cell : rep.cells) {
    CHECK(cell.solver_ok);
    CHECK(cell.d_k == Catch::Approx(q.xi.norm()).margin(1e-6));
    CHECK(cell.gap < 1e-6);
  }
}

TEST_CASE("distance dominates the first-layer gap") {
  const GroupFamily fam = gk_family();
  Rng rng(17);
  const GroupPoint p(0.3 * rng.normal_vector(4), 0.2 * rng.normal_vector(3));
  const GroupPoint q(0.3 * rng.normal_vector(4), 0.2 * rng.normal_vector(3));
  for (long k : {1L, 16L}) {
    const double d = distance(fam.member(k), p, q).value();
    CHECK(d >= (q.xi - p.xi).cwiseAbs().maxCoeff() - 1e-9);
  }
}

TEST_CASE("convergence report input validation") {
  const GroupFamily fam = gk_family();
  std::vector<std::pair<GroupPoint, GroupPoint>> pairs;
  pairs.emplace_back(GroupPoint::zero(4, 3), GroupPoint::zero(4, 3));
  CHECK_THROWS_AS(convergence_report(fam, pairs, {}), DomainError);
  CHECK_THROWS_AS(convergence_report(fam, pairs, {4, 2}), DomainError);
}

TEST_CASE("semicontinuity experiment reproduces the jump") {
  const SemicontinuityReport rep = semicontinuity_experiment(gk_family(), 300, 11, {1, 2, 8});
  CHECK(rep.pattern_ok);
  CHECK(rep.finite_n0 == 13);
  CHECK(rep.limit_n0 == 17);
  REQUIRE(rep.rows.size() == 4);
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].verdict.status == MetivierStatus::Metivier);
    CHECK(rep.rows[i].n0.best_value == 13);
  }
  CHECK(rep.rows.back().verdict.status == MetivierStatus::NotMetivier);
  CHECK(rep.rows.back().n0.best_value == 17);
  CHECK(rep.text.find("17 = N_0(limit)") != std::string::npos);
  CHECK(rep.text.find("= 13") != std::string::npos);
  CHECK(rep.text.find("not lower semicontinuous") != std::string::npos);

  // The finite-k value agrees with the flat-filtration formula m + 3 d2.
  const StructureConstants g2 = gk_family().member(2);
  CHECK(rep.finite_n0 == g2.m() + 3 * g2.d2());
}
