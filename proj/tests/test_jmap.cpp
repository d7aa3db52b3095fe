#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "carnot/builtins.hpp"
#include "carnot/jmap.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

namespace {

/// Independent route to J_u: fill entry (j, i) from <J_u X_i, X_j> =
/// <u, [X_i, X_j]> over all basis pairs.
Eigen::MatrixXd j_oracle(const StructureConstants& sc, const Eigen::VectorXd& u) {
  Eigen::MatrixXd J(sc.m(), sc.m());
  for (int i = 0; i < sc.m(); ++i)
    for (int j = 0; j < sc.m(); ++j)
      J(j, i) = u.dot(
          sc.bracket_xi(Eigen::VectorXd::Unit(sc.m(), i), Eigen::VectorXd::Unit(sc.m(), j)));
  return J;
}

/// The displayed 4x4 matrix of the deformation family.
Eigen::MatrixXd gk_display(double inv_k, const Eigen::Vector3d& u) {
  Eigen::MatrixXd J(4, 4);
  J << 0, -u[0], -u[1], -u[2],
      u[0], 0, -inv_k * u[2], inv_k * u[1],
      u[1], inv_k * u[2], 0, -inv_k * u[0],
      u[2], -inv_k * u[1], inv_k * u[0], 0;
  return J;
}

}  // namespace

TEST_CASE("J vanishes at u = 0") {
  for (const StructureConstants& sc : {heisenberg(), gk_member(3)})
    CHECK(j_operator(sc, Eigen::VectorXd::Zero(sc.d2())).mat.norm() == 0.0);
}

TEST_CASE("Heisenberg J is the rotation generator") {
  const StructureConstants sc = heisenberg();
  const double t = -1.7;
  const Eigen::MatrixXd J = j_operator(sc, Eigen::VectorXd::Constant(1, t)).mat;
  Eigen::MatrixXd expected(2, 2);
  expected << 0, -t, t, 0;
  CHECK(J.isApprox(expected));
  CHECK(J.isApprox(j_oracle(sc, Eigen::VectorXd::Constant(1, t))));
}

TEST_CASE("family J matches the displayed matrix") {
  Rng rng(3);
  for (long k : {1L, 2L, 10L}) {
    const StructureConstants sc = gk_member(k);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::Vector3d u = rng.normal_vector(3);
      const Eigen::MatrixXd J = j_operator(sc, u).mat;
      CHECK(J.isApprox(gk_display(1.0 / static_cast<double>(k), u), 1e-14));
      CHECK(J.isApprox(j_oracle(sc, u), 1e-14));
    }
  }
  const StructureConstants inf = gk_member(std::nullopt);
  const Eigen::Vector3d u(0.3, -1.2, 0.8);
  CHECK(j_operator(inf, u).mat.isApprox(gk_display(0.0, u), 1e-14));
}

TEST_CASE("J is exactly skew and linear in u") {
  for (const StructureConstants& sc : {heisenberg(), gk_member(5), free_step_two_3()}) {
    Rng rng(9);
    for (int trial = 0; trial < 30; ++trial) {
      const Eigen::VectorXd u = rng.normal_vector(sc.d2());
      const Eigen::VectorXd v = rng.normal_vector(sc.d2());
      const Eigen::MatrixXd Ju = j_operator(sc, u).mat;
      CHECK((Ju + Ju.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
      const Eigen::MatrixXd sum = j_operator(sc, (u + v).eval()).mat;
      CHECK((sum - Ju - j_operator(sc, v).mat).cwiseAbs().maxCoeff() < 1e-13);
    }
  }
}

TEST_CASE("defining identity on random triples") {
  const StructureConstants sc = gk_member(3);
  Rng rng(31);
  for (int trial = 0; trial < 10000; ++trial) {
    const Eigen::VectorXd u = rng.normal_vector(sc.d2());
    const Eigen::VectorXd v = rng.normal_vector(sc.m());
    const Eigen::VectorXd w = rng.normal_vector(sc.m());
    const double lhs = u.dot(sc.bracket_xi(v, w));
    const double rhs = w.dot(j_operator(sc, u).mat * v);
    const double scale = 1.0 + u.norm() * v.norm() * w.norm();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * scale);
  }
}

TEST_CASE("limit member has rank-2 J for every u != 0") {
  const StructureConstants sc = gk_member(std::nullopt);
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd u = rng.sphere(3);
    const Eigen::MatrixXd J = j_operator(sc, u).mat;
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(J).setThreshold(1e-9).rank() == 2);
  }
}

TEST_CASE("squared family J is negative definite for finite k") {
  // On the sphere |u| = 1 the singular values are {1, 1, 1/k, 1/k}.
  Rng rng(41);
  for (long k : {1L, 2L, 10L}) {
    const StructureConstants sc = gk_member(k);
    for (int trial = 0; trial < 20; ++trial) {
      const Eigen::VectorXd u = rng.sphere(3);
      const Eigen::MatrixXd J = j_operator(sc, u).mat;
      const Eigen::MatrixXd J2 = J * J;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J2);
      CHECK(es.eigenvalues().maxCoeff() < 0.0);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
      const Eigen::VectorXd sv = svd.singularValues();
      CHECK(sv[0] == Catch::Approx(1.0).margin(1e-12));
      CHECK(sv[1] == Catch::Approx(1.0).margin(1e-12));
      CHECK(sv[2] == Catch::Approx(1.0 / k).margin(1e-12));
      CHECK(sv[3] == Catch::Approx(1.0 / k).margin(1e-12));
    }
  }
}

TEST_CASE("metivier verdicts on the bundled groups") {
  CHECK(metivier_check(heisenberg(), 8, 0).status == MetivierStatus::Metivier);
  CHECK(metivier_check(gk_member(2), 16, 0).status == MetivierStatus::Metivier);
  CHECK(metivier_check(gk_member(1000), 16, 0).status == MetivierStatus::Metivier);

  const MetivierVerdict inf = metivier_check(gk_member(std::nullopt), 16, 0);
  REQUIRE(inf.status == MetivierStatus::NotMetivier);
  REQUIRE(inf.witness.has_value());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(j_operator(gk_member(std::nullopt), *inf.witness).mat);
  CHECK(svd.singularValues().minCoeff() <= 1e-12);

  // Odd first-layer dimension short-circuits.
  const MetivierVerdict f3 = metivier_check(free_step_two_3(), 4, 0);
  CHECK(f3.status == MetivierStatus::NotMetivier);
  REQUIRE(f3.witness.has_value());
}

TEST_CASE("metivier check validates the budget") {
  CHECK_THROWS_AS(metivier_check(heisenberg(), 0, 0), DomainError);
  CHECK_THROWS_AS(metivier_check(heisenberg(), -3, 0), DomainError);
}

TEST_CASE("metivier certificates are reproducible") {
  const MetivierVerdict a = metivier_check(gk_member(10), 12, 99);
  const MetivierVerdict b = metivier_check(gk_member(10), 12, 99);
  CHECK(a.status == b.status);
  CHECK(a.min_sigma == b.min_sigma);
  CHECK(a.min_sigma == Catch::Approx(0.1).margin(1e-9));
}
