#ifndef CARNOT_JMAP_HPP
#define CARNOT_JMAP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "carnot/errors.hpp"
#include "carnot/rng.hpp"
#include "carnot/structure_constants.hpp"
#include "carnot/tolerances.hpp"

namespace carnot {

/// The skew-symmetric map J_u on the first layer, defined against the bracket
/// by <u, [v, w]> = <J_u v, w>. Entry (j, i) is sum_l u_l c^l_{ij}.
struct JOperator {
  Eigen::VectorXd u;
  Eigen::MatrixXd mat;
};

inline JOperator j_operator(const StructureConstants& sc, const Eigen::VectorXd& u) {
  sc.require_u(u);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(sc.m(), sc.m());
  // (J_u)_{ji} = sum_l u_l c^l_{ij}, so J_u = -sum_l u_l C_l with C_l antisymmetric.
  for (int l = 0; l < sc.d2(); ++l) J.noalias() -= u[l] * sc.layer_matrix(l);
  return JOperator{u, std::move(J)};
}

enum class MetivierStatus { Metivier, NotMetivier, Inconclusive };

inline const char* to_string(MetivierStatus s) {
  switch (s) {
    case MetivierStatus::Metivier: return "Metivier";
    case MetivierStatus::NotMetivier: return "NotMetivier";
    default: return "Inconclusive";
  }
}

/// Verdict of the Metivier/ideal test. A NotMetivier verdict always carries a
/// unit witness with sigma_min(J_witness) <= 1e-12; a Metivier verdict is a
/// sampling certificate (budget, seed, minimum found), not a proof.
struct MetivierVerdict {
  MetivierStatus status = MetivierStatus::Inconclusive;
  std::optional<Eigen::VectorXd> witness;
  double min_sigma = 0.0;  // smallest sigma_min(J_u) seen over the search
  int budget = 0;
  std::uint64_t seed = 0;
  int starts_run = 0;
  std::string certificate;
};

namespace detail {

struct SigmaEval {
  double sigma_min = 0.0;   // smallest singular value
  double pair_mean = 0.0;   // mean of the two smallest (smooth surrogate)
  Eigen::VectorXd grad;     // gradient of pair_mean on the ambient space
};

inline SigmaEval sigma_min_eval(const StructureConstants& sc, const Eigen::VectorXd& u) {
  const Eigen::MatrixXd J = j_operator(sc, u).mat;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const int m = sc.m();
  const Eigen::VectorXd& s = svd.singularValues();
  SigmaEval ev;
  ev.sigma_min = s[m - 1];
  ev.pair_mean = 0.5 * (s[m - 1] + s[m - 2]);
  ev.grad = Eigen::VectorXd::Zero(sc.d2());
  // d sigma_k / d u_l = U_k^T (dJ/du_l) V_k with dJ/du_l = -C_l.
  for (int k = m - 2; k < m; ++k) {
    const Eigen::VectorXd uk = svd.matrixU().col(k);
    const Eigen::VectorXd vk = svd.matrixV().col(k);
    for (int l = 0; l < sc.d2(); ++l)
      ev.grad[l] += -0.5 * uk.dot(sc.layer_matrix(l) * vk);
  }
  return ev;
}

}  // namespace detail

/// Minimizes sigma_min(J_u) over the unit sphere of g2 by multi-start
/// projected gradient descent (smoothed through the smallest singular pair;
/// singular values of a skew matrix pair up, so sigma_min alone is never
/// simple). Odd m short-circuits: odd-dimensional skew matrices are singular.
inline MetivierVerdict metivier_check(const StructureConstants& sc, int budget,
                                      std::uint64_t seed) {
  if (budget <= 0) throw DomainError("metivier_check: budget must be positive");
  MetivierVerdict verdict;
  verdict.budget = budget;
  verdict.seed = seed;

  if (sc.m() % 2 == 1) {
    // Pick the basis direction whose J has the smallest sigma_min.
    double best = -1.0;
    Eigen::VectorXd best_u;
    for (int l = 0; l < sc.d2(); ++l) {
      const Eigen::VectorXd u = Eigen::VectorXd::Unit(sc.d2(), l);
      const double s = detail::sigma_min_eval(sc, u).sigma_min;
      if (best < 0.0 || s < best) {
        best = s;
        best_u = u;
      }
    }
    verdict.status = MetivierStatus::NotMetivier;
    verdict.witness = best_u;
    verdict.min_sigma = best;
    verdict.certificate = "odd first-layer dimension: every J_u is singular";
    return verdict;
  }

  double global_min = -1.0;
  Eigen::VectorXd global_arg;
  bool witness_found = false;
  for (int start = 0; start < budget && !witness_found; ++start) {
    Rng rng(seed ^ static_cast<std::uint64_t>(start));
    Eigen::VectorXd u = rng.sphere(sc.d2());
    detail::SigmaEval ev = detail::sigma_min_eval(sc, u);
    for (int iter = 0; iter < 200; ++iter) {
      if (ev.sigma_min <= tol::kMetivierWitness) break;
      Eigen::VectorXd g = ev.grad - ev.grad.dot(u) * u;  // tangent projection
      if (g.norm() <= 1e-12 * (1.0 + ev.pair_mean)) break;
      double step = 0.5;
      bool moved = false;
      while (step > 1e-14) {
        Eigen::VectorXd cand = (u - step * g).normalized();
        detail::SigmaEval ev_cand = detail::sigma_min_eval(sc, cand);
        if (ev_cand.pair_mean < ev.pair_mean - 1e-4 * step * g.squaredNorm()) {
          u = cand;
          ev = ev_cand;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    verdict.starts_run = start + 1;
    if (global_min < 0.0 || ev.sigma_min < global_min) {
      global_min = ev.sigma_min;
      global_arg = u;
    }
    if (ev.sigma_min <= tol::kMetivierWitness) witness_found = true;
  }

  verdict.min_sigma = global_min;
  if (global_min <= tol::kMetivierWitness) {
    verdict.status = MetivierStatus::NotMetivier;
    verdict.witness = global_arg;
    verdict.certificate = "descent reached sigma_min <= 1e-12";
  } else if (global_min >= tol::kMetivierClear) {
    verdict.status = MetivierStatus::Metivier;
    verdict.certificate = "all " + std::to_string(verdict.starts_run) +
                          " descent starts stayed above 1e-6";
  } else {
    verdict.status = MetivierStatus::Inconclusive;
    verdict.certificate = "minimum found lies between the witness and clearance bounds";
  }
  return verdict;
}

}  // namespace carnot

#endif
