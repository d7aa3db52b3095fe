#ifndef CARNOT_MCP_HPP
#define CARNOT_MCP_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "carnot/distance.hpp"
#include "carnot/errors.hpp"
#include "carnot/geodesics.hpp"
#include "carnot/rng.hpp"
#include "carnot/structure_constants.hpp"

namespace carnot {

/// Comparison function: sin(sqrt(K) t)/sqrt(K) for K > 0, t for K = 0,
/// sinh(sqrt(-K) t)/sqrt(-K) for K < 0.
inline double s_K(double K, double t) {
  if (K > 0.0) {
    const double r = std::sqrt(K);
    return std::sin(r * t) / r;
  }
  if (K < 0.0) {
    const double r = std::sqrt(-K);
    return std::sinh(r * t) / r;
  }
  return t;
}

/// Arguments of the MCP distortion coefficient.
struct DistortionQuery {
  double K = 0.0;
  double N = 1.0;
  double s = 0.0;  // in [0, 1]
  double d = 0.0;  // distance, >= 0

  void validate() const {
    if (!(N >= 1.0)) throw DomainError("mcp: N must be >= 1");
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("mcp: s must lie in [0, 1]");
    if (!(d >= 0.0)) throw DomainError("mcp: d must be >= 0");
    if (K > 0.0) {
      const double bound = M_PI * std::sqrt((N - 1.0) / K);
      if (!(d < bound))
        throw DomainError("mcp: K > 0 requires d < pi*sqrt((N-1)/K)");
    }
  }
};

/// s * [ s_K(s d / sqrt(N-1)) / s_K(d / sqrt(N-1)) ]^(N-1), with 0/0 = 1 and
/// the bracket equal to 1 when N = 1.
inline double mcp_integrand(const DistortionQuery& q) {
  q.validate();
  if (q.N == 1.0) return q.s;
  const double arg = q.d / std::sqrt(q.N - 1.0);
  const double num = s_K(q.K, q.s * arg);
  const double den = s_K(q.K, arg);
  double bracket = 1.0;  // 0/0 convention
  if (den != 0.0 || num != 0.0) {
    if (den == 0.0) throw DomainError("mcp: comparison denominator vanished");
    bracket = num / den;
  }
  return q.s * std::pow(bracket, q.N - 1.0);
}

struct JacobianResult {
  double abs_det = 0.0;
  double condition = 0.0;
  bool flagged = false;  // near-singular differencing
};

/// |det D exp_map(., 1)| at lambda by central finite differences with
/// per-coordinate steps 1e-5 * (1 + |coordinate|).
inline JacobianResult jacobian_exp(const StructureConstants& sc, const Covector& lambda) {
  const int m = sc.m(), d2 = sc.d2(), n = sc.n();
  const Eigen::VectorXd lam = lambda.coords();
  Eigen::MatrixXd D(n, n);
  for (int i = 0; i < n; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(lam[i]));
    Eigen::VectorXd lp = lam, lm = lam;
    lp[i] += h;
    lm[i] -= h;
    const Eigen::VectorXd fp = exp_map(sc, Covector::from_coords(m, d2, lp), 1.0).coords();
    const Eigen::VectorXd fm = exp_map(sc, Covector::from_coords(m, d2, lm), 1.0).coords();
    D.col(i) = (fp - fm) / (2.0 * h);
  }
  JacobianResult res;
  res.abs_det = std::abs(D.determinant());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D);
  const Eigen::VectorXd& sv = svd.singularValues();
  res.condition = sv[n - 1] > 0.0 ? sv[0] / sv[n - 1] : std::numeric_limits<double>::infinity();
  res.flagged = !(res.condition < 1e12);
  return res;
}

/// One evaluation of the contraction exponent along a covector.
struct ContractionSample {
  Covector lambda;
  double s = 0.0;
  double exponent = 0.0;
  bool minimizing = false;
  bool valid = false;
  std::string reason;  // set when discarded
};

/// exponent = log(s^n J(s lambda) / J(lambda)) / log(s), with s lambda the
/// time-rescaled covector. Along minimizing covectors any admissible N of
/// MCP(0, N) dominates this value.
inline ContractionSample contraction_exponent(const StructureConstants& sc, const Covector& lambda,
                                              double s, bool minimizing = false) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("contraction_exponent: s must lie in (0, 1)");
  ContractionSample sample;
  sample.lambda = lambda;
  sample.s = s;
  sample.minimizing = minimizing;

  const JacobianResult j1 = jacobian_exp(sc, lambda);
  if (j1.flagged || j1.abs_det <= 0.0) {
    sample.reason = "jacobian at lambda flagged or zero";
    return sample;
  }
  const JacobianResult js = jacobian_exp(sc, lambda.scaled(s));
  if (js.flagged || js.abs_det <= 0.0) {
    sample.reason = "jacobian at s*lambda flagged or zero";
    return sample;
  }
  sample.exponent =
      (sc.n() * std::log(s) + std::log(js.abs_det) - std::log(j1.abs_det)) / std::log(s);
  sample.valid = true;
  return sample;
}

struct NceOptions {
  double xi0_scale = 1.0;
  double u0_scale = 1.0;
  DistanceOptions filter;  // solver budgets of the minimizing filter

  NceOptions() : filter(minimizing_check_options()) {}
};

struct NceReport {
  bool found = false;
  double best_exponent = 0.0;
  Covector witness_lambda;
  double witness_s = 0.0;
  long samples_requested = 0;
  long samples_kept = 0;      // passed the minimizing filter
  long samples_discarded = 0; // invalid Jacobians among kept covectors
  std::uint64_t seed = 0;
  std::vector<ContractionSample> samples;  // every valid evaluation
};

/// Draws seeded covectors, keeps those passing the minimizing filter, and
/// returns the supremum of the contraction exponent over the s-grid: an
/// empirical lower bound for the curvature exponent.
inline NceReport nce_lower_bound(const StructureConstants& sc, long samples,
                                 const std::vector<double>& s_grid, std::uint64_t seed,
                                 const NceOptions& options = NceOptions{}) {
  if (samples < 1) throw DomainError("nce_lower_bound: samples must be >= 1");
  for (double s : s_grid)
    if (!(s > 0.0 && s < 1.0)) throw DomainError("nce_lower_bound: s grid must lie in (0, 1)");
  NceReport rep;
  rep.samples_requested = samples;
  rep.seed = seed;

  Rng rng(seed);
  for (long k = 0; k < samples; ++k) {
    const Covector lambda(options.xi0_scale * rng.normal_vector(sc.m()),
                          options.u0_scale * rng.normal_vector(sc.d2()));
    if (!minimizing_check(sc, lambda, options.filter)) continue;
    ++rep.samples_kept;
    for (double s : s_grid) {
      const ContractionSample sample = contraction_exponent(sc, lambda, s, true);
      if (!sample.valid) {
        ++rep.samples_discarded;
        continue;
      }
      rep.samples.push_back(sample);
      if (!rep.found || sample.exponent > rep.best_exponent) {
        rep.found = true;
        rep.best_exponent = sample.exponent;
        rep.witness_lambda = sample.lambda;
        rep.witness_s = sample.s;
      }
    }
  }
  return rep;
}

struct ZsEstimate {
  double ratio = 0.0;
  double std_error = 0.0;
  long samples_used = 0;
  long shooting_failures = 0;
  bool inconclusive = false;
};

/// Monte Carlo estimate of mu(Z_s(0, A)) / mu(A) for a coordinate ball A:
/// uniform samples in A, a minimizing covector per sample by shooting, and
/// the Jacobian-weighted change of variables at parameter s.
inline ZsEstimate zs_volume_ratio(const StructureConstants& sc, const GroupPoint& center,
                                  double radius, double s, long mc_points, std::uint64_t seed,
                                  const DistanceOptions& options = minimizing_check_options()) {
  if (!(radius > 0.0)) throw DomainError("zs_volume_ratio: radius must be positive");
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("zs_volume_ratio: s must lie in (0, 1]");
  if (mc_points < 1) throw DomainError("zs_volume_ratio: need at least one sample");
  sc.require_point(center);

  ZsEstimate est;
  Rng rng(seed);
  double sum = 0.0, sum_sq = 0.0;
  for (long k = 0; k < mc_points; ++k) {
    const Eigen::VectorXd offset = rng.ball(sc.n(), radius);
    const GroupPoint y = GroupPoint::from_coords(sc.m(), sc.d2(), center.coords() + offset);
    const DistanceEstimate d =
        distance(sc, GroupPoint::zero(sc.m(), sc.d2()), y, DistanceMethod::Shooting, options);
    if (!d.best_shooting) {
      ++est.shooting_failures;
      continue;
    }
    const Covector lambda = d.best_shooting->lambda;
    double term;
    if (s == 1.0) {
      term = 1.0;
    } else {
      const JacobianResult j1 = jacobian_exp(sc, lambda);
      const JacobianResult js = jacobian_exp(sc, lambda.scaled(s));
      if (j1.flagged || j1.abs_det <= 0.0 || js.flagged) {
        ++est.shooting_failures;
        continue;
      }
      term = std::pow(s, sc.n()) * js.abs_det / j1.abs_det;
    }
    sum += term;
    sum_sq += term * term;
    ++est.samples_used;
  }
  if (est.samples_used > 0) {
    est.ratio = sum / est.samples_used;
    const double var =
        std::max(0.0, sum_sq / est.samples_used - est.ratio * est.ratio);
    est.std_error = std::sqrt(var / est.samples_used);
  }
  est.inconclusive =
      est.samples_used == 0 || est.shooting_failures * 20 > mc_points;  // 5% failure budget
  return est;
}

}  // namespace carnot

#endif
