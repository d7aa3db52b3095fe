#ifndef CARNOT_GEODESICS_HPP
#define CARNOT_GEODESICS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/jmap.hpp"
#include "carnot/quadrature.hpp"
#include "carnot/skew_flow.hpp"
#include "carnot/structure_constants.hpp"
#include "carnot/tolerances.hpp"

namespace carnot {

/// Initial momentum of a normal geodesic from the identity: xi0 is the
/// horizontal part (its norm is the constant speed), u0 the vertical part.
struct Covector {
  Eigen::VectorXd xi0;
  Eigen::VectorXd u0;

  Covector() = default;
  Covector(Eigen::VectorXd xi, Eigen::VectorXd u) : xi0(std::move(xi)), u0(std::move(u)) {}

  Eigen::VectorXd coords() const {
    Eigen::VectorXd c(xi0.size() + u0.size());
    c << xi0, u0;
    return c;
  }

  Covector scaled(double s) const { return Covector(s * xi0, s * u0); }

  static Covector zero(int m, int d2) {
    return Covector(Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(d2));
  }
  static Covector from_coords(int m, int d2, const Eigen::VectorXd& c) {
    if (c.size() != m + d2) throw StructuralError("covector coordinates have wrong length");
    return Covector(c.head(m), c.tail(d2));
  }
};

/// v + [p, v]/2: the left-invariant frame applied to a first-layer vector v
/// at the point p, in exponential coordinates.
inline GroupPoint left_frame(const StructureConstants& sc, const GroupPoint& p,
                             const Eigen::VectorXd& v) {
  sc.require_point(p);
  sc.require_xi(v);
  return GroupPoint(v, 0.5 * sc.bracket_xi(p.xi, v));
}

/// Endpoint evaluator for one covector: the horizontal velocity rotates as
/// v(s) = exp(s J_{u0}) xi0, the first layer is its exact running integral,
/// and the second layer z(t) = (1/2) int_0^t [x(s), v(s)] ds is done by
/// adaptive Gauss-Legendre to abs target 1e-10.
class GeodesicFlow {
public:
  GeodesicFlow(const StructureConstants& sc, const Covector& lambda)
      : sc_(&sc),
        lambda_(lambda),
        dec_(j_operator(sc, lambda.u0).mat),
        flow_(dec_, lambda.xi0) {}

  const Covector& covector() const { return lambda_; }

  Eigen::VectorXd velocity(double t) const { return flow_.velocity(t); }
  Eigen::VectorXd position(double t) const { return flow_.position(t); }

  GroupPoint at(double t) const {
    const Eigen::VectorXd x = flow_.position(t);
    Eigen::VectorXd z;
    if (sc_->d2() == 0) {
      z.resize(0);
    } else {
      auto integrand = [&](double s) {
        return sc_->bracket_xi(flow_.position(s), flow_.velocity(s));
      };
      const QuadratureResult q = integrate_adaptive(integrand, 0.0, t, tol::kQuadrature);
      z = 0.5 * q.value;
    }
    return GroupPoint(x, z);
  }

private:
  const StructureConstants* sc_;
  Covector lambda_;
  SkewDecomposition dec_;
  SkewFlow flow_;
};

/// gamma(t) for the normal geodesic with initial momentum lambda.
inline GroupPoint exp_map(const StructureConstants& sc, const Covector& lambda, double t) {
  sc.require_xi(lambda.xi0);
  sc.require_u(lambda.u0);
  return GeodesicFlow(sc, lambda).at(t);
}

/// A normal geodesic sampled at increasing times in [0, 1].
struct GeodesicPath {
  Covector lambda;
  std::vector<double> times;
  std::vector<GroupPoint> points;
};

inline GeodesicPath sample_geodesic(const StructureConstants& sc, const Covector& lambda,
                                    int samples) {
  if (samples < 2) throw DomainError("sample_geodesic: need at least two samples");
  GeodesicFlow flow(sc, lambda);
  GeodesicPath path;
  path.lambda = lambda;
  path.times.reserve(static_cast<std::size_t>(samples));
  path.points.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    path.times.push_back(t);
    path.points.push_back(flow.at(t));
  }
  return path;
}

/// Length of a sampled normal geodesic: the speed is constant, so this is
/// (t_N - t_0) * |xi0| once constancy is re-checked at the samples.
inline double path_length(const StructureConstants& sc, const GeodesicPath& path) {
  if (path.times.size() < 2) throw DomainError("path_length: need at least two samples");
  GeodesicFlow flow(sc, path.lambda);
  const double speed = path.lambda.xi0.norm();
  for (double t : path.times) {
    const double st = flow.velocity(t).norm();
    if (std::abs(st - speed) > tol::kSpeed * (1.0 + speed))
      throw DomainError("path_length: sampled path is not constant-speed horizontal");
  }
  return (path.times.back() - path.times.front()) * speed;
}

/// Length of a piecewise-linear horizontal polygon: each group increment
/// (-p_i) * p_{i+1} must be pure first layer, and the length is the sum of
/// the segment norms.
inline double polyline_length(const StructureConstants& sc, const std::vector<GroupPoint>& pts) {
  if (pts.size() < 2) throw DomainError("polyline_length: need at least two points");
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const GroupPoint inc = group_mul(sc, group_inv(pts[i]), pts[i + 1]);
    const double scale = 1.0 + inc.xi.norm();
    if (inc.u.size() > 0 && inc.u.cwiseAbs().maxCoeff() > 1e-10 * scale)
      throw DomainError("polyline_length: segment " + std::to_string(i) +
                        " is not horizontal (second-layer increment)");
    len += inc.xi.norm();
  }
  return len;
}

}  // namespace carnot

#endif
