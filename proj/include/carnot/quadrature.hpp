#ifndef CARNOT_QUADRATURE_HPP
#define CARNOT_QUADRATURE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "carnot/errors.hpp"

namespace carnot {

namespace detail {

/// Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1], computed by
/// Newton iteration on the Legendre polynomial.
struct GaussRule {
  std::vector<double> nodes, weights;
};

inline GaussRule make_gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        double q0 = 1.0, q1 = x;
        for (int k = 2; k <= n; ++k) {
          const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
          q0 = q1;
          q1 = q2;
        }
        const double dq = n * (x * q1 - q0) / (x * x - 1.0);
        rule.nodes[static_cast<std::size_t>(i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dq * dq);
        break;
      }
    }
  }
  return rule;
}

inline const GaussRule& gauss7() {
  static const GaussRule rule = make_gauss_rule(7);
  return rule;
}
inline const GaussRule& gauss15() {
  static const GaussRule rule = make_gauss_rule(15);
  return rule;
}

}  // namespace detail

struct QuadratureResult {
  Eigen::VectorXd value;
  double error_estimate = 0.0;
  int evaluations = 0;
  int max_depth_used = 0;
};

/// Adaptive Gauss-Legendre for a smooth vector-valued integrand: each panel
/// is accepted when the GL7/GL15 discrepancy meets its share of the absolute
/// target, otherwise bisected.
inline QuadratureResult integrate_adaptive(
    const std::function<Eigen::VectorXd(double)>& f, double a, double b, double abs_tol,
    int max_depth = 24) {
  const auto& g7 = detail::gauss7();
  const auto& g15 = detail::gauss15();

  struct Panel {
    double a, b;
    int depth;
  };
  QuadratureResult res;
  const double total_len = std::abs(b - a);
  if (total_len == 0.0) {
    res.value = f(a) * 0.0;
    res.evaluations = 1;
    return res;
  }

  std::vector<Panel> stack{{a, b, 0}};
  Eigen::VectorXd acc;
  bool acc_init = false;
  while (!stack.empty()) {
    const Panel p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b), half = 0.5 * (p.b - p.a);
    Eigen::VectorXd s7, s15;
    for (std::size_t i = 0; i < g15.nodes.size(); ++i) {
      const Eigen::VectorXd fx = f(mid + half * g15.nodes[i]);
      if (i == 0) s15 = Eigen::VectorXd::Zero(fx.size());
      s15 += g15.weights[i] * fx;
      ++res.evaluations;
    }
    for (std::size_t i = 0; i < g7.nodes.size(); ++i) {
      const Eigen::VectorXd fx = f(mid + half * g7.nodes[i]);
      if (i == 0) s7 = Eigen::VectorXd::Zero(fx.size());
      s7 += g7.weights[i] * fx;
      ++res.evaluations;
    }
    s15 *= half;
    s7 *= half;
    const double err = s15.size() == 0 ? 0.0 : (s15 - s7).cwiseAbs().maxCoeff();
    const double share = abs_tol * (std::abs(p.b - p.a) / total_len);
    if (err <= share || p.depth >= max_depth) {
      if (p.depth >= max_depth && err > share)
        throw NumericalError("adaptive quadrature: panel at depth " + std::to_string(p.depth) +
                             " has error estimate " + std::to_string(err));
      if (!acc_init) {
        acc = s15;
        acc_init = true;
      } else {
        acc += s15;
      }
      res.error_estimate += err;
      if (p.depth > res.max_depth_used) res.max_depth_used = p.depth;
    } else {
      stack.push_back(Panel{p.a, mid, p.depth + 1});
      stack.push_back(Panel{mid, p.b, p.depth + 1});
    }
  }
  res.value = acc;
  return res;
}

}  // namespace carnot

#endif
