#ifndef CARNOT_DISTANCE_HPP
#define CARNOT_DISTANCE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/geodesics.hpp"
#include "carnot/jmap.hpp"
#include "carnot/rng.hpp"
#include "carnot/structure_constants.hpp"
#include "carnot/tolerances.hpp"

namespace carnot {

enum class DistanceMethod { Shooting, Control, Both };

inline const char* to_string(DistanceMethod m) {
  switch (m) {
    case DistanceMethod::Shooting: return "shooting";
    case DistanceMethod::Control: return "control";
    default: return "both";
  }
}

struct ShootingOptions {
  int starts = 32;
  int max_iterations = 60;
  double residual_tol = tol::kShooting;  // relative to 1 + |target|
  std::uint64_t seed = 0;
  int early_stop_converged = 6;  // allow stopping once this many starts converged
  int early_stop_stale = 8;      // ... and the best length stalled this long
};

struct ControlOptions {
  int segments = 256;
  std::uint64_t seed = 0;
  double feasibility_tol = 1e-8;  // relative endpoint tolerance
  int outer_iterations = 40;
  int inner_iterations = 400;
};

struct DistanceOptions {
  ShootingOptions shooting;
  ControlOptions control;
};

struct ShootingSolution {
  Covector lambda;
  double length = 0.0;
  double residual = 0.0;  // relative endpoint residual
  int start_index = 0;
  int iterations = 0;
};

/// Estimate of the CC distance. Both routes, when run, are candidate upper
/// bounds: shooting returns the shortest converged normal geodesic, control
/// the length of a feasible discrete horizontal path.
struct DistanceEstimate {
  DistanceMethod method = DistanceMethod::Both;
  std::optional<double> shooting_value;
  std::optional<double> control_value;
  std::optional<ShootingSolution> best_shooting;
  double best_residual = -1.0;        // best shooting residual seen (relative)
  double control_feasibility = -1.0;  // endpoint residual of the control path (relative)
  int starts_used = 0;
  int starts_converged = 0;
  std::uint64_t seed = 0;
  bool inconclusive = false;
  std::string note;

  double value() const {
    if (shooting_value && control_value) return std::min(*shooting_value, *control_value);
    if (shooting_value) return *shooting_value;
    if (control_value) return *control_value;
    throw NumericalError("distance estimate holds no value: " + note);
  }

  double relative_gap() const {
    if (!shooting_value || !control_value) throw DomainError("relative_gap needs both methods");
    const double lo = std::min(*shooting_value, *control_value);
    if (lo == 0.0) return std::abs(*shooting_value - *control_value);
    return std::abs(*shooting_value - *control_value) / lo;
  }
};

namespace detail {

/// Limited-memory BFGS with Armijo backtracking. f fills the gradient and
/// returns the value.
inline void lbfgs_minimize(const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& f,
                           Eigen::VectorXd& x, int max_iters, double grad_tol) {
  const int mem = 10;
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd g(x.size()), g_new(x.size());
  double fx = f(x, g);
  for (int it = 0; it < max_iters; ++it) {
    if (g.lpNorm<Eigen::Infinity>() <= grad_tol * (1.0 + std::abs(fx))) return;

    Eigen::VectorXd q = g;
    std::vector<double> alphas(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alphas[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
      q -= alphas[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (!y_hist.empty()) {
      const Eigen::VectorXd& y = y_hist.back();
      const Eigen::VectorXd& s = s_hist.back();
      q *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alphas[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (slope >= 0.0) {  // fall back to steepest descent
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double f_new = fx;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + step * dir;
      f_new = f(x_new, g_new);
      if (f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return;

    const Eigen::VectorXd s_vec = x_new - x;
    const Eigen::VectorXd y_vec = g_new - g;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
      s_hist.push_back(s_vec);
      y_hist.push_back(y_vec);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > mem) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    x = x_new;
    g = g_new;
    fx = f_new;
  }
}

struct ControlOutcome {
  bool feasible = false;
  double length = 0.0;
  double feasibility = -1.0;  // relative endpoint residual
  Eigen::VectorXd controls;   // flat (segments x m)
};

/// Piecewise-constant controls, exact step-two propagation per segment,
/// endpoint pinned by an augmented Lagrangian on top of the energy objective.
class ControlSolver {
public:
  ControlSolver(const StructureConstants& sc, const GroupPoint& target, const ControlOptions& opt)
      : sc_(&sc), target_(target), opt_(opt), n_(sc.n()), scale_(1.0 + target.coords().norm()) {}

  ControlOutcome solve() {
    ControlOutcome best;
    const std::vector<Eigen::VectorXd> inits = initial_guesses();
    for (std::size_t r = 0; r < inits.size(); ++r) {
      ControlOutcome out = solve_from(inits[r]);
      const bool better =
          out.feasible && (!best.feasible || out.length < best.length - 1e-15);
      if (better) best = out;
      if (best.feasible && r + 1 >= 2 && inits.size() > 2) break;  // random extras only on failure
    }
    return best;
  }

private:
  Eigen::VectorXd straight_init() const {
    const int N = opt_.segments, m = sc_->m();
    Eigen::VectorXd W(N * m);
    for (int i = 0; i < N; ++i) W.segment(i * m, m) = target_.xi;
    return W;
  }

  /// One full turn in the basis plane whose bracket points best along the
  /// leftover second-layer displacement.
  Eigen::VectorXd loop_init() const {
    const int N = opt_.segments, m = sc_->m();
    Eigen::VectorXd W = straight_init();
    const double u_norm = target_.u.norm();
    if (u_norm < 1e-14) return W;
    const Eigen::VectorXd u_dir = target_.u / u_norm;
    int best_a = 0, best_b = 1;
    double best_c = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = a + 1; b < m; ++b) {
        const double cab = u_dir.dot(sc_->bracket_xi(Eigen::VectorXd::Unit(m, a),
                                                     Eigen::VectorXd::Unit(m, b)));
        if (std::abs(cab) > std::abs(best_c)) {
          best_c = cab;
          best_a = a;
          best_b = b;
        }
      }
    if (best_c == 0.0) return W;
    const double orientation = best_c > 0.0 ? 1.0 : -1.0;
    const double amplitude = std::sqrt(4.0 * M_PI * u_norm / std::abs(best_c));
    for (int i = 0; i < N; ++i) {
      const double t = (static_cast<double>(i) + 0.5) / N;
      W.segment(i * m, m) += amplitude * std::cos(2.0 * M_PI * t) * Eigen::VectorXd::Unit(m, best_a) +
                             orientation * amplitude * std::sin(2.0 * M_PI * t) *
                                 Eigen::VectorXd::Unit(m, best_b);
    }
    return W;
  }

  std::vector<Eigen::VectorXd> initial_guesses() const {
    std::vector<Eigen::VectorXd> inits{straight_init(), loop_init()};
    Rng rng(opt_.seed ^ 0x9e3779b97f4a7c15ull);
    const double sigma = 0.5 + target_.xi.norm() + std::sqrt(target_.u.norm());
    for (int extra = 0; extra < 2; ++extra) {
      Eigen::VectorXd W = straight_init();
      for (int i = 0; i < W.size(); ++i) W[i] += sigma * rng.normal();
      inits.push_back(W);
    }
    return inits;
  }

  /// Endpoint of the discrete path and, optionally, the gradient of
  /// lambda^T c + (rho/2)|c|^2 + energy with multiplier data folded in.
  void forward(const Eigen::VectorXd& W, Eigen::VectorXd& endpoint) const {
    const int N = opt_.segments, m = sc_->m(), d2 = sc_->d2();
    const double h = 1.0 / N;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m), z = Eigen::VectorXd::Zero(d2);
    for (int i = 0; i < N; ++i) {
      const auto w = W.segment(i * m, m);
      z += 0.5 * h * sc_->bracket_xi(x, w);
      x += h * w;
    }
    endpoint.resize(n_);
    endpoint << x, z;
  }

  ControlOutcome solve_from(const Eigen::VectorXd& W0) const {
    const int N = opt_.segments, m = sc_->m(), d2 = sc_->d2();
    const double h = 1.0 / N;
    const Eigen::VectorXd target = target_.coords();

    Eigen::VectorXd W = W0;
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n_);
    double rho = 10.0;
    double prev_c_norm = -1.0;

    auto objective = [&](const Eigen::VectorXd& Wv, Eigen::VectorXd& grad) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(m), z = Eigen::VectorXd::Zero(d2);
      std::vector<Eigen::VectorXd> xs(static_cast<std::size_t>(N));
      double energy = 0.0;
      for (int i = 0; i < N; ++i) {
        const auto w = Wv.segment(i * m, m);
        xs[static_cast<std::size_t>(i)] = x;
        z += 0.5 * h * sc_->bracket_xi(x, w);
        x += h * w;
        energy += h * w.squaredNorm();
      }
      Eigen::VectorXd c(n_);
      c << x - target.head(m), z - target.tail(d2);
      const double value = energy + lambda.dot(c) + 0.5 * rho * c.squaredNorm();

      const Eigen::VectorXd v = lambda + rho * c;
      const Eigen::VectorXd v_x = v.head(m);
      const Eigen::MatrixXd Jv = j_operator(*sc_, v.tail(d2)).mat;
      grad.resize(Wv.size());
      Eigen::VectorXd suffix = Eigen::VectorXd::Zero(m);  // h * sum_{j>i} w_j
      for (int i = N - 1; i >= 0; --i) {
        const auto w = Wv.segment(i * m, m);
        grad.segment(i * m, m) =
            2.0 * h * w + h * v_x + 0.5 * h * (Jv * (xs[static_cast<std::size_t>(i)] - suffix));
        suffix += h * w;
      }
      return value;
    };

    ControlOutcome out;
    Eigen::VectorXd endpoint;
    for (int outer = 0; outer < opt_.outer_iterations; ++outer) {
      detail::lbfgs_minimize(objective, W, opt_.inner_iterations, 1e-12);
      forward(W, endpoint);
      const Eigen::VectorXd c = endpoint - target;
      const double c_norm = c.norm();
      if (c_norm <= opt_.feasibility_tol * scale_) {
        out.feasible = true;
        break;
      }
      lambda += rho * c;
      if (prev_c_norm >= 0.0 && c_norm > 0.25 * prev_c_norm) rho = std::min(rho * 5.0, 1e10);
      prev_c_norm = c_norm;
    }
    forward(W, endpoint);
    out.feasibility = (endpoint - target).norm() / scale_;
    out.feasible = out.feasibility <= opt_.feasibility_tol;
    double len = 0.0;
    for (int i = 0; i < N; ++i) len += h * W.segment(i * m, m).norm();
    out.length = len;
    out.controls = W;
    return out;
  }

  const StructureConstants* sc_;
  GroupPoint target_;
  ControlOptions opt_;
  int n_;
  double scale_;
};

struct ShootingOutcome {
  std::optional<ShootingSolution> best;
  double best_residual = -1.0;
  int starts_used = 0;
  int starts_converged = 0;
};

/// Multi-start damped Gauss-Newton on the endpoint map, n equations in n
/// unknowns; start scales follow the dilation homogeneity of the target.
inline ShootingOutcome shoot(const StructureConstants& sc, const GroupPoint& target,
                             const ShootingOptions& opt) {
  const int m = sc.m(), d2 = sc.d2(), n = sc.n();
  const Eigen::VectorXd target_coords = target.coords();
  const double scale = 1.0 + target_coords.norm();

  auto endpoint = [&](const Eigen::VectorXd& lam) {
    return exp_map(sc, Covector::from_coords(m, d2, lam), 1.0).coords();
  };

  ShootingOutcome out;
  const double xi_scale =
      std::max({target.xi.norm(), std::sqrt(target.u.norm()), 0.25});
  const double u0_scales[4] = {0.5, 2.0, 6.0, 12.0};

  int last_improvement = -1;
  for (int start = 0; start < opt.starts; ++start) {
    Eigen::VectorXd lam(n);
    if (start == 0) {
      lam.head(m) = target.xi;
      lam.tail(d2).setZero();
    } else {
      Rng rng(opt.seed ^ static_cast<std::uint64_t>(start));
      lam.head(m) = xi_scale * rng.normal_vector(m);
      lam.tail(d2) = u0_scales[start % 4] * rng.normal_vector(d2);
    }

    Eigen::VectorXd r = endpoint(lam) - target_coords;
    double r_norm = r.norm();
    bool converged = r_norm <= opt.residual_tol * scale;
    int iters = 0;
    while (!converged && iters < opt.max_iterations) {
      ++iters;
      Eigen::MatrixXd Jac(n, n);
      for (int i = 0; i < n; ++i) {
        const double hstep = 1e-6 * (1.0 + std::abs(lam[i]));
        Eigen::VectorXd lam_h = lam;
        lam_h[i] += hstep;
        Jac.col(i) = (endpoint(lam_h) - target_coords - r) / hstep;
      }
      const Eigen::VectorXd delta = Jac.colPivHouseholderQr().solve(-r);
      if (!delta.allFinite()) break;
      double step = 1.0;
      bool moved = false;
      while (step > 1e-12) {
        const Eigen::VectorXd lam_new = lam + step * delta;
        const Eigen::VectorXd r_new = endpoint(lam_new) - target_coords;
        if (r_new.norm() < r_norm * (1.0 - 1e-4 * step)) {
          lam = lam_new;
          r = r_new;
          r_norm = r.norm();
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
      converged = r_norm <= opt.residual_tol * scale;
    }

    out.starts_used = start + 1;
    const double rel_res = r_norm / scale;
    if (out.best_residual < 0.0 || rel_res < out.best_residual) out.best_residual = rel_res;
    if (converged) {
      ++out.starts_converged;
      const double length = lam.head(m).norm();
      if (!out.best || length < out.best->length) {
        out.best = ShootingSolution{Covector::from_coords(m, d2, lam), length, rel_res, start, iters};
        last_improvement = start;
      }
    }
    if (out.starts_converged >= opt.early_stop_converged && last_improvement >= 0 &&
        start - last_improvement >= opt.early_stop_stale)
      break;
  }
  return out;
}

}  // namespace detail

/// CC distance d(p, q). Left-translates the problem to the identity, then
/// runs the requested solver(s) on the target (-p) * q.
inline DistanceEstimate distance(const StructureConstants& sc, const GroupPoint& p,
                                 const GroupPoint& q, DistanceMethod method = DistanceMethod::Both,
                                 const DistanceOptions& options = DistanceOptions{}) {
  sc.require_point(p);
  sc.require_point(q);
  const GroupPoint target = group_mul(sc, group_inv(p), q);

  DistanceEstimate est;
  est.method = method;
  est.seed = options.shooting.seed;

  if (target.coords().norm() == 0.0) {
    if (method != DistanceMethod::Control) {
      est.shooting_value = 0.0;
      est.best_residual = 0.0;
      est.best_shooting = ShootingSolution{Covector::zero(sc.m(), sc.d2()), 0.0, 0.0, 0, 0};
    }
    if (method != DistanceMethod::Shooting) {
      est.control_value = 0.0;
      est.control_feasibility = 0.0;
    }
    return est;
  }

  if (method == DistanceMethod::Shooting || method == DistanceMethod::Both) {
    const detail::ShootingOutcome out = detail::shoot(sc, target, options.shooting);
    est.starts_used = out.starts_used;
    est.starts_converged = out.starts_converged;
    est.best_residual = out.best_residual;
    if (out.best) {
      est.best_shooting = out.best;
      est.shooting_value = out.best->length;
    } else {
      est.inconclusive = true;
      est.note = "shooting: no start converged; best relative residual " +
                 std::to_string(out.best_residual);
    }
  }

  if (method == DistanceMethod::Control || method == DistanceMethod::Both) {
    ControlOptions copt = options.control;
    copt.seed = options.control.seed;
    const detail::ControlOutcome out = detail::ControlSolver(sc, target, copt).solve();
    est.control_feasibility = out.feasibility;
    if (out.feasible) {
      est.control_value = out.length;
    } else if (method == DistanceMethod::Control) {
      throw NumericalError("control solver: endpoint infeasible (relative residual " +
                           std::to_string(out.feasibility) + ")");
    } else {
      est.note += (est.note.empty() ? "" : "; ");
      est.note += "control: endpoint infeasible";
    }
  }
  return est;
}

/// Default reduced-budget options used by the minimizing-covector filter.
inline DistanceOptions minimizing_check_options() {
  DistanceOptions opt;
  opt.shooting.starts = 12;
  opt.shooting.early_stop_converged = 3;
  opt.shooting.early_stop_stale = 4;
  opt.control.segments = 64;
  return opt;
}

/// Heuristic cut-locus filter: the covector is kept when its geodesic length
/// does not exceed the two-solver distance estimate by more than the slack
/// 1e-3 * (1 + |xi0|).
inline bool minimizing_check(const StructureConstants& sc, const Covector& lambda,
                             const DistanceOptions& options = minimizing_check_options()) {
  const double speed = lambda.xi0.norm();
  if (speed == 0.0) return true;
  const GroupPoint end = exp_map(sc, lambda, 1.0);
  const DistanceEstimate est =
      distance(sc, GroupPoint::zero(sc.m(), sc.d2()), end, DistanceMethod::Both, options);
  return speed <= est.value() + tol::kMinimizing * (1.0 + speed);
}

}  // namespace carnot

#endif
