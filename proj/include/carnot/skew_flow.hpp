#ifndef CARNOT_SKEW_FLOW_HPP
#define CARNOT_SKEW_FLOW_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "carnot/errors.hpp"

namespace carnot {

/// Invariant-plane form of a real skew-symmetric matrix: J restricted to each
/// plane span{w1, w2} is a rotation generator of rate theta, and J vanishes
/// on the orthogonal kernel. Obtained from the symmetric eigenproblem of
/// -J^2, which keeps exp(tJ) exactly orthogonal.
class SkewDecomposition {
public:
  struct Plane {
    Eigen::VectorXd w1, w2;
    double theta = 0.0;
  };

  explicit SkewDecomposition(const Eigen::MatrixXd& J) : dim_(static_cast<int>(J.rows())) {
    if (J.rows() != J.cols()) throw StructuralError("skew decomposition needs a square matrix");
    const Eigen::MatrixXd S = -J * J;  // symmetric PSD for skew J
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const Eigen::VectorXd evals = es.eigenvalues();  // ascending
    const double scale = evals.size() > 0 ? std::max(evals[evals.size() - 1], 0.0) : 0.0;
    const double cut = 1e-24 * scale + 1e-300;  // theta^2 threshold

    Eigen::MatrixXd built(dim_, 0);
    std::vector<Eigen::VectorXd> kernel_cols;
    for (int k = static_cast<int>(evals.size()) - 1; k >= 0; --k) {
      Eigen::VectorXd w = es.eigenvectors().col(k);
      if (evals[k] <= cut) {
        kernel_cols.push_back(w);
        continue;
      }
      // Deflate against planes already built (handles repeated rates).
      if (built.cols() > 0) w -= built * (built.transpose() * w);
      const double wn = w.norm();
      if (wn < 0.5) continue;  // this eigenvector lives in an existing plane
      w /= wn;
      Eigen::VectorXd jw = J * w;
      if (built.cols() > 0) jw -= built * (built.transpose() * jw);
      jw -= w.dot(jw) * w;
      const double theta = jw.norm();
      Plane plane;
      plane.w1 = w;
      plane.w2 = jw / theta;
      plane.theta = theta;
      planes_.push_back(plane);
      built.conservativeResize(dim_, built.cols() + 2);
      built.col(built.cols() - 2) = plane.w1;
      built.col(built.cols() - 1) = plane.w2;
    }
    kernel_.resize(dim_, static_cast<int>(kernel_cols.size()));
    for (int c = 0; c < kernel_.cols(); ++c) kernel_.col(c) = kernel_cols[static_cast<std::size_t>(c)];
  }

  int dim() const { return dim_; }
  const std::vector<Plane>& planes() const { return planes_; }
  const Eigen::MatrixXd& kernel() const { return kernel_; }

  /// exp(tJ)
  Eigen::MatrixXd exp(double t) const {
    Eigen::MatrixXd E = kernel_ * kernel_.transpose();
    for (const Plane& pl : planes_) {
      const double c = std::cos(pl.theta * t), s = std::sin(pl.theta * t);
      E.noalias() += c * (pl.w1 * pl.w1.transpose() + pl.w2 * pl.w2.transpose());
      E.noalias() += s * (pl.w2 * pl.w1.transpose() - pl.w1 * pl.w2.transpose());
    }
    return E;
  }

  /// int_0^t exp(sJ) ds
  Eigen::MatrixXd integral_exp(double t) const {
    Eigen::MatrixXd E = t * (kernel_ * kernel_.transpose());
    for (const Plane& pl : planes_) {
      const double c = (1.0 - std::cos(pl.theta * t)) / pl.theta;
      const double s = std::sin(pl.theta * t) / pl.theta;
      E.noalias() += s * (pl.w1 * pl.w1.transpose() + pl.w2 * pl.w2.transpose());
      E.noalias() += c * (pl.w2 * pl.w1.transpose() - pl.w1 * pl.w2.transpose());
    }
    return E;
  }

private:
  int dim_ = 0;
  std::vector<Plane> planes_;
  Eigen::MatrixXd kernel_;
};

/// Trajectory data of one rotating velocity: v(s) = exp(sJ) xi0 and its
/// running integral x(s), evaluated through per-plane coefficients.
class SkewFlow {
public:
  SkewFlow(const SkewDecomposition& dec, const Eigen::VectorXd& xi0) {
    if (xi0.size() != dec.dim()) throw StructuralError("skew flow: vector length mismatch");
    for (const auto& pl : dec.planes())
      coef_.push_back(Coef{pl.w1, pl.w2, pl.theta, pl.w1.dot(xi0), pl.w2.dot(xi0)});
    ker_part_ = dec.kernel() * (dec.kernel().transpose() * xi0);
    dim_ = dec.dim();
  }

  /// exp(sJ) xi0
  Eigen::VectorXd velocity(double s) const {
    Eigen::VectorXd v = ker_part_;
    for (const Coef& c : coef_) {
      const double co = std::cos(c.theta * s), si = std::sin(c.theta * s);
      v.noalias() += (c.a * co - c.b * si) * c.w1 + (c.a * si + c.b * co) * c.w2;
    }
    return v;
  }

  /// int_0^s exp(r J) xi0 dr
  Eigen::VectorXd position(double s) const {
    Eigen::VectorXd x = s * ker_part_;
    for (const Coef& c : coef_) {
      const double si = std::sin(c.theta * s) / c.theta;
      const double co = (1.0 - std::cos(c.theta * s)) / c.theta;
      x.noalias() += (c.a * si - c.b * co) * c.w1 + (c.a * co + c.b * si) * c.w2;
    }
    return x;
  }

  int dim() const { return dim_; }

private:
  struct Coef {
    Eigen::VectorXd w1, w2;
    double theta;
    double a, b;  // components of xi0 in the plane
  };
  std::vector<Coef> coef_;
  Eigen::VectorXd ker_part_;
  int dim_ = 0;
};

}  // namespace carnot

#endif
