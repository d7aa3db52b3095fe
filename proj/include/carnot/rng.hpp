#ifndef CARNOT_RNG_HPP
#define CARNOT_RNG_HPP

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

namespace carnot {

/// Seeded random source. mt19937_64 has a standard-mandated bit stream and the
/// transforms below avoid std::*_distribution, whose output is
/// implementation-defined, so a seed pins every draw.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1].
  double uniform01_open0() { return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform01_open0()));
    const double phi = 2.0 * M_PI * uniform01();
    return r * std::cos(phi);
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Eigen::VectorXd uniform_vector(int n, double a, double b) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(a, b);
    return v;
  }

  /// Uniform point on the unit sphere of R^n.
  Eigen::VectorXd sphere(int n) {
    Eigen::VectorXd v = normal_vector(n);
    double nv = v.norm();
    while (nv < 1e-300) {  // astronomically unlikely
      v = normal_vector(n);
      nv = v.norm();
    }
    return v / nv;
  }

  /// Uniform point in the ball of radius r.
  Eigen::VectorXd ball(int n, double r) {
    const Eigen::VectorXd dir = sphere(n);
    const double rho = r * std::pow(uniform01(), 1.0 / static_cast<double>(n));
    return rho * dir;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace carnot

#endif
