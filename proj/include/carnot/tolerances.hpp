#ifndef CARNOT_TOLERANCES_HPP
#define CARNOT_TOLERANCES_HPP

namespace carnot {
namespace tol {

/// Relative singular-value threshold for all rank / kernel decisions.
inline constexpr double kRank = 1e-9;

/// Absolute target for the geodesic second-layer quadrature.
inline constexpr double kQuadrature = 1e-10;

/// Shooting solver: converged when residual <= kShooting * (1 + |target|).
inline constexpr double kShooting = 1e-8;

/// Allowed drift of the speed along a sampled geodesic.
inline constexpr double kSpeed = 1e-10;

/// sigma_min below this certifies a non-Metivier witness.
inline constexpr double kMetivierWitness = 1e-12;

/// sigma_min above this (for every descent start) certifies Metivier by sampling.
inline constexpr double kMetivierClear = 1e-6;

/// Slack of the minimizing-covector filter: |xi0| <= d + kMinimizing*(1+|xi0|).
inline constexpr double kMinimizing = 1e-3;

}  // namespace tol
}  // namespace carnot

#endif
