#ifndef CARNOT_FILTRATION_HPP
#define CARNOT_FILTRATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/jmap.hpp"
#include "carnot/rng.hpp"
#include "carnot/structure_constants.hpp"
#include "carnot/tolerances.hpp"

namespace carnot {

namespace detail {

/// Tracks how close any rank decision came to the threshold.
struct RankWatch {
  double smallest_kept_ratio = 1.0;   // min over decisions of (kept sv)/sv_max
  double largest_dropped_ratio = 0.0; // max over decisions of (dropped sv)/sv_max

  void observe(const Eigen::VectorXd& sv, int rank) {
    if (sv.size() == 0 || sv[0] <= 0.0) return;
    for (int k = 0; k < sv.size(); ++k) {
      const double ratio = sv[k] / sv[0];
      if (k < rank && ratio < smallest_kept_ratio) smallest_kept_ratio = ratio;
      if (k >= rank && ratio > largest_dropped_ratio) largest_dropped_ratio = ratio;
    }
  }
};

/// Orthonormal basis of the column span, singular values thresholded at
/// tol::kRank relative to the largest.
inline Eigen::MatrixXd span_basis(const Eigen::MatrixXd& A, RankWatch* watch = nullptr) {
  if (A.cols() == 0) return Eigen::MatrixXd(A.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return Eigen::MatrixXd(A.rows(), 0);
  int rank = 0;
  while (rank < sv.size() && sv[rank] > tol::kRank * sv[0]) ++rank;
  if (watch) watch->observe(sv, rank);
  return svd.matrixU().leftCols(rank);
}

/// Orthonormal basis of the numerical kernel of A (right singular vectors
/// past the numerical rank).
inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& A, RankWatch* watch = nullptr) {
  const int cols = static_cast<int>(A.cols());
  if (cols == 0) return Eigen::MatrixXd(0, 0);
  if (A.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv[0] > 0.0)
    while (rank < sv.size() && sv[rank] > tol::kRank * sv[0]) ++rank;
  if (watch) watch->observe(sv, rank);
  return svd.matrixV().rightCols(cols - rank);
}

}  // namespace detail

/// Orthonormal basis of U^ell(p) = span{xi, J_u xi, ..., J_u^{ell-1} xi}.
/// U^0 = {0}; returns an m x r matrix (r possibly 0).
inline Eigen::MatrixXd flag_subspace(const StructureConstants& sc, const GroupPoint& p, int ell) {
  sc.require_point(p);
  if (ell < 0) throw DomainError("flag_subspace: ell must be >= 0");
  Eigen::MatrixXd K(sc.m(), ell);
  Eigen::VectorXd w = p.xi;
  const Eigen::MatrixXd J = j_operator(sc, p.u).mat;
  for (int c = 0; c < ell; ++c) {
    K.col(c) = w;
    w = J * w;
  }
  return detail::span_basis(K);
}

/// Orthonormal basis of U_ell(p) = {v in g2 : J_v(U^ell(p)) = 0}, computed as
/// the numerical kernel of the stacked (m*r) x d2 matrix v -> (J_v b_1, ...,
/// J_v b_r). U_0(p) = g2.
inline Eigen::MatrixXd annihilator(const StructureConstants& sc, const GroupPoint& p, int ell) {
  sc.require_point(p);
  if (ell < 0) throw DomainError("annihilator: ell must be >= 0");
  const Eigen::MatrixXd B = flag_subspace(sc, p, ell);
  const int r = static_cast<int>(B.cols());
  if (r == 0) return Eigen::MatrixXd::Identity(sc.d2(), sc.d2());
  Eigen::MatrixXd M(sc.m() * r, sc.d2());
  for (int l = 0; l < sc.d2(); ++l) {
    const Eigen::MatrixXd Jl = j_operator(sc, Eigen::VectorXd::Unit(sc.d2(), l)).mat;
    for (int b = 0; b < r; ++b) M.block(b * sc.m(), l, sc.m(), 1) = Jl * B.col(b);
  }
  return detail::kernel_basis(M);
}

/// Dimensions of the orthogonal splitting g2 = (+) W_ell(p) (+) W_inf(p) and
/// the pointwise invariant N(p).
struct FiltrationReport {
  GroupPoint p;
  std::vector<int> dims_W;       // dim W_0, ..., dim W_{L-1} up to stabilization
  int dim_W_inf = 0;
  bool finite = false;           // W_inf(p) == {0}
  long N = 0;                    // N(p) when finite; unset otherwise
  double smallest_kept_ratio = 1.0;
  double largest_dropped_ratio = 0.0;

  int sum_dims() const {
    int s = dim_W_inf;
    for (int d : dims_W) s += d;
    return s;
  }
};

inline FiltrationReport w_decomposition(const StructureConstants& sc, const GroupPoint& p) {
  sc.require_point(p);
  FiltrationReport rep;
  rep.p = p;
  detail::RankWatch watch;

  const Eigen::MatrixXd J = j_operator(sc, p.u).mat;

  // Krylov flags until stabilization (at most m steps).
  std::vector<Eigen::MatrixXd> flags;  // flags[ell] = basis of U^ell
  flags.push_back(Eigen::MatrixXd(sc.m(), 0));
  {
    Eigen::MatrixXd K(sc.m(), sc.m() + 1);
    Eigen::VectorXd w = p.xi;
    for (int c = 0; c <= sc.m(); ++c) {
      K.col(c) = w;
      w = J * w;
    }
    for (int ell = 1; ell <= sc.m() + 1; ++ell) {
      flags.push_back(detail::span_basis(K.leftCols(ell), &watch));
      if (flags[ell].cols() == flags[ell - 1].cols()) break;  // Krylov spans never regrow
    }
  }
  const int L = static_cast<int>(flags.size()) - 2;  // first ell with dim U^ell = dim U^{ell+1}

  // Annihilators U_0 .. U_L; dim W_ell = dim U_ell - dim U_{ell+1}.
  std::vector<int> dim_U(L + 1);
  for (int ell = 0; ell <= L; ++ell) {
    const Eigen::MatrixXd& B = flags[ell];
    const int r = static_cast<int>(B.cols());
    if (r == 0) {
      dim_U[ell] = sc.d2();
      continue;
    }
    Eigen::MatrixXd M(sc.m() * r, sc.d2());
    for (int l = 0; l < sc.d2(); ++l) {
      const Eigen::MatrixXd Jl = j_operator(sc, Eigen::VectorXd::Unit(sc.d2(), l)).mat;
      for (int b = 0; b < r; ++b) M.block(b * sc.m(), l, sc.m(), 1) = Jl * B.col(b);
    }
    dim_U[ell] = static_cast<int>(detail::kernel_basis(M, &watch).cols());
  }

  rep.dims_W.resize(L);
  for (int ell = 0; ell < L; ++ell) rep.dims_W[ell] = dim_U[ell] - dim_U[ell + 1];
  rep.dim_W_inf = dim_U[L];  // U_ell stabilizes with the flag
  rep.finite = rep.dim_W_inf == 0;
  if (rep.finite) {
    long acc = 2L * sc.homogeneous_dim() - sc.n();
    for (int ell = 0; ell < L; ++ell) acc += 2L * ell * rep.dims_W[ell];
    rep.N = acc;
  }
  rep.smallest_kept_ratio = watch.smallest_kept_ratio;
  rep.largest_dropped_ratio = watch.largest_dropped_ratio;
  return rep;
}

/// Result of the N_0 candidate search. best_value is a certified lower bound
/// for N_0 = sup of the finite N(p); the argmax is kept for reproduction.
struct N0SearchResult {
  bool found = false;
  long best_value = 0;
  GroupPoint argmax;
  long samples_evaluated = 0;
  std::uint64_t seed = 0;
};

/// Evaluates N(p) over (a) basis points xi = X_i, u = Y_j; (b) sparse
/// combinations xi in {X_i +- X_j}, u in {Y_a +- Y_b}; (c) `budget` seeded
/// standard-normal points. Returns the maximum finite value found.
inline N0SearchResult n0_search(const StructureConstants& sc, long budget, std::uint64_t seed) {
  if (budget <= 0) throw DomainError("n0_search: budget must be positive");
  N0SearchResult res;
  res.seed = seed;

  auto consider = [&](const GroupPoint& p) {
    const FiltrationReport rep = w_decomposition(sc, p);
    ++res.samples_evaluated;
    if (rep.finite && (!res.found || rep.N > res.best_value)) {
      res.found = true;
      res.best_value = rep.N;
      res.argmax = p;
    }
  };

  const int m = sc.m(), d2 = sc.d2();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d2; ++j)
      consider(GroupPoint(Eigen::VectorXd::Unit(m, i), Eigen::VectorXd::Unit(d2, j)));

  std::vector<Eigen::VectorXd> sparse_xi, sparse_u;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (double s : {1.0, -1.0})
        sparse_xi.push_back(Eigen::VectorXd::Unit(m, i) + s * Eigen::VectorXd::Unit(m, j));
  for (int a = 0; a < d2; ++a)
    for (int b = a + 1; b < d2; ++b)
      for (double s : {1.0, -1.0})
        sparse_u.push_back(Eigen::VectorXd::Unit(d2, a) + s * Eigen::VectorXd::Unit(d2, b));
  for (const auto& xi : sparse_xi)
    for (const auto& u : sparse_u) consider(GroupPoint(xi, u));

  Rng rng(seed);
  for (long k = 0; k < budget; ++k)
    consider(GroupPoint(rng.normal_vector(m), rng.normal_vector(d2)));

  if (res.found) {
    // The stored best must reproduce from scratch.
    const FiltrationReport check = w_decomposition(sc, res.argmax);
    if (!check.finite || check.N != res.best_value)
      throw NumericalError("n0_search: best value failed recomputation");
  }
  return res;
}

}  // namespace carnot

#endif
